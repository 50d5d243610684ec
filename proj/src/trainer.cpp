#include "riskner/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "riskner/errors.hpp"
#include "riskner/tagcodec.hpp"

namespace riskner {

const char* optimizer_name(OptimizerKind kind) {
    return kind == OptimizerKind::Adam ? "adam" : "adamw";
}

OptimizerKind optimizer_from_name(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "adam") return OptimizerKind::Adam;
    if (lower == "adamw") return OptimizerKind::AdamW;
    raise(ErrorKind::Config, "unknown optimizer \"" + name + "\" (expected adam or adamw)");
}

void TrainConfig::validate() const {
    if (lr <= 0.0) raise(ErrorKind::Config, "lr must be positive");
    if (batch_size < 1) raise(ErrorKind::Config, "batch_size must be at least 1");
    if (epsilon <= 0.0) raise(ErrorKind::Config, "epsilon must be positive");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        raise(ErrorKind::Config, "dropout_rate must lie in [0, 1)");
    }
    if (weight_decay < 0.0) raise(ErrorKind::Config, "weight_decay must be non-negative");
    if (max_len < 3) raise(ErrorKind::Config, "max_len must be at least 3");
}

TrainConfig parse_train_config(const std::string& text, const TrainConfig& base) {
    TrainConfig config = base;
    std::istringstream is(text);
    std::string line;
    std::size_t line_no = 0;
    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            raise(ErrorKind::Config,
                  "config line " + std::to_string(line_no) + ": expected \"key = value\"");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        try {
            if (key == "lr") {
                config.lr = std::stod(value);
            } else if (key == "batch_size") {
                config.batch_size = std::stoul(value);
            } else if (key == "epochs") {
                config.epochs = std::stoul(value);
            } else if (key == "epsilon") {
                config.epsilon = std::stod(value);
            } else if (key == "optimizer") {
                config.optimizer = optimizer_from_name(value);
            } else if (key == "weight_decay") {
                config.weight_decay = std::stod(value);
            } else if (key == "dropout_rate") {
                config.dropout_rate = std::stod(value);
            } else if (key == "max_len") {
                config.max_len = std::stoul(value);
            } else if (key == "seed") {
                config.seed = std::stoull(value);
            } else {
                raise(ErrorKind::Config, "config line " + std::to_string(line_no) +
                                             ": unknown key \"" + key + "\"");
            }
        } catch (const std::invalid_argument&) {
            raise(ErrorKind::Config, "config line " + std::to_string(line_no) +
                                         ": cannot parse value \"" + value + "\"");
        }
    }
    return config;
}

OptimizerState OptimizerState::for_parameters(const std::vector<nn::Parameter*>& params) {
    OptimizerState state;
    state.m.reserve(params.size());
    state.v.reserve(params.size());
    for (const nn::Parameter* p : params) {
        state.m.emplace_back(p->value.shape());
        state.v.emplace_back(p->value.shape());
    }
    return state;
}

namespace {

void check_state(const std::vector<nn::Parameter*>& params, const OptimizerState& state) {
    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        raise(ErrorKind::ShapeMismatch, "optimizer state does not match the parameter list");
    }
}

void adam_update(const std::vector<nn::Parameter*>& params, OptimizerState& state, double lr,
                 double beta1, double beta2, double eps) {
    check_state(params, state);
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        nn::Parameter& p = *params[i];
        double* theta = p.value.data();
        const double* g = p.grad.data();
        double* m = state.m[i].data();
        double* v = state.v[i].data();
        for (std::size_t j = 0; j < p.value.size(); ++j) {
            m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
            v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            theta[j] -= lr * mhat / (std::sqrt(vhat) + eps);
            if (!std::isfinite(theta[j])) {
                raise(ErrorKind::NonFiniteUpdate, "parameter '" + p.name + "' became non-finite");
            }
        }
    }
}

}  // namespace

void adam_step(const std::vector<nn::Parameter*>& params, OptimizerState& state, double lr,
               double beta1, double beta2, double eps) {
    adam_update(params, state, lr, beta1, beta2, eps);
}

void adamw_step(const std::vector<nn::Parameter*>& params, OptimizerState& state, double lr,
                double beta1, double beta2, double eps, double weight_decay) {
    adam_update(params, state, lr, beta1, beta2, eps);
    for (nn::Parameter* p : params) {
        double* theta = p->value.data();
        for (std::size_t j = 0; j < p->value.size(); ++j) {
            theta[j] -= lr * weight_decay * theta[j];
        }
    }
}

void clip_grad_norm(const std::vector<nn::Parameter*>& params, double max_norm) {
    double sq = 0.0;
    for (const nn::Parameter* p : params) {
        const double* g = p->grad.data();
        for (std::size_t j = 0; j < p->grad.size(); ++j) sq += g[j] * g[j];
    }
    const double norm = std::sqrt(sq);
    if (norm <= max_norm || norm == 0.0) return;
    const double scale = max_norm / norm;
    for (nn::Parameter* p : params) {
        double* g = p->grad.data();
        for (std::size_t j = 0; j < p->grad.size(); ++j) g[j] *= scale;
    }
}

namespace {

std::vector<ModelExample> encode_corpus(const Corpus& corpus, const Vocabulary& vocab,
                                        const TagScheme& scheme, std::size_t max_len) {
    std::vector<ModelExample> examples;
    examples.reserve(corpus.size());
    for (const Sentence& s : corpus.sentences) {
        examples.push_back(encode_sentence(s, vocab, scheme, max_len));
    }
    return examples;
}

std::pair<std::vector<std::vector<EntitySpan>>, std::vector<std::vector<EntitySpan>>>
collect_spans(EncoderModel& model, const std::vector<ModelExample>& examples,
              const TagScheme& scheme) {
    std::vector<std::vector<EntitySpan>> gold;
    std::vector<std::vector<EntitySpan>> pred;
    gold.reserve(examples.size());
    pred.reserve(examples.size());
    for (const ModelExample& ex : examples) {
        const std::vector<int> predicted = model.predict(ex);
        std::vector<int> gold_tags;
        std::vector<int> pred_tags;
        for (std::size_t i = 0; i < ex.n_real; ++i) {
            const int g = ex.label_ids[1 + i];
            if (g == kIgnoreLabel) continue;  // special/subword/dropped positions
            gold_tags.push_back(g);
            pred_tags.push_back(predicted[i]);
        }
        gold.push_back(decode_spans(gold_tags, scheme));
        pred.push_back(decode_spans(repair_tags(pred_tags, scheme).first, scheme, true));
    }
    return {std::move(gold), std::move(pred)};
}

MetricsTable metrics_for(EncoderModel& model, const std::vector<ModelExample>& examples,
                         const TagScheme& scheme) {
    auto [gold, pred] = collect_spans(model, examples, scheme);
    return make_metrics_table(count_matches(gold, pred, scheme), scheme);
}

double macro_f1(EncoderModel& model, const std::vector<ModelExample>& examples,
                const TagScheme& scheme) {
    return metrics_for(model, examples, scheme).average.f1;
}

}  // namespace

TrainHistory train(EncoderModel& model, const Corpus& train_corpus, const Corpus& val_corpus,
                   const Vocabulary& vocab, const TagScheme& scheme, const TrainConfig& config) {
    config.validate();
    if (train_corpus.empty()) raise(ErrorKind::EmptyCorpus, "training corpus is empty");

    const std::vector<ModelExample> train_ex =
        encode_corpus(train_corpus, vocab, scheme, config.max_len);
    const std::vector<ModelExample> val_ex =
        encode_corpus(val_corpus, vocab, scheme, config.max_len);

    // The TrainConfig owns the dropout rate for this run.
    model.set_dropout_rate(config.dropout_rate);

    const std::vector<nn::Parameter*> params = model.parameters();
    OptimizerState state = OptimizerState::for_parameters(params);
    SplitMix64 dropout_rng(derive_seed(config.seed, 0xD409));

    TrainHistory history;
    history.reserve(config.epochs);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        const std::vector<std::size_t> order =
            shuffled_indices(train_ex.size(), derive_seed(config.seed, 0x50000 + epoch));

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        std::size_t cursor = 0;
        while (cursor < order.size()) {
            const std::size_t batch_end = std::min(cursor + config.batch_size, order.size());
            const std::size_t batch_n = batch_end - cursor;
            model.zero_grad();
            double batch_loss = 0.0;
            try {
                for (std::size_t i = cursor; i < batch_end; ++i) {
                    nn::Tape tape;
                    nn::Var loss = model.loss(tape, train_ex[order[i]], true, &dropout_rng);
                    batch_loss += tape.value(loss).item();
                    tape.backward(loss);
                }
                batch_loss /= static_cast<double>(batch_n);
                if (!std::isfinite(batch_loss)) {
                    raise(ErrorKind::DivergedLoss, "training loss is not finite");
                }
                // Gradients hold the sum over the batch; rescale to the mean.
                const double inv_n = 1.0 / static_cast<double>(batch_n);
                for (nn::Parameter* p : params) {
                    double* g = p->grad.data();
                    for (std::size_t j = 0; j < p->grad.size(); ++j) g[j] *= inv_n;
                }
                clip_grad_norm(params, kGradClipNorm);
                if (config.optimizer == OptimizerKind::Adam) {
                    adam_step(params, state, config.lr, kAdamBeta1, kAdamBeta2, config.epsilon);
                } else {
                    adamw_step(params, state, config.lr, kAdamBeta1, kAdamBeta2, config.epsilon,
                               config.weight_decay);
                }
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::NonFiniteValue ||
                    e.kind() == ErrorKind::NonFiniteGradient ||
                    e.kind() == ErrorKind::NonFiniteUpdate) {
                    raise(ErrorKind::DivergedLoss, e.what());
                }
                throw;
            }
            epoch_loss += batch_loss;
            ++batches;
            cursor = batch_end;
        }

        EpochStats stats;
        stats.train_loss = batches > 0 ? epoch_loss / static_cast<double>(batches) : 0.0;
        stats.val_macro_f1 = val_ex.empty() ? 0.0 : macro_f1(model, val_ex, scheme);
        stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                            .count();
        history.push_back(stats);
    }
    return history;
}

MetricsTable evaluate(EncoderModel& model, const Corpus& corpus, const Vocabulary& vocab,
                      const TagScheme& scheme, std::size_t max_len) {
    const std::vector<ModelExample> examples = encode_corpus(corpus, vocab, scheme, max_len);
    return metrics_for(model, examples, scheme);
}

}  // namespace riskner
