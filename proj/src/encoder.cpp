#include "riskner/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "riskner/errors.hpp"

namespace riskner {

using nn::Tape;
using nn::Tensor;
using nn::Var;

void EncoderConfig::validate() const {
    if (vocab_size < Vocabulary::kReserved) {
        raise(ErrorKind::Config, "vocab_size must cover the reserved ids");
    }
    if (n_heads == 0 || d_model % n_heads != 0) {
        raise(ErrorKind::Config, "d_model must be divisible by n_heads");
    }
    if (max_len < 3) raise(ErrorKind::Config, "max_len must be at least 3");
    if (n_labels == 0) raise(ErrorKind::Config, "n_labels must be positive");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        raise(ErrorKind::Config, "dropout_rate must lie in [0, 1)");
    }
}

std::size_t encoder_parameter_count(const EncoderConfig& c) {
    const std::size_t d = c.d_model;
    const std::size_t per_layer = 3 * d * d   // q, k, v projections across heads
                                  + d * d     // output projection
                                  + 4 * d     // two layer norms
                                  + d * c.d_ff + c.d_ff + c.d_ff * d + d;
    return c.vocab_size * d + c.max_len * d + 2 * d + c.n_layers * per_layer +
           d * c.n_labels + c.n_labels;
}

EncoderModel::EncoderModel(EncoderConfig config, std::uint64_t seed)
    : config_(config), seed_(seed) {
    config_.validate();
    const std::size_t d = config_.d_model;
    const std::size_t dk = config_.head_dim();

    token_emb_ = add_param("token_emb", {config_.vocab_size, d});
    pos_emb_ = add_param("pos_emb", {config_.max_len, d});
    seg_emb_ = add_param("seg_emb", {2, d});
    for (std::size_t l = 0; l < config_.n_layers; ++l) {
        const std::string prefix = "layer" + std::to_string(l) + ".";
        LayerParams lp;
        for (std::size_t h = 0; h < config_.n_heads; ++h) {
            const std::string hp = prefix + "head" + std::to_string(h) + ".";
            lp.wq.push_back(add_param(hp + "wq", {d, dk}));
            lp.wk.push_back(add_param(hp + "wk", {d, dk}));
            lp.wv.push_back(add_param(hp + "wv", {d, dk}));
        }
        lp.wo = add_param(prefix + "wo", {d, d});
        lp.ln1_gain = add_param(prefix + "ln1.gain", {d});
        lp.ln1_bias = add_param(prefix + "ln1.bias", {d});
        lp.ff_w1 = add_param(prefix + "ff.w1", {d, config_.d_ff});
        lp.ff_b1 = add_param(prefix + "ff.b1", {config_.d_ff});
        lp.ff_w2 = add_param(prefix + "ff.w2", {config_.d_ff, d});
        lp.ff_b2 = add_param(prefix + "ff.b2", {d});
        lp.ln2_gain = add_param(prefix + "ln2.gain", {d});
        lp.ln2_bias = add_param(prefix + "ln2.bias", {d});
        layers_.push_back(std::move(lp));
    }
    cls_w_ = add_param("cls.w", {d, config_.n_labels});
    cls_b_ = add_param("cls.b", {config_.n_labels});

    init_weights();
}

std::size_t EncoderModel::add_param(const std::string& name, std::vector<std::size_t> shape) {
    params_.push_back(std::make_unique<nn::Parameter>(name, Tensor(std::move(shape))));
    return params_.size() - 1;
}

void EncoderModel::init_weights() {
    // Weights ~ N(0, 0.02^2), biases 0, layer-norm gains 1. One split-mix
    // stream in registration order keeps initialization reproducible.
    SplitMix64 rng(derive_seed(seed_, 0x1417));
    for (auto& p : params_) {
        const std::string& name = p->name;
        const bool is_gain = name.ends_with(".gain");
        const bool is_bias = name.ends_with(".bias") || name.ends_with(".b1") ||
                             name.ends_with(".b2") || name == "cls.b";
        if (is_gain) {
            p->value.fill(1.0);
        } else if (is_bias) {
            p->value.fill(0.0);
        } else {
            for (std::size_t i = 0; i < p->value.size(); ++i) {
                p->value[i] = kInitStd * rng.normal();
            }
        }
    }
}

std::vector<nn::Parameter*> EncoderModel::parameters() {
    std::vector<nn::Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
}

std::vector<const nn::Parameter*> EncoderModel::parameters() const {
    std::vector<const nn::Parameter*> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p.get());
    return out;
}

nn::Parameter* EncoderModel::parameter(const std::string& name) {
    for (auto& p : params_) {
        if (p->name == name) return p.get();
    }
    return nullptr;
}

std::size_t EncoderModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->value.size();
    return n;
}

void EncoderModel::zero_grad() {
    for (auto& p : params_) p->zero_grad();
}

void EncoderModel::set_dropout_rate(double rate) {
    if (rate < 0.0 || rate >= 1.0) raise(ErrorKind::Config, "dropout_rate must lie in [0, 1)");
    config_.dropout_rate = rate;
}

Var EncoderModel::forward_logits(Tape& tape, const ModelExample& example, bool training,
                                 SplitMix64* dropout_rng, SequenceLength length) {
    if (example.input_ids.size() != config_.max_len) {
        raise(ErrorKind::ShapeMismatch, "example was encoded for max_len " +
                                            std::to_string(example.input_ids.size()) +
                                            ", model expects " + std::to_string(config_.max_len));
    }
    const std::size_t L = length == SequenceLength::Trimmed
                              ? std::min(example.n_real + 2, config_.max_len)
                              : config_.max_len;
    const double rate = config_.dropout_rate;
    const bool use_dropout = training && rate > 0.0;
    if (use_dropout && dropout_rng == nullptr) {
        raise(ErrorKind::Config, "training forward needs a dropout seed stream");
    }
    auto drop_seed = [&]() -> std::uint64_t { return use_dropout ? dropout_rng->next() : 0; };

    std::vector<std::size_t> ids(example.input_ids.begin(), example.input_ids.begin() + L);
    std::vector<std::size_t> segs(example.segment_ids.begin(), example.segment_ids.begin() + L);
    std::vector<std::size_t> positions(L);
    for (std::size_t i = 0; i < L; ++i) positions[i] = i;
    Tensor mask({L});
    for (std::size_t i = 0; i < L; ++i) mask[i] = static_cast<double>(example.attention_mask[i]);

    // X = embLookup(ids) + position + segment
    Var x = nn::add(tape,
                    nn::add(tape, nn::embedding_lookup(tape, tape.leaf(*params_[token_emb_]), ids),
                            nn::embedding_lookup(tape, tape.leaf(*params_[pos_emb_]), positions)),
                    nn::embedding_lookup(tape, tape.leaf(*params_[seg_emb_]), segs));
    x = nn::dropout(tape, x, rate, use_dropout, drop_seed());

    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(config_.head_dim()));
    for (const LayerParams& lp : layers_) {
        // Multi-head self-attention: per head softmax(Q K^T / sqrt(d_k)) V,
        // heads concatenated then projected.
        std::vector<Var> heads;
        heads.reserve(config_.n_heads);
        for (std::size_t h = 0; h < config_.n_heads; ++h) {
            Var q = nn::matmul(tape, x, leaf(tape, lp.wq[h]));
            Var k = nn::matmul(tape, x, leaf(tape, lp.wk[h]));
            Var v = nn::matmul(tape, x, leaf(tape, lp.wv[h]));
            Var scores = nn::scale(tape, nn::matmul(tape, q, nn::transpose(tape, k)), inv_sqrt_dk);
            Var att = nn::softmax(tape, scores, mask);
            heads.push_back(nn::matmul(tape, att, v));
        }
        Var attn = nn::matmul(tape, nn::concat_cols(tape, heads), leaf(tape, lp.wo));
        attn = nn::dropout(tape, attn, rate, use_dropout, drop_seed());

        // Post-norm residuals: h = LN1(X + Att), X' = LN2(h + FFN(h)).
        Var h1 = nn::layer_norm(tape, nn::add(tape, attn, x), leaf(tape, lp.ln1_gain),
                                leaf(tape, lp.ln1_bias), kLayerNormEps);
        Var ff = nn::add(tape, nn::matmul(tape, h1, leaf(tape, lp.ff_w1)), leaf(tape, lp.ff_b1));
        ff = nn::gelu(tape, ff);
        ff = nn::add(tape, nn::matmul(tape, ff, leaf(tape, lp.ff_w2)), leaf(tape, lp.ff_b2));
        ff = nn::dropout(tape, ff, rate, use_dropout, drop_seed());
        x = nn::layer_norm(tape, nn::add(tape, ff, h1), leaf(tape, lp.ln2_gain),
                           leaf(tape, lp.ln2_bias), kLayerNormEps);
    }

    return nn::add(tape, nn::matmul(tape, x, leaf(tape, cls_w_)), leaf(tape, cls_b_));
}

Var EncoderModel::loss(Tape& tape, const ModelExample& example, bool training,
                       SplitMix64* dropout_rng, SequenceLength length) {
    Var logits = forward_logits(tape, example, training, dropout_rng, length);
    const std::size_t L = tape.value(logits).dim(0);
    std::vector<int> targets(example.label_ids.begin(), example.label_ids.begin() + L);
    return nn::cross_entropy(tape, logits, targets, kIgnoreLabel);
}

Tensor EncoderModel::logits(const ModelExample& example, SequenceLength length) {
    Tape tape;
    Var out = forward_logits(tape, example, false, nullptr, length);
    Tensor result = tape.value(out);
    tape.clear();
    return result;
}

std::vector<int> EncoderModel::predict(const ModelExample& example) {
    const Tensor out = logits(example, SequenceLength::Trimmed);
    std::vector<int> labels;
    labels.reserve(example.n_real);
    for (std::size_t i = 1; i <= example.n_real; ++i) {
        const double* row = out.data() + i * config_.n_labels;
        std::size_t best = 0;
        for (std::size_t j = 1; j < config_.n_labels; ++j) {
            if (row[j] > row[best]) best = j;
        }
        labels.push_back(static_cast<int>(best));
    }
    return labels;
}

}  // namespace riskner
