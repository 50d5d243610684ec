#include "riskner/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "riskner/errors.hpp"
#include "riskner/persistence.hpp"

namespace riskner {

using nlohmann::json;

GridSpace GridSpace::default_space() {
    GridSpace space;
    space.lrs = {1e-6, 5e-6, 1e-5, 3e-5, 5e-5, 1e-4, 5e-4, 1e-3};
    space.epsilons = {1e-7, 1e-8, 1e-9};
    space.batch_sizes = {16, 32, 64};
    space.optimizers = {OptimizerKind::Adam, OptimizerKind::AdamW};
    return space;
}

void GridSpace::validate() const {
    const auto no_dups = [](const auto& values, const char* axis) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            for (std::size_t j = i + 1; j < values.size(); ++j) {
                if (values[i] == values[j]) {
                    raise(ErrorKind::Config, std::string("duplicate value on the ") + axis +
                                                 " axis");
                }
            }
        }
    };
    if (lrs.empty()) raise(ErrorKind::EmptyAxis, "lr axis is empty");
    if (epsilons.empty()) raise(ErrorKind::EmptyAxis, "epsilon axis is empty");
    if (batch_sizes.empty()) raise(ErrorKind::EmptyAxis, "batch_size axis is empty");
    if (optimizers.empty()) raise(ErrorKind::EmptyAxis, "optimizer axis is empty");
    no_dups(lrs, "lr");
    no_dups(epsilons, "epsilon");
    no_dups(batch_sizes, "batch_size");
    no_dups(optimizers, "optimizer");
}

GridSpace GridSpace::from_json(const std::string& text) {
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) raise(ErrorKind::Config, "grid file is not valid JSON");
    GridSpace space;
    space.lrs = j.at("lr").get<std::vector<double>>();
    space.epsilons = j.at("epsilon").get<std::vector<double>>();
    space.batch_sizes = j.at("batch_size").get<std::vector<std::size_t>>();
    for (const json& name : j.at("optimizer")) {
        space.optimizers.push_back(optimizer_from_name(name.get<std::string>()));
    }
    space.validate();
    return space;
}

std::string GridSpace::to_json() const {
    json j;
    j["lr"] = lrs;
    j["epsilon"] = epsilons;
    j["batch_size"] = batch_sizes;
    json opts = json::array();
    for (OptimizerKind o : optimizers) opts.push_back(optimizer_name(o));
    j["optimizer"] = std::move(opts);
    return j.dump(2) + "\n";
}

std::vector<TrainConfig> enumerate_grid(const GridSpace& space, const TrainConfig& base) {
    space.validate();
    std::vector<TrainConfig> configs;
    configs.reserve(space.size());
    for (double lr : space.lrs) {
        for (double eps : space.epsilons) {
            for (std::size_t batch : space.batch_sizes) {
                for (OptimizerKind opt : space.optimizers) {
                    TrainConfig c = base;
                    c.lr = lr;
                    c.epsilon = eps;
                    c.batch_size = batch;
                    c.optimizer = opt;
                    configs.push_back(c);
                }
            }
        }
    }
    return configs;
}

const char* trial_status_name(TrialStatus status) {
    switch (status) {
        case TrialStatus::Done: return "done";
        case TrialStatus::Diverged: return "diverged";
        case TrialStatus::Failed: return "failed";
    }
    return "unknown";
}

namespace {

TrialStatus trial_status_from_name(const std::string& name) {
    if (name == "done") return TrialStatus::Done;
    if (name == "diverged") return TrialStatus::Diverged;
    if (name == "failed") return TrialStatus::Failed;
    raise(ErrorKind::LedgerCorrupt, "unknown trial status \"" + name + "\"");
}

}  // namespace

std::string trial_record_to_json(const TrialRecord& r) {
    json j;
    j["combo_id"] = r.combo_id;
    j["config"] = {{"lr", r.config.lr},
                   {"epsilon", r.config.epsilon},
                   {"batch_size", r.config.batch_size},
                   {"optimizer", optimizer_name(r.config.optimizer)},
                   {"epochs", r.config.epochs},
                   {"weight_decay", r.config.weight_decay},
                   {"dropout_rate", r.config.dropout_rate},
                   {"max_len", r.config.max_len},
                   {"seed", r.config.seed}};
    j["status"] = trial_status_name(r.status);
    j["efficiency_seconds"] = r.efficiency_seconds;
    if (r.status == TrialStatus::Done) {
        j["precision"] = r.precision;
        j["recall"] = r.recall;
        j["f1"] = r.f1;
    }
    if (!r.message.empty()) j["message"] = r.message;
    return j.dump();
}

TrialRecord trial_record_from_json(const std::string& line) {
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) raise(ErrorKind::LedgerCorrupt, "unparseable trial record line");
    TrialRecord r;
    r.combo_id = j.at("combo_id").get<std::size_t>();
    const json& c = j.at("config");
    r.config.lr = c.at("lr").get<double>();
    r.config.epsilon = c.at("epsilon").get<double>();
    r.config.batch_size = c.at("batch_size").get<std::size_t>();
    r.config.optimizer = optimizer_from_name(c.at("optimizer").get<std::string>());
    r.config.epochs = c.value("epochs", std::size_t{10});
    r.config.weight_decay = c.value("weight_decay", 0.01);
    r.config.dropout_rate = c.value("dropout_rate", 0.5);
    r.config.max_len = c.value("max_len", std::size_t{128});
    r.config.seed = c.value("seed", std::uint64_t{42});
    r.status = trial_status_from_name(j.at("status").get<std::string>());
    r.efficiency_seconds = j.value("efficiency_seconds", 0.0);
    r.precision = j.value("precision", 0.0);
    r.recall = j.value("recall", 0.0);
    r.f1 = j.value("f1", 0.0);
    r.message = j.value("message", "");
    return r;
}

GridRunResult run_grid(const GridSpace& space, const EncoderConfig& model_template,
                       const Corpus& train_corpus, const Corpus& val_corpus,
                       const TagScheme& scheme, const TrainConfig& base,
                       const GridRunOptions& options) {
    if (options.trial_epochs < 1) raise(ErrorKind::Config, "trial epochs must be at least 1");
    TrainConfig trial_base = base;
    trial_base.epochs = options.trial_epochs;
    trial_base.seed = options.seed;
    trial_base.max_len = model_template.max_len;
    const std::vector<TrainConfig> configs = enumerate_grid(space, trial_base);

    // Shared, immutable across trials: vocabulary from the train split.
    const Vocabulary vocab = build_vocab(train_corpus, 1);
    EncoderConfig enc = model_template;
    enc.vocab_size = vocab.size();
    enc.n_labels = scheme.n_labels();
    enc.validate();

    GridRunResult result;
    std::vector<TrialRecord> existing;
    std::set<std::size_t> completed;
    if (!options.records_path.empty()) {
        for (const std::string& line : read_jsonl_lines(options.records_path)) {
            TrialRecord r = trial_record_from_json(line);
            if (r.combo_id >= configs.size()) {
                raise(ErrorKind::LedgerCorrupt,
                      "trial store references combo " + std::to_string(r.combo_id) +
                          " outside the grid of " + std::to_string(configs.size()));
            }
            if (completed.insert(r.combo_id).second) existing.push_back(std::move(r));
        }
    }
    result.skipped = existing.size();

    std::vector<TrialRecord> fresh;
    std::mutex sink_mutex;
    std::atomic<std::size_t> next{0};

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (!completed.count(i)) todo.push_back(i);
    }

    const auto run_trial = [&](std::size_t combo_id) {
        TrialRecord record;
        record.combo_id = combo_id;
        record.config = configs[combo_id];
        const auto started = std::chrono::steady_clock::now();
        try {
            EncoderModel model(enc, options.seed);
            train(model, train_corpus, val_corpus, vocab, scheme, configs[combo_id]);
            const MetricsTable metrics =
                evaluate(model, val_corpus, vocab, scheme, configs[combo_id].max_len);
            record.precision = metrics.average.precision;
            record.recall = metrics.average.recall;
            record.f1 = metrics.average.f1;
            record.status = TrialStatus::Done;
        } catch (const Error& e) {
            record.status =
                e.kind() == ErrorKind::DivergedLoss ? TrialStatus::Diverged : TrialStatus::Failed;
            record.message = e.what();
        } catch (const std::exception& e) {
            record.status = TrialStatus::Failed;
            record.message = e.what();
        }
        record.efficiency_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        std::lock_guard<std::mutex> lock(sink_mutex);
        if (!options.records_path.empty()) {
            append_jsonl_line(options.records_path, trial_record_to_json(record));
        }
        if (options.verbose) {
            std::cerr << "trial " << record.combo_id << "/" << configs.size() << " "
                      << trial_status_name(record.status) << " f1=" << record.f1 << "\n";
        }
        fresh.push_back(std::move(record));
    };

    const std::size_t workers = std::max<std::size_t>(1, options.workers);
    if (workers == 1) {
        for (std::size_t id : todo) run_trial(id);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= todo.size()) return;
                    run_trial(todo[i]);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }

    result.trained = fresh.size();
    result.records = std::move(existing);
    result.records.insert(result.records.end(), fresh.begin(), fresh.end());
    std::sort(result.records.begin(), result.records.end(),
              [](const TrialRecord& a, const TrialRecord& b) { return a.combo_id < b.combo_id; });
    return result;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records, std::size_t k) {
    std::vector<TrialRecord> done;
    for (const TrialRecord& r : records) {
        if (r.status == TrialStatus::Done) done.push_back(r);
    }
    if (done.empty()) raise(ErrorKind::NoCompletedTrials, "no done trials to summarize");

    std::sort(done.begin(), done.end(), [](const TrialRecord& a, const TrialRecord& b) {
        if (a.f1 != b.f1) return a.f1 > b.f1;
        if (a.efficiency_seconds != b.efficiency_seconds) {
            return a.efficiency_seconds < b.efficiency_seconds;
        }
        return a.combo_id < b.combo_id;
    });

    const std::size_t top = std::min(k, done.size());
    std::vector<SummaryRow> rows;
    rows.reserve(top + 1);
    for (std::size_t i = 0; i < top; ++i) rows.push_back(SummaryRow{done[i], false});

    const TrialRecord& worst = done.back();
    bool flagged = false;
    for (SummaryRow& row : rows) {
        if (row.record.combo_id == worst.combo_id) {
            row.worst = true;
            flagged = true;
            break;
        }
    }
    if (!flagged) rows.push_back(SummaryRow{worst, true});
    return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows, const std::string& model_name) {
    std::ostringstream os;
    os << "model,lr,batch,epsilon,optimizer,precision,recall,f1,efficiency_s,note\n";
    for (const SummaryRow& row : rows) {
        const TrialRecord& r = row.record;
        os << model_name << "," << r.config.lr << "," << r.config.batch_size << ","
           << r.config.epsilon << "," << optimizer_name(r.config.optimizer) << ","
           << format_fixed6(r.precision) << "," << format_fixed6(r.recall) << ","
           << format_fixed6(r.f1) << "," << format_fixed6(r.efficiency_seconds) << ","
           << (row.worst ? "worst" : "") << "\n";
    }
    return os.str();
}

}  // namespace riskner
