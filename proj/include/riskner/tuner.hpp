#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskner/corpus.hpp"
#include "riskner/encoder.hpp"
#include "riskner/trainer.hpp"

namespace riskner {

/// Hyper-parameter axes for the full-factorial search. The default mirrors
/// the 8 x 3 x 3 x 2 = 144-point space the tool sweeps out of the box.
struct GridSpace {
    std::vector<double> lrs;
    std::vector<double> epsilons;
    std::vector<std::size_t> batch_sizes;
    std::vector<OptimizerKind> optimizers;

    static GridSpace default_space();
    static GridSpace from_json(const std::string& text);
    std::string to_json() const;
    void validate() const;
    std::size_t size() const {
        return lrs.size() * epsilons.size() * batch_sizes.size() * optimizers.size();
    }
};

/// Cartesian product in lexicographic order of (lr, epsilon, batch,
/// optimizer); every other TrainConfig field is copied from `base`.
std::vector<TrainConfig> enumerate_grid(const GridSpace& space, const TrainConfig& base);

enum class TrialStatus { Done, Diverged, Failed };

const char* trial_status_name(TrialStatus status);

struct TrialRecord {
    std::size_t combo_id = 0;
    TrainConfig config;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double efficiency_seconds = 0.0;
    TrialStatus status = TrialStatus::Done;
    std::string message;
};

std::string trial_record_to_json(const TrialRecord& record);
TrialRecord trial_record_from_json(const std::string& line);

struct GridRunOptions {
    std::size_t trial_epochs = 10;
    std::uint64_t seed = 42;
    std::size_t workers = 1;
    std::string records_path;      // JSON-lines trial store; enables resume
    std::string model_name = "encoder";
    bool verbose = false;
};

struct GridRunResult {
    std::vector<TrialRecord> records;  // sorted by combo id
    std::size_t trained = 0;
    std::size_t skipped = 0;
};

/// Runs every grid combo not already present in the record store. Each trial
/// trains a fresh model from the shared seed on the train split and records
/// validation macro P/R/F1 plus wall-clock seconds. Diverging trials are
/// recorded with status=diverged; other per-trial failures with status=failed;
/// the sweep itself never aborts. Records append incrementally, so an
/// interrupted run resumes by skipping completed combo ids.
GridRunResult run_grid(const GridSpace& space, const EncoderConfig& model_template,
                       const Corpus& train_corpus, const Corpus& val_corpus,
                       const TagScheme& scheme, const TrainConfig& base,
                       const GridRunOptions& options);

struct SummaryRow {
    TrialRecord record;
    bool worst = false;
};

/// Top-k done trials by F1 (ties: lower efficiency_seconds, then lower combo
/// id) with the worst done trial flagged; appended if not already in the top.
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records, std::size_t k);

/// CSV mirroring the sweep report layout: model, lr, batch, epsilon,
/// optimizer, precision, recall, f1, efficiency_s, note.
std::string summary_csv(const std::vector<SummaryRow>& rows, const std::string& model_name);

}  // namespace riskner
