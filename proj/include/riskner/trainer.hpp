#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskner/corpus.hpp"
#include "riskner/encoder.hpp"
#include "riskner/evalmetrics.hpp"

namespace riskner {

enum class OptimizerKind { Adam, AdamW };

const char* optimizer_name(OptimizerKind kind);
OptimizerKind optimizer_from_name(const std::string& name);

struct TrainConfig {
    double lr = 3e-5;
    std::size_t batch_size = 32;
    std::size_t epochs = 10;
    double epsilon = 1e-8;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double weight_decay = 0.01;  // AdamW only
    double dropout_rate = 0.5;
    std::size_t max_len = 128;
    std::uint64_t seed = 42;

    void validate() const;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Parses a flat "key = value" config file ('#' comments allowed) and applies
/// it over `base`. Unknown keys are an error.
TrainConfig parse_train_config(const std::string& text, const TrainConfig& base = {});

/// Per-parameter Adam moment accumulators plus the shared step counter.
struct OptimizerState {
    std::vector<nn::Tensor> m;
    std::vector<nn::Tensor> v;
    std::uint64_t t = 0;

    static OptimizerState for_parameters(const std::vector<nn::Parameter*>& params);
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kGradClipNorm = 1.0;

/// One bias-corrected Adam step from the gradients currently in params.
void adam_step(const std::vector<nn::Parameter*>& params, OptimizerState& state, double lr,
               double beta1 = kAdamBeta1, double beta2 = kAdamBeta2, double eps = 1e-8);

/// Adam step followed by the decoupled decay theta -= lr * weight_decay * theta
/// (decay is never folded into the gradients or moments).
void adamw_step(const std::vector<nn::Parameter*>& params, OptimizerState& state, double lr,
                double beta1, double beta2, double eps, double weight_decay);

/// Scales all gradients so their global L2 norm is at most max_norm.
void clip_grad_norm(const std::vector<nn::Parameter*>& params, double max_norm);

struct EpochStats {
    double train_loss = 0.0;
    double val_macro_f1 = 0.0;
    double seconds = 0.0;
};

using TrainHistory = std::vector<EpochStats>;

/// Mini-batch training: per epoch a seeded shuffle, fixed-size batches (short
/// final batch kept), dropout-on forward, masked cross entropy, backward,
/// global-norm clipping, one optimizer step per batch, then a dropout-off
/// validation pass. Fully deterministic for fixed (seed, data, config).
/// Throws DivergedLoss when the loss stops being finite.
TrainHistory train(EncoderModel& model, const Corpus& train_corpus, const Corpus& val_corpus,
                   const Vocabulary& vocab, const TagScheme& scheme, const TrainConfig& config);

/// Dropout-off evaluation: argmax per non-IGNORE position, repair_tags,
/// decode_spans, exact-match counting against gold, then per-category P/R/F1
/// with the macro average row.
MetricsTable evaluate(EncoderModel& model, const Corpus& corpus, const Vocabulary& vocab,
                      const TagScheme& scheme, std::size_t max_len);

}  // namespace riskner
