#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "riskner/corpus.hpp"
#include "riskner/ops.hpp"
#include "riskner/rng.hpp"
#include "riskner/tape.hpp"

namespace riskner {

struct EncoderConfig {
    std::size_t vocab_size = 0;
    std::size_t d_model = 64;
    std::size_t n_heads = 4;
    std::size_t n_layers = 2;
    std::size_t d_ff = 256;
    std::size_t max_len = 128;
    std::size_t n_labels = 13;
    double dropout_rate = 0.5;

    std::size_t head_dim() const { return d_model / n_heads; }
    void validate() const;

    friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

/// Number of trainable scalars, a pure function of the config.
std::size_t encoder_parameter_count(const EncoderConfig& config);

enum class SequenceLength {
    Trimmed,     ///< process up to CLS + real tokens + SEP (padding sliced off)
    FullLength,  ///< process all max_len positions with attention masking
};

/// Token classifier: embeddings (token + position + segment), n_layers of
/// post-norm multi-head self-attention + feed-forward blocks, and a per-token
/// linear label head. The two sequence-length modes produce bitwise-identical
/// values at real token positions; Trimmed skips the all-padding tail.
class EncoderModel {
  public:
    EncoderModel(EncoderConfig config, std::uint64_t seed);

    const EncoderConfig& config() const noexcept { return config_; }
    std::uint64_t seed() const noexcept { return seed_; }
    void set_dropout_rate(double rate);

    std::vector<nn::Parameter*> parameters();
    std::vector<const nn::Parameter*> parameters() const;
    nn::Parameter* parameter(const std::string& name);
    std::size_t parameter_count() const;

    void zero_grad();

    /// Records the forward pass on `tape` and returns the logits variable
    /// ([L, n_labels]). `dropout_rng` supplies one mask seed per dropout site
    /// and is only consumed when training.
    nn::Var forward_logits(nn::Tape& tape, const ModelExample& example, bool training,
                           SplitMix64* dropout_rng,
                           SequenceLength length = SequenceLength::Trimmed);

    /// forward_logits + masked cross entropy against example.label_ids.
    nn::Var loss(nn::Tape& tape, const ModelExample& example, bool training,
                 SplitMix64* dropout_rng, SequenceLength length = SequenceLength::Trimmed);

    /// Inference logits as a plain tensor (no gradients recorded).
    nn::Tensor logits(const ModelExample& example,
                      SequenceLength length = SequenceLength::Trimmed);

    /// Argmax label ids at the real token positions 1..n_real, in order.
    std::vector<int> predict(const ModelExample& example);

  private:
    struct LayerParams {
        std::vector<std::size_t> wq, wk, wv;  // per head
        std::size_t wo;
        std::size_t ln1_gain, ln1_bias;
        std::size_t ff_w1, ff_b1, ff_w2, ff_b2;
        std::size_t ln2_gain, ln2_bias;
    };

    std::size_t add_param(const std::string& name, std::vector<std::size_t> shape);
    void init_weights();
    nn::Var leaf(nn::Tape& tape, std::size_t idx) { return tape.leaf(*params_[idx]); }

    EncoderConfig config_;
    std::uint64_t seed_;
    std::vector<std::unique_ptr<nn::Parameter>> params_;
    std::size_t token_emb_, pos_emb_, seg_emb_;
    std::vector<LayerParams> layers_;
    std::size_t cls_w_, cls_b_;
};

inline constexpr double kLayerNormEps = 1e-12;
inline constexpr double kInitStd = 0.02;

}  // namespace riskner
