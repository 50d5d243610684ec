#pragma once

#include <cstdint>
#include <vector>

#include "riskner/tape.hpp"

namespace riskner::nn {

/// Differentiable op set. Every function validates shapes, computes the
/// forward value through the kernels, and records the backward rule on the
/// tape. Matrices are 2D row-major tensors.

// c = a @ b for a [m,k], b [k,n].
Var matmul(Tape& tape, Var a, Var b);

// Elementwise a + b. b may have the same shape as a, or a shape that is a
// trailing suffix of a's (broadcast over the leading dims, e.g. bias add).
Var add(Tape& tape, Var a, Var b);

// Rows of `table` selected by ids; table [V,d] -> [ids.size(), d].
Var embedding_lookup(Tape& tape, Var table, const std::vector<std::size_t>& ids);

// Row-wise layer norm over the last dim with learned gain/bias vectors.
Var layer_norm(Tape& tape, Var x, Var gain, Var bias, double eps);

// Softmax over the last dim. `mask` (may be empty) marks valid key columns
// with 1; masked columns get -1e9 added before normalization. A fully masked
// row yields zeros.
Var softmax(Tape& tape, Var x, const Tensor& mask);

Var gelu(Tape& tape, Var x);

// Inverted dropout: identity when !training or rate == 0, otherwise each unit
// is zeroed with probability `rate` and survivors scale by 1/(1-rate). The
// mask is a pure function of (seed, flat index).
Var dropout(Tape& tape, Var x, double rate, bool training, std::uint64_t seed);

// Mean token-level cross entropy of logits [L,C] against integer targets;
// positions with target == ignore_index are excluded from the mean.
Var cross_entropy(Tape& tape, Var logits, const std::vector<int>& targets, int ignore_index);

// Plumbing ops used by the encoder and tests.
Var transpose(Tape& tape, Var x);
Var scale(Tape& tape, Var x, double c);
Var concat_cols(Tape& tape, const std::vector<Var>& xs);
Var sum(Tape& tape, Var x);

inline constexpr int kIgnoreIndex = -1;

}  // namespace riskner::nn
