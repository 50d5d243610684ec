#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "riskner/tape.hpp"

namespace riskner::nn {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t coords_checked = 0;
};

/// Compares tape gradients against central finite differences.
///
/// `f(with_grad)` must evaluate the (deterministic, dropout-off) scalar loss
/// at the current parameter values; when with_grad is set it must also run a
/// backward pass so Parameter.grad holds the analytic gradient afterwards.
/// Samples `n_coords` coordinates across all parameters using `seed`, and for
/// each returns the worst of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
GradCheckResult grad_check(const std::function<double(bool)>& f,
                           const std::vector<Parameter*>& params, double h,
                           std::size_t n_coords, std::uint64_t seed);

}  // namespace riskner::nn
