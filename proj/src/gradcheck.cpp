#include "riskner/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "riskner/errors.hpp"
#include "riskner/rng.hpp"

namespace riskner::nn {

GradCheckResult grad_check(const std::function<double(bool)>& f,
                           const std::vector<Parameter*>& params, double h,
                           std::size_t n_coords, std::uint64_t seed) {
    if (h <= 0.0) raise(ErrorKind::ShapeMismatch, "grad_check step h must be positive");

    std::size_t total = 0;
    for (const Parameter* p : params) total += p->value.size();
    if (total == 0) return {};

    for (Parameter* p : params) p->zero_grad();
    f(true);

    SplitMix64 rng(seed);
    GradCheckResult result;
    for (std::size_t s = 0; s < n_coords; ++s) {
        std::size_t flat = static_cast<std::size_t>(rng.below(total));
        Parameter* p = nullptr;
        for (Parameter* cand : params) {
            if (flat < cand->value.size()) {
                p = cand;
                break;
            }
            flat -= cand->value.size();
        }

        const double saved = p->value[flat];
        p->value[flat] = saved + h;
        const double up = f(false);
        p->value[flat] = saved - h;
        const double down = f(false);
        p->value[flat] = saved;

        const double numeric = (up - down) / (2.0 * h);
        const double analytic = p->grad[flat];
        if (!std::isfinite(numeric) || !std::isfinite(analytic)) {
            raise(ErrorKind::NonFiniteValue, "grad_check encountered a non-finite derivative");
        }
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        result.max_rel_error = std::max(result.max_rel_error, std::abs(analytic - numeric) / denom);
        ++result.coords_checked;
    }
    return result;
}

}  // namespace riskner::nn
