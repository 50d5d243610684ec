#include "riskner/kernels.hpp"

#include <cmath>
#include <cstring>

#include "riskner/rng.hpp"

namespace riskner::kernels {

namespace {

constexpr double kMaskPenalty = -1e9;
constexpr double kInvSqrt2 = 0.7071067811865475244;

// Work thresholds below which the OpenMP dispatch is skipped. Desk-scale
// training matrices are often tiny; spawning a team costs more than the loop.
constexpr std::size_t kMinMatmulWork = 1u << 15;
constexpr std::size_t kMinRowWork = 1u << 14;
constexpr std::size_t kMinElemWork = 1u << 14;

}  // namespace

void matmul_nn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    const std::size_t work = m * k * n;
#pragma omp parallel for schedule(static) if (work >= kMinMatmulWork)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
        double* crow = c + i * n;
        std::memset(crow, 0, n * sizeof(double));
        const double* arow = a + i * k;
        // k-ascending accumulation per output element, same order as the
        // reference kernel, so the result is bitwise identical to it.
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    const std::size_t work = m * k * n;
#pragma omp parallel for schedule(static) if (work >= kMinMatmulWork)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] = acc;
        }
    }
}

void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    const std::size_t work = m * k * n;
#pragma omp parallel for schedule(static) if (work >= kMinMatmulWork)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
        double* crow = c + i * n;
        std::memset(crow, 0, n * sizeof(double));
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a[p * m + i];
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void softmax_rows(const double* x, const double* mask, double* y,
                  std::size_t rows, std::size_t cols) {
    const std::size_t work = rows * cols;
#pragma omp parallel for schedule(static) if (work >= kMinRowWork)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(rows); ++i) {
        const double* xrow = x + i * cols;
        double* yrow = y + i * cols;
        double mx = -HUGE_VAL;
        for (std::size_t j = 0; j < cols; ++j) {
            const double v = xrow[j] + ((mask != nullptr && mask[j] == 0.0) ? kMaskPenalty : 0.0);
            if (v > mx) mx = v;
        }
        if (mx <= kMaskPenalty / 2) {
            // Fully masked row: defined as all-zero so padded rows stay inert.
            for (std::size_t j = 0; j < cols; ++j) yrow[j] = 0.0;
            continue;
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            const double v = xrow[j] + ((mask != nullptr && mask[j] == 0.0) ? kMaskPenalty : 0.0);
            const double e = std::exp(v - mx);
            yrow[j] = e;
            sum += e;
        }
        const double inv = 1.0 / sum;
        for (std::size_t j = 0; j < cols; ++j) yrow[j] *= inv;
    }
}

void softmax_rows_backward(const double* y, const double* dy, double* dx,
                           std::size_t rows, std::size_t cols) {
    const std::size_t work = rows * cols;
#pragma omp parallel for schedule(static) if (work >= kMinRowWork)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(rows); ++i) {
        const double* yrow = y + i * cols;
        const double* dyrow = dy + i * cols;
        double* dxrow = dx + i * cols;
        double dot = 0.0;
        for (std::size_t j = 0; j < cols; ++j) dot += dyrow[j] * yrow[j];
        for (std::size_t j = 0; j < cols; ++j) dxrow[j] = yrow[j] * (dyrow[j] - dot);
    }
}

void layer_norm_rows(const double* x, const double* gain, const double* bias,
                     double eps, double* y, double* xhat, double* inv_std,
                     std::size_t rows, std::size_t cols) {
    const std::size_t work = rows * cols;
#pragma omp parallel for schedule(static) if (work >= kMinRowWork)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(rows); ++i) {
        const double* xrow = x + i * cols;
        double* yrow = y + i * cols;
        double* hrow = xhat + i * cols;
        double mean = 0.0;
        for (std::size_t j = 0; j < cols; ++j) mean += xrow[j];
        mean /= static_cast<double>(cols);
        double var = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            const double d = xrow[j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(cols);
        const double is = 1.0 / std::sqrt(var + eps);
        inv_std[i] = is;
        for (std::size_t j = 0; j < cols; ++j) {
            const double h = (xrow[j] - mean) * is;
            hrow[j] = h;
            yrow[j] = h * gain[j] + bias[j];
        }
    }
}

void layer_norm_rows_backward(const double* dy, const double* xhat, const double* inv_std,
                              const double* gain, double* dx, double* dgain, double* dbias,
                              std::size_t rows, std::size_t cols) {
    const double inv_n = 1.0 / static_cast<double>(cols);
    // dgain/dbias reduce over rows; accumulated serially so the result does
    // not depend on the thread count.
    for (std::size_t i = 0; i < rows; ++i) {
        const double* dyrow = dy + i * cols;
        const double* hrow = xhat + i * cols;
        for (std::size_t j = 0; j < cols; ++j) {
            dgain[j] += dyrow[j] * hrow[j];
            dbias[j] += dyrow[j];
        }
    }
    const std::size_t work = rows * cols;
#pragma omp parallel for schedule(static) if (work >= kMinRowWork)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(rows); ++i) {
        const double* dyrow = dy + i * cols;
        const double* hrow = xhat + i * cols;
        double* dxrow = dx + i * cols;
        double sum_g = 0.0;
        double sum_gh = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            const double g = dyrow[j] * gain[j];
            sum_g += g;
            sum_gh += g * hrow[j];
        }
        const double is = inv_std[i];
        for (std::size_t j = 0; j < cols; ++j) {
            const double g = dyrow[j] * gain[j];
            dxrow[j] = is * (g - inv_n * sum_g - hrow[j] * inv_n * sum_gh);
        }
    }
}

void gelu(const double* x, double* y, std::size_t n) {
#pragma omp parallel for schedule(static) if (n >= kMinElemWork)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        y[i] = 0.5 * x[i] * (1.0 + std::erf(x[i] * kInvSqrt2));
    }
}

void gelu_backward(const double* x, const double* dy, double* dx, std::size_t n) {
    constexpr double inv_sqrt_2pi = 0.3989422804014326779;
#pragma omp parallel for schedule(static) if (n >= kMinElemWork)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const double cdf = 0.5 * (1.0 + std::erf(x[i] * kInvSqrt2));
        const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x[i] * x[i]);
        dx[i] = dy[i] * (cdf + x[i] * pdf);
    }
}

void dropout(const double* x, double* y, std::size_t n, double rate, std::uint64_t seed) {
    const double scale = 1.0 / (1.0 - rate);
#pragma omp parallel for schedule(static) if (n >= kMinElemWork)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const double u = uniform_from_bits(splitmix64_element(seed, static_cast<std::uint64_t>(i)));
        y[i] = (u < rate) ? 0.0 : x[i] * scale;
    }
}

void dropout_backward(const double* dy, double* dx, std::size_t n, double rate,
                      std::uint64_t seed) {
    const double scale = 1.0 / (1.0 - rate);
#pragma omp parallel for schedule(static) if (n >= kMinElemWork)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const double u = uniform_from_bits(splitmix64_element(seed, static_cast<std::uint64_t>(i)));
        dx[i] = (u < rate) ? 0.0 : dy[i] * scale;
    }
}

}  // namespace riskner::kernels
