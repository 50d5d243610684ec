#include <cmath>

#include "riskner/kernels.hpp"

namespace riskner::kernels::serial {

void matmul_nn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
            c[i * n + j] = acc;
        }
    }
}

void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
            c[i * n + j] = acc;
        }
    }
}

void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * b[p * n + j];
            c[i * n + j] = acc;
        }
    }
}

void softmax_rows(const double* x, const double* mask, double* y,
                  std::size_t rows, std::size_t cols) {
    constexpr double penalty = -1e9;
    for (std::size_t i = 0; i < rows; ++i) {
        const double* xrow = x + i * cols;
        double* yrow = y + i * cols;
        double mx = -HUGE_VAL;
        for (std::size_t j = 0; j < cols; ++j) {
            const double v = xrow[j] + ((mask != nullptr && mask[j] == 0.0) ? penalty : 0.0);
            if (v > mx) mx = v;
        }
        if (mx <= penalty / 2) {
            for (std::size_t j = 0; j < cols; ++j) yrow[j] = 0.0;
            continue;
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            const double v = xrow[j] + ((mask != nullptr && mask[j] == 0.0) ? penalty : 0.0);
            const double e = std::exp(v - mx);
            yrow[j] = e;
            sum += e;
        }
        const double inv = 1.0 / sum;
        for (std::size_t j = 0; j < cols; ++j) yrow[j] *= inv;
    }
}

void layer_norm_rows(const double* x, const double* gain, const double* bias,
                     double eps, double* y, double* xhat, double* inv_std,
                     std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* xrow = x + i * cols;
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
            xhat[i * cols + j] = h;
            y[i * cols + j] = h * gain[j] + bias[j];
        }
    }
}

void gelu(const double* x, double* y, std::size_t n) {
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = 0.5 * x[i] * (1.0 + std::erf(x[i] * inv_sqrt2));
    }
}

}  // namespace riskner::kernels::serial
