#pragma once

#include <cstddef>
#include <cstdint>

// Dense numeric kernels behind the tensor op set. The primary implementations
// in riskner::kernels parallelize independent output rows with OpenMP; every
// output element is accumulated in the same serial order regardless of thread
// count, so results are bitwise identical to the serial reference kernels in
// riskner::kernels::serial. The reference kernels are the oracle for the unit
// tests and the baseline for the kernel benchmark.

namespace riskner::kernels {

// c[m,n] = a[m,k] * b[k,n]
void matmul_nn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);

// c[m,n] = a[m,k] * b[n,k]^T
void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);

// c[m,n] = a[k,m]^T * b[k,n]
void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);

// Row-wise softmax with an optional additive key mask: where mask[j] == 0 the
// logit gets -1e9 before normalization. A fully masked row comes out all-zero.
void softmax_rows(const double* x, const double* mask, double* y,
                  std::size_t rows, std::size_t cols);

// dx for y = softmax(x) rows: dx = y * (dy - sum(dy * y)). All-zero rows
// (fully masked) produce zero gradient.
void softmax_rows_backward(const double* y, const double* dy, double* dx,
                           std::size_t rows, std::size_t cols);

// Row-wise layer norm. Writes y = xhat * gain + bias, and stores xhat and
// 1/sqrt(var + eps) for the backward pass.
void layer_norm_rows(const double* x, const double* gain, const double* bias,
                     double eps, double* y, double* xhat, double* inv_std,
                     std::size_t rows, std::size_t cols);

// Gradients for layer_norm_rows. dgain/dbias are accumulated (+=) so callers
// zero them first; dx is overwritten.
void layer_norm_rows_backward(const double* dy, const double* xhat, const double* inv_std,
                              const double* gain, double* dx, double* dgain, double* dbias,
                              std::size_t rows, std::size_t cols);

// Exact GELU: 0.5 * x * (1 + erf(x / sqrt(2))).
void gelu(const double* x, double* y, std::size_t n);
void gelu_backward(const double* x, const double* dy, double* dx, std::size_t n);

// Inverted dropout mask applied in place of a multiply: y = x * m where
// m[i] = 1/(1-rate) if splitmix64_element(seed, i) keeps the unit, else 0.
void dropout(const double* x, double* y, std::size_t n, double rate, std::uint64_t seed);
void dropout_backward(const double* dy, double* dx, std::size_t n, double rate,
                      std::uint64_t seed);

namespace serial {

// Naive reference implementations, plain loops, no OpenMP. Kept for tests and
// the benchmark target.
void matmul_nn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);
void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);
void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);
void softmax_rows(const double* x, const double* mask, double* y,
                  std::size_t rows, std::size_t cols);
void layer_norm_rows(const double* x, const double* gain, const double* bias,
                     double eps, double* y, double* xhat, double* inv_std,
                     std::size_t rows, std::size_t cols);
void gelu(const double* x, double* y, std::size_t n);

}  // namespace serial

}  // namespace riskner::kernels
