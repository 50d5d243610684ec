// Compares the OpenMP kernels against the serial reference implementations:
// wall time, effective GFLOP/s, speedup, and a bitwise equality check (the
// parallel kernels are required to reproduce the serial results exactly).

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "riskner/kernels.hpp"
#include "riskner/rng.hpp"

namespace {

using riskner::SplitMix64;
namespace kern = riskner::kernels;

std::vector<double> random_vec(std::size_t n, SplitMix64& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform() * 2.0 - 1.0;
    return v;
}

template <typename F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void print_row(const std::string& name, double flops, double t_serial, double t_omp,
               bool identical) {
    std::printf("%-24s %10.3f ms %10.3f ms %7.2fx %8.2f GF/s  %s\n", name.c_str(),
                t_serial * 1e3, t_omp * 1e3, t_serial / t_omp, flops / t_omp / 1e9,
                identical ? "bitwise-equal" : "MISMATCH");
}

void bench_matmul(std::size_t m, std::size_t k, std::size_t n, SplitMix64& rng) {
    const std::vector<double> a = random_vec(m * k, rng);
    const std::vector<double> b = random_vec(k * n, rng);
    std::vector<double> c_serial(m * n), c_omp(m * n);

    const double t_serial = time_best_of(3, [&] {
        kern::serial::matmul_nn(a.data(), b.data(), c_serial.data(), m, k, n);
    });
    const double t_omp = time_best_of(3, [&] {
        kern::matmul_nn(a.data(), b.data(), c_omp.data(), m, k, n);
    });
    char name[64];
    std::snprintf(name, sizeof(name), "matmul %zux%zux%zu", m, k, n);
    print_row(name, 2.0 * m * k * n, t_serial, t_omp, bitwise_equal(c_serial, c_omp));
}

void bench_softmax(std::size_t rows, std::size_t cols, SplitMix64& rng) {
    const std::vector<double> x = random_vec(rows * cols, rng);
    std::vector<double> y_serial(rows * cols), y_omp(rows * cols);
    const double t_serial = time_best_of(3, [&] {
        kern::serial::softmax_rows(x.data(), nullptr, y_serial.data(), rows, cols);
    });
    const double t_omp = time_best_of(3, [&] {
        kern::softmax_rows(x.data(), nullptr, y_omp.data(), rows, cols);
    });
    char name[64];
    std::snprintf(name, sizeof(name), "softmax %zux%zu", rows, cols);
    print_row(name, 5.0 * rows * cols, t_serial, t_omp, bitwise_equal(y_serial, y_omp));
}

void bench_layer_norm(std::size_t rows, std::size_t cols, SplitMix64& rng) {
    const std::vector<double> x = random_vec(rows * cols, rng);
    const std::vector<double> gain = random_vec(cols, rng);
    const std::vector<double> bias = random_vec(cols, rng);
    std::vector<double> y_serial(rows * cols), y_omp(rows * cols);
    std::vector<double> xhat(rows * cols), inv_std(rows);
    const double t_serial = time_best_of(3, [&] {
        kern::serial::layer_norm_rows(x.data(), gain.data(), bias.data(), 1e-12, y_serial.data(),
                                      xhat.data(), inv_std.data(), rows, cols);
    });
    const double t_omp = time_best_of(3, [&] {
        kern::layer_norm_rows(x.data(), gain.data(), bias.data(), 1e-12, y_omp.data(),
                              xhat.data(), inv_std.data(), rows, cols);
    });
    char name[64];
    std::snprintf(name, sizeof(name), "layer_norm %zux%zu", rows, cols);
    print_row(name, 8.0 * rows * cols, t_serial, t_omp, bitwise_equal(y_serial, y_omp));
}

void bench_gelu(std::size_t n, SplitMix64& rng) {
    const std::vector<double> x = random_vec(n, rng);
    std::vector<double> y_serial(n), y_omp(n);
    const double t_serial =
        time_best_of(3, [&] { kern::serial::gelu(x.data(), y_serial.data(), n); });
    const double t_omp = time_best_of(3, [&] { kern::gelu(x.data(), y_omp.data(), n); });
    char name[64];
    std::snprintf(name, sizeof(name), "gelu %zu", n);
    print_row(name, 4.0 * n, t_serial, t_omp, bitwise_equal(y_serial, y_omp));
}

}  // namespace

int main() {
    std::printf("OpenMP max threads: %d\n\n", omp_get_max_threads());
    std::printf("%-24s %13s %13s %8s %13s\n", "kernel", "serial", "openmp", "speedup",
                "openmp rate");

    SplitMix64 rng(7);
    bench_matmul(128, 64, 64, rng);
    bench_matmul(512, 512, 512, rng);
    bench_matmul(1024, 256, 1024, rng);
    bench_softmax(4096, 512, rng);
    bench_layer_norm(4096, 512, rng);
    bench_gelu(1 << 22, rng);
    return 0;
}
