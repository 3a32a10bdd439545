#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nestquant/codec.hpp"
#include "nestquant/matrix.hpp"

namespace nestquant {

/// rows×cols iid N(0,1); row i draws from stream (seed, stream_base + i).
Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, std::uint64_t stream_base = 0);
/// `count` iid N(0, I₈) blocks, drawn in chunks of 4096 from streams
/// (seed, stream_base + chunk).
std::vector<Vec8> gaussian_blocks(std::size_t count, std::uint64_t seed, std::uint64_t stream_base = 0);

struct MatmulError {
  double rmse = 0.0;             // ‖ABᵀ − ÂB̂ᵀ‖_F / √(rows·rows_b)
  double mse_std_error = 0.0;    // standard error of the mean squared entry error
  std::vector<double> usage;     // beta usage over both operands (NestQuant only)
};

/// Error of quantized_matmul(quantize(A), quantize(B)) against A·Bᵀ, computed
/// in 64-row panels.
MatmulError measure_matmul_error(const Matrix& a, const Matrix& b, const QuantizerConfig& cfg);
/// Same for the row-wise uniform L∞ baseline at `bits` bits per entry.
MatmulError measure_uniform_error(const Matrix& a, const Matrix& b, int bits);

struct RateDistortionPoint {
  std::string config;
  double bits_fixed = 0.0;
  double bits_entropy = 0.0;
  double rmse = 0.0;
  double lower_bound_rmse = 0.0;  // √(n·Γ(bits_entropy))
  double mse_std_error = 0.0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  bool baseline = false;
  std::vector<double> betas;  // empty for baselines
};

struct BenchOptions {
  std::size_t n = 512;
  std::vector<int> qs = {3, 4, 5, 6, 7, 8, 10, 12, 14, 16, 20, 24, 32};
  std::vector<std::size_t> ks = {1, 2, 3, 4, 6, 8};
  std::vector<int> uniform_bits = {2, 3, 4, 5, 6};
  std::uint64_t seed = 0;
  std::size_t dp_samples = std::size_t{1} << 15;
};

/// Samples A, B (n×n, iid N(0,1)); for every (q, k) picks betas with the DP
/// over the ½·{1..50}/q universe on row-normalized blocks of A, quantizes both
/// operands with Opt-β and measures the product error and entropy rate. Adds
/// the uniform baselines.
std::vector<RateDistortionPoint> synthetic_matmul_benchmark(const BenchOptions& opts);

/// Points not dominated by a point of the same family (baseline or not) with
/// lower-or-equal entropy rate and lower error; sorted by rate.
std::vector<RateDistortionPoint> efficient_frontier(std::span<const RateDistortionPoint> points, bool baseline);

/// CSV header: config,bits_fixed,bits_entropy,rmse,lower_bound_rmse,seed,n
void write_bench_csv(std::ostream& os, std::span<const RateDistortionPoint> points);

}  // namespace nestquant
