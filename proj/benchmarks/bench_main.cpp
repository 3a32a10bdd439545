#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "nestquant/bench.hpp"
#include "nestquant/codec.hpp"
#include "nestquant/e8.hpp"
#include "nestquant/hadamard.hpp"
#include "nestquant/voronoi.hpp"

namespace nq = nestquant;

namespace {

std::vector<nq::Vec8> inputs(std::size_t n, double sigma) {
  auto v = nq::gaussian_blocks(n, 1);
  for (auto& b : v) {
    for (double& x : b) x *= sigma;
  }
  return v;
}

nq::QuantizerConfig q14k4() {
  nq::QuantizerConfig cfg;
  cfg.q = 14;
  cfg.betas = {3.0 / 14, 4.0 / 14, 5.0 / 14, 7.0 / 14};
  return cfg;
}

}  // namespace

static void BM_ClosestPointE8(benchmark::State& state) {
  const auto xs = inputs(4096, 4.0);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nq::closest_point_e8(xs[i++ & 4095]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ClosestPointE8);

static void BM_ClosestPointE8BruteForce(benchmark::State& state) {
  const auto xs = inputs(1024, 4.0);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nq::closest_point_e8_bruteforce(xs[i++ & 1023]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ClosestPointE8BruteForce);

static void BM_VoronoiEncodeDecode(benchmark::State& state) {
  const auto xs = inputs(4096, 4.0);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nq::quantize_voronoi(xs[i++ & 4095], 16));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_VoronoiEncodeDecode);

static void BM_FastHadamard(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto spec = nq::HadamardSpec::for_dimension(n);
  std::vector<double> x(n, 1.0);
  for (auto _ : state) {
    nq::fast_hadamard_transform(std::span<double>(x), spec);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_FastHadamard)->Arg(1024)->Arg(3072)->Arg(4096);

static void BM_QuantizeMatrix(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const nq::Matrix a = nq::gaussian_matrix(n, n, 2);
  const auto cfg = q14k4();
  for (auto _ : state) {
    benchmark::DoNotOptimize(nq::quantize_matrix(a, cfg));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_QuantizeMatrix)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_QuantizedMatmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cfg = q14k4();
  const auto qa = nq::quantize_matrix(nq::gaussian_matrix(n, n, 3), cfg);
  const auto qb = nq::quantize_matrix(nq::gaussian_matrix(n, n, 4), cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nq::quantized_matmul(qa, qb));
  }
}
BENCHMARK(BM_QuantizedMatmul)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
