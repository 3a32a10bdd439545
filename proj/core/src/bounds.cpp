#include "nestquant/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "nestquant/e8.hpp"
#include "nestquant/parallel.hpp"
#include "nestquant/random.hpp"

namespace nestquant {

double gamma_lower_bound(double rate) {
  if (!(rate >= 0.0)) throw std::invalid_argument("gamma_lower_bound: rate must be >= 0");
  if (rate >= kGammaThresholdRate) return 2.0 * std::exp2(-2.0 * rate) - std::exp2(-4.0 * rate);
  const double at_threshold = 2.0 * std::exp2(-2.0 * kGammaThresholdRate) - std::exp2(-4.0 * kGammaThresholdRate);
  return 1.0 - (1.0 - at_threshold) * rate / kGammaThresholdRate;
}

double rate_distortion_gaussian(double rate) {
  if (!(rate >= 0.0)) throw std::invalid_argument("rate_distortion_gaussian: rate must be >= 0");
  return std::exp2(-2.0 * rate);
}

double gaussian_measure_ball(double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("gaussian_measure_ball: radius must be >= 0");
  if (std::isinf(radius)) return 1.0;
  const double t = 0.5 * radius * radius;
  const double tail = std::exp(-t) * (1.0 + t + t * t / 2.0 + t * t * t / 6.0);
  return 1.0 - tail;
}

double unit_volume_ball_radius() { return std::pow(24.0, 1.0 / 8.0) / std::sqrt(std::numbers::pi); }

namespace {

constexpr std::size_t kChunk = 1 << 16;

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
};

// Runs `sample(rng) -> double` `samples` times on fixed chunks with their own
// streams and combines chunk moments in order.
template <typename Sampler>
Estimate monte_carlo(std::size_t samples, std::uint64_t seed, Sampler&& sample) {
  if (samples == 0) throw std::invalid_argument("Monte Carlo: need at least one sample");
  const ChunkPlan plan{samples, kChunk};
  std::vector<Moments> parts(plan.count());
  parallel_for(static_cast<std::int64_t>(plan.count()), [&](std::int64_t c) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(c));
    Moments m;
    for (std::size_t i = plan.begin(c); i < plan.end(c); ++i) {
      const double v = sample(rng);
      m.sum += v;
      m.sum_sq += v * v;
    }
    parts[c] = m;
  });
  Moments total;
  for (const Moments& m : parts) {
    total.sum += m.sum;
    total.sum_sq += m.sum_sq;
  }
  const double n = static_cast<double>(samples);
  const double mean = total.sum / n;
  const double var = std::max(0.0, total.sum_sq / n - mean * mean);
  return Estimate{mean, std::sqrt(var / n)};
}

Vec8 gaussian8(Rng& rng) {
  std::normal_distribution<double> normal;
  Vec8 x{};
  for (double& v : x) v = normal(rng);
  return x;
}

bool inside(ShapingRegion region, const Vec8& x, double scale) {
  switch (region) {
    case ShapingRegion::Cube: {
      double peak = 0.0;
      for (double v : x) peak = std::max(peak, std::abs(v));
      return peak <= 0.5 * scale;
    }
    case ShapingRegion::Ball: {
      const double r = scale * unit_volume_ball_radius();
      return squared_norm(x) <= r * r;
    }
    case ShapingRegion::E8Voronoi: {
      Vec8 y{};
      for (int i = 0; i < 8; ++i) y[i] = x[i] / scale;
      return squared_norm(closest_point_e8(y).coords) == 0.0;
    }
  }
  return false;
}

}  // namespace

Estimate gaussian_measure_region(ShapingRegion region, double scale, std::size_t samples, std::uint64_t seed) {
  if (!(scale >= 0.0)) throw std::invalid_argument("gaussian_measure_region: scale must be >= 0");
  if (scale == 0.0) return Estimate{0.0, 0.0};
  return monte_carlo(samples, seed, [&](Rng& rng) { return inside(region, gaussian8(rng), scale) ? 1.0 : 0.0; });
}

ShapingComparison compare_shaping(double scale, std::size_t samples, std::uint64_t seed) {
  if (!(scale > 0.0)) throw std::invalid_argument("compare_shaping: scale must be > 0");
  if (samples == 0) throw std::invalid_argument("compare_shaping: need samples");
  const ChunkPlan plan{samples, kChunk};
  // Per chunk: out-counts for cube, voronoi, ball and moments of the paired
  // indicator differences.
  struct Part {
    double cube = 0, vor = 0, ball = 0;
    double cv = 0, cv2 = 0, vb = 0, vb2 = 0;
  };
  std::vector<Part> parts(plan.count());
  parallel_for(static_cast<std::int64_t>(plan.count()), [&](std::int64_t c) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(c));
    Part p;
    for (std::size_t i = plan.begin(c); i < plan.end(c); ++i) {
      const Vec8 x = gaussian8(rng);
      const double oc = inside(ShapingRegion::Cube, x, scale) ? 0.0 : 1.0;
      const double ov = inside(ShapingRegion::E8Voronoi, x, scale) ? 0.0 : 1.0;
      const double ob = inside(ShapingRegion::Ball, x, scale) ? 0.0 : 1.0;
      p.cube += oc;
      p.vor += ov;
      p.ball += ob;
      p.cv += oc - ov;
      p.cv2 += (oc - ov) * (oc - ov);
      p.vb += ov - ob;
      p.vb2 += (ov - ob) * (ov - ob);
    }
    parts[c] = p;
  });
  Part t;
  for (const Part& p : parts) {
    t.cube += p.cube;
    t.vor += p.vor;
    t.ball += p.ball;
    t.cv += p.cv;
    t.cv2 += p.cv2;
    t.vb += p.vb;
    t.vb2 += p.vb2;
  }
  const double n = static_cast<double>(samples);
  auto paired = [n](double s, double s2) {
    const double mean = s / n;
    return Estimate{mean, std::sqrt(std::max(0.0, s2 / n - mean * mean) / n)};
  };
  ShapingComparison out;
  out.scale = scale;
  out.cube = t.cube / n;
  out.voronoi = t.vor / n;
  out.ball = t.ball / n;
  out.ball_exact = 1.0 - gaussian_measure_ball(scale * unit_volume_ball_radius());
  out.cube_minus_voronoi = paired(t.cv, t.cv2);
  out.voronoi_minus_ball = paired(t.vb, t.vb2);
  return out;
}

Estimate nsm_estimate(LatticeKind lattice, std::size_t samples, std::uint64_t seed) {
  constexpr double kWindow = 64.0;
  if (lattice == LatticeKind::Z) {
    return monte_carlo(samples, seed, [](Rng& rng) {
      std::uniform_real_distribution<double> u(0.0, kWindow);
      const double x = u(rng);
      const double e = x - std::round(x);
      return e * e;
    });
  }
  return monte_carlo(samples, seed, [](Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, kWindow);
    Vec8 x{};
    for (double& v : x) v = u(rng);
    return squared_distance(x, closest_point_e8(x).coords) / 8.0;
  });
}

}  // namespace nestquant
