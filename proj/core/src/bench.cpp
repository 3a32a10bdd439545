#include "nestquant/bench.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nestquant/beta_opt.hpp"
#include "nestquant/bounds.hpp"
#include "nestquant/error.hpp"
#include "nestquant/parallel.hpp"
#include "nestquant/random.hpp"

namespace nestquant {

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, std::uint64_t stream_base) {
  Matrix m(rows, cols);
  parallel_for(static_cast<std::int64_t>(rows), [&](std::int64_t i) {
    Rng rng = make_stream(seed, stream_base + static_cast<std::uint64_t>(i));
    std::normal_distribution<double> normal;
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = normal(rng);
  });
  return m;
}

std::vector<Vec8> gaussian_blocks(std::size_t count, std::uint64_t seed, std::uint64_t stream_base) {
  std::vector<Vec8> out(count);
  const ChunkPlan plan{count, 4096};
  parallel_for(static_cast<std::int64_t>(plan.count()), [&](std::int64_t c) {
    Rng rng = make_stream(seed, stream_base + static_cast<std::uint64_t>(c));
    std::normal_distribution<double> normal;
    for (std::size_t p = plan.begin(c); p < plan.end(c); ++p) {
      for (double& v : out[p]) v = normal(rng);
    }
  });
  return out;
}

namespace {

constexpr std::size_t kPanel = 64;

// Squared-error moments of approx_a·approx_bᵀ against a·bᵀ; the approximations
// are given as (normalized reconstruction, per-row factor) pairs.
MatmulError product_error(const Matrix& a, const Matrix& b, const Matrix& ra, const Vector& fa, const Matrix& rb,
                          const Vector& fb) {
  const ChunkPlan plan{static_cast<std::size_t>(a.rows()), kPanel};
  std::vector<std::pair<double, double>> parts(plan.count());
  parallel_for(static_cast<std::int64_t>(plan.count()), [&](std::int64_t c) {
    const auto begin = static_cast<Eigen::Index>(plan.begin(c));
    const auto len = static_cast<Eigen::Index>(plan.end(c) - plan.begin(c));
    const Matrix exact = a.middleRows(begin, len) * b.transpose();
    Matrix approx = ra.middleRows(begin, len) * rb.transpose();
    double s = 0.0, s2 = 0.0;
    for (Eigen::Index i = 0; i < len; ++i) {
      for (Eigen::Index j = 0; j < b.rows(); ++j) {
        const double e = exact(i, j) - approx(i, j) * fa(begin + i) * fb(j);
        s += e * e;
        s2 += e * e * e * e;
      }
    }
    parts[c] = {s, s2};
  });
  double s = 0.0, s2 = 0.0;
  for (const auto& [p, p2] : parts) {
    s += p;
    s2 += p2;
  }
  const double count = static_cast<double>(a.rows()) * static_cast<double>(b.rows());
  const double mean = s / count;
  MatmulError out;
  out.rmse = std::sqrt(mean);
  out.mse_std_error = std::sqrt(std::max(0.0, s2 / count - mean * mean) / count);
  return out;
}

void split_normalized(const QuantizedMatrix& qm, Matrix& recon, Vector& factor) {
  recon.resize(qm.rows, qm.cols);
  factor.resize(static_cast<Eigen::Index>(qm.rows));
  const double root_n = std::sqrt(static_cast<double>(qm.cols));
  parallel_for(static_cast<std::int64_t>(qm.rows), [&](std::int64_t i) {
    const std::vector<double> r = decode_normalized(qm.data[i], qm.config);
    std::copy(r.begin(), r.end(), recon.row(i).data());
    factor(i) = qm.data[i].scale / root_n;
  });
}

std::vector<double> combined_usage(const QuantizedMatrix& a, const QuantizedMatrix& b) {
  const std::vector<double> ua = beta_usage(a);
  const std::vector<double> ub = beta_usage(b);
  const double wa = static_cast<double>(a.rows * a.cols);
  const double wb = static_cast<double>(b.rows * b.cols);
  std::vector<double> u(ua.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = (ua[i] * wa + ub[i] * wb) / (wa + wb);
  return u;
}

std::vector<Vec8> normalized_blocks(const Matrix& m, std::size_t count) {
  std::vector<Vec8> out;
  out.reserve(count);
  const double root_n = std::sqrt(static_cast<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows() && out.size() < count; ++i) {
    const double norm = m.row(i).norm();
    const double f = norm > 0.0 ? root_n / norm : 0.0;
    for (Eigen::Index j = 0; j + 8 <= m.cols() && out.size() < count; j += 8) {
      Vec8 v{};
      for (int t = 0; t < 8; ++t) v[t] = m(i, j + t) * f;
      out.push_back(v);
    }
  }
  return out;
}

std::string format_config(int q, std::span<const double> betas) {
  std::ostringstream os;
  os << "nestquant:q=" << q << ":k=" << betas.size() << ":betas_q=";
  os << std::setprecision(6);
  for (std::size_t i = 0; i < betas.size(); ++i) os << (i ? "/" : "") << betas[i] * q;
  return os.str();
}

}  // namespace

MatmulError measure_matmul_error(const Matrix& a, const Matrix& b, const QuantizerConfig& cfg) {
  if (a.cols() != b.cols()) throw ShapeError("measure_matmul_error: inner dimensions differ");
  const QuantizedMatrix qa = quantize_matrix(a, cfg);
  const QuantizedMatrix qb = quantize_matrix(b, cfg);
  Matrix ra, rb;
  Vector fa, fb;
  split_normalized(qa, ra, fa);
  split_normalized(qb, rb, fb);
  MatmulError err = product_error(a, b, ra, fa, rb, fb);
  err.usage = combined_usage(qa, qb);
  return err;
}

MatmulError measure_uniform_error(const Matrix& a, const Matrix& b, int bits) {
  if (a.cols() != b.cols()) throw ShapeError("measure_uniform_error: inner dimensions differ");
  auto quantize_rows = [bits](const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    parallel_for(m.rows(), [&](std::int64_t i) {
      const std::vector<double> r =
          uniform_quantize_row(std::span<const double>(m.row(i).data(), static_cast<std::size_t>(m.cols())), bits);
      std::copy(r.begin(), r.end(), out.row(i).data());
    });
    return out;
  };
  const Matrix ua = quantize_rows(a);
  const Matrix ub = quantize_rows(b);
  return product_error(a, b, ua, Vector::Ones(a.rows()), ub, Vector::Ones(b.rows()));
}

std::vector<RateDistortionPoint> synthetic_matmul_benchmark(const BenchOptions& opts) {
  if (opts.n == 0 || opts.n % kBlockDim != 0) throw std::invalid_argument("benchmark: n must be a positive multiple of 8");
  const Matrix a = gaussian_matrix(opts.n, opts.n, opts.seed, 0);
  const Matrix b = gaussian_matrix(opts.n, opts.n, opts.seed, std::uint64_t{1} << 32);
  const std::vector<Vec8> calibration = normalized_blocks(a, opts.dp_samples);
  const double n = static_cast<double>(opts.n);

  std::vector<RateDistortionPoint> points;
  for (int q : opts.qs) {
    const std::vector<double> universe = presets::synthetic_universe(q);
    const ErrorProfile profile = profile_errors(calibration, universe, q);
    for (std::size_t k : opts.ks) {
      const BetaSelection sel = dp_optimal_betas(profile, k);
      QuantizerConfig cfg;
      cfg.q = q;
      cfg.strategy = Strategy::OptBeta;
      for (std::size_t idx : sel.indices) cfg.betas.push_back(universe[idx]);

      const MatmulError err = measure_matmul_error(a, b, cfg);
      const EffectiveRate rate = effective_rate(cfg, err.usage);
      RateDistortionPoint p;
      p.config = format_config(q, cfg.betas);
      p.bits_fixed = rate.fixed_bits;
      p.bits_entropy = rate.entropy_bits;
      p.rmse = err.rmse;
      p.mse_std_error = err.mse_std_error;
      p.lower_bound_rmse = std::sqrt(n * gamma_lower_bound(rate.entropy_bits));
      p.seed = opts.seed;
      p.n = opts.n;
      p.betas = cfg.betas;
      points.push_back(std::move(p));
    }
  }
  for (int bits : opts.uniform_bits) {
    const MatmulError err = measure_uniform_error(a, b, bits);
    RateDistortionPoint p;
    p.config = "uniform:bits=" + std::to_string(bits);
    p.bits_fixed = p.bits_entropy = bits;
    p.rmse = err.rmse;
    p.mse_std_error = err.mse_std_error;
    p.lower_bound_rmse = std::sqrt(n * gamma_lower_bound(bits));
    p.seed = opts.seed;
    p.n = opts.n;
    p.baseline = true;
    points.push_back(std::move(p));
  }
  return points;
}

std::vector<RateDistortionPoint> efficient_frontier(std::span<const RateDistortionPoint> points, bool baseline) {
  std::vector<RateDistortionPoint> family;
  for (const auto& p : points) {
    if (p.baseline == baseline) family.push_back(p);
  }
  std::stable_sort(family.begin(), family.end(), [](const auto& x, const auto& y) {
    return x.bits_entropy < y.bits_entropy || (x.bits_entropy == y.bits_entropy && x.rmse < y.rmse);
  });
  std::vector<RateDistortionPoint> out;
  for (const auto& p : family) {
    if (out.empty() || p.rmse < out.back().rmse) out.push_back(p);
  }
  return out;
}

void write_bench_csv(std::ostream& os, std::span<const RateDistortionPoint> points) {
  os << "config,bits_fixed,bits_entropy,rmse,lower_bound_rmse,seed,n\n";
  os << std::setprecision(10);
  for (const auto& p : points) {
    os << p.config << ',' << p.bits_fixed << ',' << p.bits_entropy << ',' << p.rmse << ',' << p.lower_bound_rmse
       << ',' << p.seed << ',' << p.n << '\n';
  }
}

}  // namespace nestquant
