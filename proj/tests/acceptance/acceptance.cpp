// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails. Pass --full to run the matmul sweep at
// n = 4096 instead of 512.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nestquant/bench.hpp"
#include "nestquant/beta_opt.hpp"
#include "nestquant/bounds.hpp"
#include "nestquant/codec.hpp"
#include "nestquant/e8.hpp"
#include "nestquant/hadamard.hpp"
#include "nestquant/io.hpp"
#include "nestquant/ldlq.hpp"
#include "nestquant/parallel.hpp"
#include "nestquant_tools/cli.hpp"

namespace nq = nestquant;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

// ---------------------------------------------------------------- criterion 1
Outcome e8_exactness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    nq::Vec8 x;
    const double sigma = 1.0 + t % 8;
    for (double& v : x) v = sigma * g(rng);
    const double fast = nq::squared_distance(x, nq::closest_point_e8(x).coords);
    const double slow = nq::squared_distance(x, nq::closest_point_e8_bruteforce(x).coords);
    worst = std::max(worst, std::abs(fast - slow) / std::max(slow, 1e-300));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 10.0,
          "10000 inputs, max relative distance mismatch " + fmt(worst) + ", " + fmt(secs, 3) + " s (< 10 s)"};
}

// ---------------------------------------------------------------- criterion 2
Outcome nsm_reproduction() {
  const auto t0 = Clock::now();
  const nq::Estimate e8 = nq::nsm_estimate(nq::LatticeKind::E8, 10'000'000, 2001);
  const nq::Estimate z = nq::nsm_estimate(nq::LatticeKind::Z, 10'000'000, 2002);
  const double secs = seconds_since(t0);
  const bool ok = std::abs(e8.value - 0.0716821) <= 5e-4 && std::abs(z.value - 1.0 / 12.0) <= 3e-4 && secs < 120.0;
  return {ok, "NSM(E8) = " + fmt(e8.value, 7) + " ± " + fmt(e8.std_error, 2) + " (target 0.0716821 ± 0.0005), NSM(Z) = " +
                  fmt(z.value, 7) + " (target 1/12 ± 0.0003), 1e7 samples each, " + fmt(secs, 3) + " s (< 120 s)"};
}

// ---------------------------------------------------------------- criterion 3
Outcome multiscale_table() {
  const auto t0 = Clock::now();
  struct Row {
    std::size_t k;
    double opt, first;
  };
  const Row rows[] = {{2, 0.0878, 0.0878}, {4, 0.0795, 0.0798}, {6, 0.0708, 0.0712}, {8, 0.0669, 0.0676},
                      {10, 0.0646, 0.0656}};
  const int q = 16;
  const std::size_t n = 1'000'000;
  const std::vector<nq::Vec8> blocks = nq::gaussian_blocks(n, 3001);
  bool ok = true;
  std::string detail;
  for (const Row& r : rows) {
    // k equally spaced scales 10·i/k (q-scaled) from the uniform grid on (0, 10].
    const std::vector<double> betas = nq::presets::equally_spaced(q, r.k);
    const nq::ErrorProfile prof = nq::profile_errors(blocks, betas, q);
    std::vector<std::size_t> all(r.k);
    for (std::size_t i = 0; i < r.k; ++i) all[i] = i;
    const double opt = std::sqrt(nq::opt_beta_cost(prof, all) / (8.0 * n));
    const double first = std::sqrt(nq::first_beta_cost(prof, all) / (8.0 * n));
    const bool row_ok = std::abs(opt - r.opt) <= 0.002 && std::abs(first - r.first) <= 0.002;
    ok = ok && row_ok;
    detail += "k=" + std::to_string(r.k) + " (" + fmt(opt, 4) + ", " + fmt(first, 4) + ") ";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 300.0;
  return {ok, detail + "vs reference values within ±0.002, 1e6 blocks, " + fmt(secs, 3) + " s (< 300 s)"};
}

// ---------------------------------------------------------------- criterion 4
Outcome dp_optimality() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4001);
  std::uniform_int_distribution<int> qd(3, 24);
  std::uniform_int_distribution<std::size_t> md(2, 12), kd(1, 3);
  std::uniform_real_distribution<double> ud(0.5, 12.0);
  int agree = 0;
  int instances = 0;
  while (instances < 100) {
    const int q = qd(rng);
    const std::size_t m = md(rng);
    const std::size_t k = kd(rng);
    std::vector<double> universe;
    for (std::size_t j = 0; j < m; ++j) universe.push_back(ud(rng));
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
    universe.back() = 40.0;  // guarantees a safe scale
    for (double& b : universe) b /= q;
    const auto blocks = nq::gaussian_blocks(300, 4100 + instances);
    const nq::ErrorProfile prof = nq::profile_errors(blocks, universe, q);
    const nq::BetaSelection dp = nq::dp_optimal_betas(prof, k);
    const nq::BetaSelection bf = nq::brute_force_betas(prof, k);
    const double tol = 1e-9 * (1.0 + bf.total);
    if (std::abs(dp.total - bf.total) <= tol && std::abs(nq::chain_cost(prof, dp.indices) - dp.total) <= tol &&
        dp.indices.size() <= k) {
      ++agree;
    }
    ++instances;
  }
  const double secs = seconds_since(t0);
  return {agree == 100 && secs < 60.0, std::to_string(agree) + "/100 instances (m ≤ 12, k ≤ 3) match exhaustive search, " +
                                           fmt(secs, 3) + " s (< 60 s)"};
}

// ---------------------------------------------------------------- criterion 5
Outcome rate_accounting() {
  auto fixed = [](int q, std::size_t k) {
    nq::QuantizerConfig cfg;
    cfg.q = q;
    for (std::size_t i = 1; i <= k; ++i) cfg.betas.push_back(static_cast<double>(i));
    return nq::effective_rate(cfg, std::vector<double>(k, 1.0 / static_cast<double>(k))).fixed_bits;
  };
  const double r14 = fixed(14, 4);
  const double r12 = fixed(12, 4);
  const bool exact = std::abs(r14 - (std::log2(14.0) + 0.25)) <= 1e-12 && std::abs(r12 - (std::log2(12.0) + 0.25)) <= 1e-12;
  char b14[32], b12[32], b14f[32];
  std::snprintf(b14, sizeof b14, "%.4f", r14);
  std::snprintf(b14f, sizeof b14f, "%.2f", r14);
  std::snprintf(b12, sizeof b12, "%.3f", r12);
  const bool printed = std::string(b14) == "4.0574" && std::string(b14f) == "4.06" && std::string(b12) == "3.835";
  return {exact && printed, "(q=14,k=4) = " + fmt(r14, 10) + " prints " + b14f + "; (q=12,k=4) = " + fmt(r12, 10) +
                                " prints " + b12};
}

// ---------------------------------------------------------------- criterion 6
Outcome matmul_frontier(bool full) {
  const auto t0 = Clock::now();
  nq::BenchOptions opts;
  opts.n = full ? 4096 : 512;
  opts.seed = 6001;
  const std::vector<nq::RateDistortionPoint> pts = nq::synthetic_matmul_benchmark(opts);
  // Best RMSE achievable at rate ≤ R within a family.
  auto best_at = [&](double rate, bool baseline) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
      if (p.baseline == baseline && p.bits_entropy <= rate + 1e-12) best = std::min(best, p.rmse);
    }
    return best;
  };
  bool below = true;
  double worst_ratio = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const double r = 2.5 + 0.05 * i;
    const double ours = best_at(r, false);
    const double base = best_at(r, true);
    worst_ratio = std::max(worst_ratio, ours / base);
    below = below && ours < base;
  }
  bool bound_ok = true;
  for (const auto& p : pts) {
    const double mse = p.rmse * p.rmse;
    const double bound = static_cast<double>(opts.n) * nq::gamma_lower_bound(p.bits_entropy);
    bound_ok = bound_ok && mse >= bound - 3.0 * p.mse_std_error;
  }
  const double secs = seconds_since(t0);
  return {below && bound_ok && secs < 600.0,
          "n=" + std::to_string(opts.n) + ", " + std::to_string(pts.size()) +
              " configs; max RMSE ratio NestQuant/uniform over rates [2.5, 4.5] = " + fmt(worst_ratio, 4) +
              " (< 1); lower bound respected: " + (bound_ok ? "yes" : "no") + ", " + fmt(secs, 3) + " s (< 600 s)"};
}

// ---------------------------------------------------------------- criterion 7
Outcome shaping_ordering() {
  const auto t0 = Clock::now();
  int checked = 0;
  int ok_count = 0;
  double min_z = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 40; ++i) {
    const double scale = 2.0 + 0.125 * i;
    const double ball_c = 1.0 - nq::gaussian_measure_ball(scale * nq::unit_volume_ball_radius());
    if (ball_c < 1e-3 || ball_c > 0.5) continue;
    const nq::ShapingComparison c = nq::compare_shaping(scale, 1'000'000, 7000 + i);
    const double z1 = c.cube_minus_voronoi.value / c.cube_minus_voronoi.std_error;
    const double z2 = c.voronoi_minus_ball.value / c.voronoi_minus_ball.std_error;
    min_z = std::min({min_z, z1, z2});
    ++checked;
    ok_count += (z1 >= 3.0 && z2 >= 3.0);
  }
  const double secs = seconds_since(t0);
  return {checked > 0 && ok_count == checked,
          std::to_string(ok_count) + "/" + std::to_string(checked) +
              " scales with cube > E8-Voronoi > ball complement measure, smallest separation " + fmt(min_z, 3) +
              " σ (≥ 3), 1e6 samples per scale, " + fmt(secs, 3) + " s"};
}

// ---------------------------------------------------------------- criterion 8
Outcome noisy_loss_identity() {
  const auto t0 = Clock::now();
  const Eigen::Index n = 16, a = 4;
  const std::size_t samples = 1'000'000;
  double worst = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    std::mt19937_64 rng(8000 + inst);
    std::normal_distribution<double> g;
    auto gauss = [&](Eigen::Index r, Eigen::Index c) {
      nq::Matrix m(r, c);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
      return m;
    };
    // X = C·g has covariance H = CCᵀ; Z = E·g' has covariance J = EEᵀ.
    const nq::Matrix c = gauss(n, n) / std::sqrt(static_cast<double>(n));
    const nq::Matrix e = 0.3 * gauss(n, n) / std::sqrt(static_cast<double>(n));
    const nq::Matrix h = c * c.transpose();
    const nq::Matrix j = e * e.transpose();
    const nq::Matrix w = gauss(a, n);
    nq::QuantizerConfig cfg;
    cfg.q = 8;
    cfg.betas = {3.5 / 8, 4.5 / 8, 5.5 / 8, 1.0};
    nq::NestQuantRowQuantizer quantizer(cfg);
    const nq::Matrix u = nq::qa_ldlq_quantize(w, h, j, quantizer).dequantized;

    const nq::Matrix wu = w - u;
    double acc = 0.0;
    nq::Vector gx(n), gz(n);
    for (std::size_t s = 0; s < samples; ++s) {
      for (Eigen::Index i = 0; i < n; ++i) gx(i) = g(rng);
      for (Eigen::Index i = 0; i < n; ++i) gz(i) = g(rng);
      const nq::Vector x = c * gx;
      const nq::Vector z = e * gz;
      acc += (wu * x - u * z).squaredNorm();
    }
    const double mc = acc / static_cast<double>(samples);
    const double closed = nq::qa_surrogate(w, u, h, j) + nq::qa_bias(w, h, j);
    worst = std::max(worst, std::abs(mc - closed) / closed);
  }
  const double secs = seconds_since(t0);
  return {worst <= 0.02, "10 instances (n=16, a=4, 1e6 samples), max relative gap between Monte Carlo loss and "
                         "surrogate + bias = " +
                             fmt(100.0 * worst, 3) + "% (≤ 2%), " + fmt(secs, 3) + " s"};
}

// ---------------------------------------------------------------- criterion 9
Outcome qa_ldlq_reduction() {
  const auto t0 = Clock::now();
  nq::QuantizerConfig cfg;
  cfg.q = 8;
  cfg.betas = {3.5 / 8, 4.5 / 8, 5.5 / 8, 1.0};
  bool bitwise = true;
  int wins = 0, losses = 0;
  for (int inst = 0; inst < 20; ++inst) {
    std::mt19937_64 rng(9000 + inst);
    std::normal_distribution<double> g;
    const Eigen::Index n = 32, a = 16;
    // Activations with eigenvalues spread over six decades.
    nq::Matrix basis(n, n);
    for (Eigen::Index i = 0; i < basis.size(); ++i) basis.data()[i] = g(rng);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
    const Eigen::MatrixXd orth = qr.householderQ();
    nq::Vector sd(n);
    for (Eigen::Index i = 0; i < n; ++i) sd(i) = std::pow(10.0, -3.0 * static_cast<double>(i) / (n - 1));
    nq::Matrix x(512, n);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      nq::Vector v(n);
      for (Eigen::Index i = 0; i < n; ++i) v(i) = sd(i) * g(rng);
      x.row(r) = (orth * v).transpose();
    }
    const nq::Matrix batches[] = {x};
    const nq::Matrix h = nq::accumulate_hessian(batches).h;
    nq::Matrix w(a, n);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = g(rng);

    nq::NestQuantRowQuantizer q_plain(cfg), q_zero(cfg), q_qa(cfg);
    const nq::LdlqResult plain = nq::ldlq_quantize(w, h, q_plain);
    const nq::LdlqResult zero = nq::qa_ldlq_quantize(w, h, nq::NoiseModel{0.0}, q_zero);
    bitwise = bitwise && plain.dequantized == zero.dequantized && q_plain.result() == q_zero.result();

    const double eps2 = 1e-3 * h.trace() / static_cast<double>(n);
    const nq::Matrix j = eps2 * nq::Matrix::Identity(n, n);
    const nq::LdlqResult qa = nq::qa_ldlq_quantize(w, h, nq::NoiseModel{eps2}, q_qa);
    const double l_plain = nq::noisy_loss(w, plain.dequantized, h, j);
    const double l_qa = nq::noisy_loss(w, qa.dequantized, h, j);
    if (l_qa < l_plain) ++wins;
    if (l_qa > l_plain) ++losses;
  }
  // One-sided sign test: P(Bin(wins + losses, ½) ≥ wins).
  const int trials = wins + losses;
  double p = 0.0;
  for (int i = wins; i <= trials; ++i) {
    p += std::exp(std::lgamma(trials + 1.0) - std::lgamma(i + 1.0) - std::lgamma(trials - i + 1.0) - trials * std::log(2.0));
  }
  const double secs = seconds_since(t0);
  return {bitwise && p < 0.05, std::string("eps2 = 0 bitwise identical to LDLQ: ") + (bitwise ? "yes" : "no") +
                                   "; QA-LDLQ lower noisy loss on " + std::to_string(wins) + "/20 instances (" +
                                   std::to_string(losses) + " worse), sign-test p = " + fmt(p, 3) + " (< 0.05), " +
                                   fmt(secs, 3) + " s"};
}

// --------------------------------------------------------------- criterion 10
Outcome equivariance_property() {
  std::mt19937_64 rng(10001);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> coord(-6, 6);
  int exact = 0;
  for (int t = 0; t < 1000; ++t) {
    nq::Vec8 x;
    for (double& v : x) v = 3.0 * g(rng);
    nq::IntVec8 cv;
    for (auto& c : cv) c = coord(rng);
    const nq::Vec8 v = nq::point_from_coords(cv).coords;
    nq::Vec8 xv;
    for (int i = 0; i < 8; ++i) xv[i] = x[i] + v[i];
    const nq::Vec8 lhs = nq::nestquantm_oracle(xv).coords;
    nq::Vec8 rhs = nq::nestquantm_oracle(x).coords;
    for (int i = 0; i < 8; ++i) rhs[i] += v[i];
    exact += lhs == rhs;
  }
  return {exact == 1000, std::to_string(exact) + "/1000 pairs with f(x+v) = f(x)+v exactly"};
}

// --------------------------------------------------------------- criterion 11
Outcome hadamard_checks() {
  const auto t0 = Clock::now();
  double worst_orth = 0.0;  // max |HHᵀ − nI| / n
  double worst_fht = 0.0;
  int specs = 0;
  std::mt19937_64 rng(11001);
  std::normal_distribution<double> g;
  for (int m : nq::stored_hadamard_sizes()) {
    for (int k = 0; static_cast<std::size_t>(m) << k <= 4096; ++k) {
      const nq::HadamardSpec spec = nq::HadamardSpec::make(m, k);
      const nq::Matrix h = nq::hadamard_matrix(spec);
      const auto n = static_cast<Eigen::Index>(spec.n);
      Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
      gram.selfadjointView<Eigen::Lower>().rankUpdate(Eigen::MatrixXd(h));
      gram.diagonal().array() -= static_cast<double>(n);
      worst_orth = std::max(worst_orth, gram.triangularView<Eigen::Lower>().toDenseMatrix().cwiseAbs().maxCoeff() / n);

      std::vector<double> x(spec.n);
      for (double& v : x) v = g(rng);
      const Eigen::Map<const nq::Vector> xv(x.data(), n);
      const nq::Vector dense = h * xv / std::sqrt(static_cast<double>(n));
      const std::vector<double> fast = nq::fast_hadamard_transform(std::span<const double>(x), spec);
      for (Eigen::Index i = 0; i < n; ++i) worst_fht = std::max(worst_fht, std::abs(fast[i] - dense(i)));
      ++specs;
    }
  }
  const double secs = seconds_since(t0);
  return {worst_orth <= 1e-8 && worst_fht <= 1e-10,
          std::to_string(specs) + " specs up to n = 4096: max |HHᵀ − nI|/n = " + fmt(worst_orth, 3) +
              " (≤ 1e-8), max |FHT − dense| = " + fmt(worst_fht, 3) + " (≤ 1e-10), " + fmt(secs, 3) + " s"};
}

// --------------------------------------------------------------- criterion 12
std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

Outcome cli_determinism(const fs::path& dir) {
  const auto t0 = Clock::now();
  fs::create_directories(dir);
  auto at = [&](const std::string& name) { return (dir / name).string(); };
  // Inputs shared by every run.
  std::ostringstream sink;
  nq::cli::run({"generate", "--rows", "96", "--cols", "64", "--seed", "12", "--out", at("a.dmat")}, sink, sink);
  nq::cli::run({"generate", "--rows", "80", "--cols", "64", "--seed", "13", "--out", at("b.dmat")}, sink, sink);
  nq::cli::run({"generate", "--rows", "400", "--cols", "64", "--seed", "14", "--out", at("x.dmat")}, sink, sink);

  struct Command {
    std::string name;
    std::vector<std::string> args;  // "@" is replaced by the run's output prefix
    std::vector<std::string> files;
  };
  const std::vector<Command> commands = {
      {"generate", {"generate", "--rows", "32", "--cols", "16", "--seed", "5", "--out", "@g.dmat"}, {"g.dmat"}},
      {"quantize", {"quantize", "--in", at("a.dmat"), "--out", "@a.nlq", "--q", "14", "--k", "4"}, {"a.nlq"}},
      {"quantize-b", {"quantize", "--in", at("b.dmat"), "--out", "@b.nlq", "--q", "14", "--k", "4", "--betas", "3,4,5,7"}, {"b.nlq"}},
      {"dequantize", {"dequantize", "--in", "@a.nlq", "--out", "@ah.dmat"}, {"ah.dmat"}},
      {"compare", {"compare", "--a", at("a.dmat"), "--b", "@ah.dmat"}, {}},
      {"matmul", {"matmul", "--a", "@b.nlq", "--b", "@b.nlq", "--out", "@c.dmat"}, {"c.dmat"}},
      {"bench", {"bench", "--n", "128", "--qs", "4,8,16", "--ks", "1,2,4", "--seed", "7", "--out", "@bench.csv"}, {"bench.csv"}},
      {"bounds", {"bounds", "--rates", "0:0.25:5"}, {}},
      {"optimize-betas", {"optimize-betas", "--preset", "appendixF", "--k", "4", "--seed", "3", "--samples", "4096",
                          "--eval-samples", "20000", "--profile-out", "@profile.csv"}, {"profile.csv"}},
      {"nsm", {"nsm", "--lattice", "e8", "--samples", "1e6", "--seed", "4"}, {}},
      {"measure-shaping", {"measure-shaping", "--scales", "3:0.5:5", "--samples", "1e5", "--seed", "5"}, {}},
      {"ldlq", {"ldlq", "--w", at("b.dmat"), "--x", at("x.dmat"), "--q", "8", "--estimate-eps2", "--out", "@u.dmat"}, {"u.dmat"}},
  };

  // Three runs: threads 1, threads 1 again, threads 4.
  const std::vector<std::pair<std::string, std::string>> runs = {{"r1_", "1"}, {"r2_", "1"}, {"r4_", "4"}};
  std::vector<std::vector<std::string>> captured(runs.size());
  bool all_ok = true;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const Command& c : commands) {
      std::vector<std::string> args{"--threads", runs[r].second};
      for (const std::string& a : c.args) args.push_back(a[0] == '@' ? at(runs[r].first + a.substr(1)) : a);
      std::ostringstream out, err;
      const int code = nq::cli::run(args, out, err);
      all_ok = all_ok && code == 0;
      std::string blob = out.str();
      for (const std::string& f : c.files) blob += "\n--" + f + "--\n" + slurp(dir / (runs[r].first + f));
      captured[r].push_back(blob);
    }
  }
  int identical = 0;
  std::string mismatched;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const bool same = captured[0][i] == captured[1][i] && captured[0][i] == captured[2][i] && !captured[0][i].empty();
    identical += same;
    if (!same) mismatched += " " + commands[i].name;
  }
  fs::remove_all(dir);
  const double secs = seconds_since(t0);
  return {all_ok && identical == static_cast<int>(commands.size()),
          std::to_string(identical) + "/" + std::to_string(commands.size()) +
              " command invocations byte-identical across two runs and --threads 1/4" +
              (mismatched.empty() ? "" : " (differs:" + mismatched + ")") + (all_ok ? "" : "; a command failed") +
              ", " + fmt(secs, 3) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
  bool full = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--full") == 0) full = true;
  }
  const fs::path scratch = fs::temp_directory_path() / "nestquant_acceptance";

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"E8 oracle exactness", e8_exactness},
      {"NSM reproduction", nsm_reproduction},
      {"Multi-scale reconstruction table", multiscale_table},
      {"DP optimality", dp_optimality},
      {"Rate accounting", rate_accounting},
      {"Matmul frontier vs uniform baseline", [full] { return matmul_frontier(full); }},
      {"Shaping region ordering", shaping_ordering},
      {"Noise-aware loss identity", noisy_loss_identity},
      {"QA-LDLQ reduction", qa_ldlq_reduction},
      {"NestQuantM equivariance", equivariance_property},
      {"Hadamard", hadamard_checks},
      {"CLI determinism", [&] { return cli_determinism(scratch); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
