#include "nestquant_tools/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "nestquant/bench.hpp"
#include "nestquant/beta_opt.hpp"
#include "nestquant/bounds.hpp"
#include "nestquant/codec.hpp"
#include "nestquant/error.hpp"
#include "nestquant/io.hpp"
#include "nestquant/ldlq.hpp"
#include "nestquant/parallel.hpp"
#include "nestquant_tools/ranges.hpp"

namespace nestquant::cli {

namespace {

constexpr std::uint64_t kEvalStream = std::uint64_t{1} << 40;

// CSV sink: --out file when given, otherwise the caller's stream.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw IoError("cannot open '" + path + "' for writing");
      stream_ = file_.get();
    }
    *stream_ << std::setprecision(10);
  }
  std::ostream& operator*() { return *stream_; }
  void close() {
    stream_->flush();
    if (!*stream_) throw IoError("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

struct CodecFlags {
  int q = 16;
  std::size_t k = 4;
  std::string strategy = "opt";
  std::string preset = "default";
  std::vector<double> betas_q;  // explicit betas in q-scaled units
  std::size_t calibration_blocks = 32768;

  void add(CLI::App& cmd) {
    cmd.add_option("--q", q, "Nesting ratio")->check(CLI::Range(2, 256));
    cmd.add_option("--k", k, "Number of scales")->check(CLI::Range(1, 255));
    cmd.add_option("--strategy", strategy, "Scale selection")->check(CLI::IsMember({"opt", "first"}));
    cmd.add_option("--preset", preset, "Scale universe searched by the DP")
        ->check(CLI::IsMember({"default", "synthetic", "appendixF"}));
    cmd.add_option("--betas", betas_q, "Explicit scales times q (skips the DP)")->delimiter(',');
    cmd.add_option("--calibration-blocks", calibration_blocks, "8-blocks fed to the DP");
  }
};

std::vector<double> universe_for(const std::string& preset, int q) {
  if (preset == "synthetic") return presets::synthetic_universe(q);
  if (preset == "appendixF") return presets::uniform_universe(q, 0.25);
  return presets::default_universe(q);
}

Strategy parse_strategy(const std::string& s) { return s == "first" ? Strategy::FirstBeta : Strategy::OptBeta; }

// Row-normalized 8-blocks of m taken in row-major order.
std::vector<Vec8> calibration_blocks(const Matrix& m, std::size_t limit) {
  if (m.cols() % static_cast<Eigen::Index>(kBlockDim) != 0) {
    throw ShapeError("column count " + std::to_string(m.cols()) + " is not a multiple of 8");
  }
  std::vector<Vec8> out;
  const double root_n = std::sqrt(static_cast<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows() && out.size() < limit; ++i) {
    const double norm = m.row(i).norm();
    if (norm == 0.0) continue;
    for (Eigen::Index j = 0; j < m.cols() && out.size() < limit; j += 8) {
      Vec8 v{};
      for (int t = 0; t < 8; ++t) v[t] = m(i, j + t) * root_n / norm;
      out.push_back(v);
    }
  }
  return out;
}

QuantizerConfig resolve_config(const CodecFlags& f, const Matrix& calibration) {
  QuantizerConfig cfg;
  cfg.q = f.q;
  cfg.strategy = parse_strategy(f.strategy);
  if (!f.betas_q.empty()) {
    for (double b : f.betas_q) cfg.betas.push_back(b / f.q);
  } else {
    const std::vector<Vec8> blocks = calibration_blocks(calibration, f.calibration_blocks);
    const std::vector<double> universe = universe_for(f.preset, f.q);
    if (blocks.empty()) {
      // All-zero input: any scale works, take the k smallest.
      cfg.betas.assign(universe.begin(), universe.begin() + static_cast<std::ptrdiff_t>(std::min(f.k, universe.size())));
    } else {
      const BetaSelection sel = dp_optimal_betas(profile_errors(blocks, universe, f.q), f.k);
      for (std::size_t idx : sel.indices) cfg.betas.push_back(universe[idx]);
    }
  }
  cfg.validate();
  return cfg;
}

std::string join_scaled(std::span<const double> betas, int q) {
  std::ostringstream os;
  os << std::setprecision(6);
  for (std::size_t i = 0; i < betas.size(); ++i) os << (i ? "/" : "") << betas[i] * q;
  return os.str();
}

double frobenius_rmse(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("matrices differ in shape");
  if (a.size() == 0) return 0.0;
  return (a - b).norm() / std::sqrt(static_cast<double>(a.size()));
}

std::vector<double> parse_range_flag(const std::string& s) {
  try {
    return parse_range(s);
  } catch (const std::invalid_argument& e) {
    throw CLI::ValidationError(e.what());
  }
}

std::size_t parse_count_flag(const std::string& s) {
  try {
    return parse_count(s);
  } catch (const std::invalid_argument& e) {
    throw CLI::ValidationError(e.what());
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nested-lattice (E8 Voronoi code) quantization tools", "nlq"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker cap (0 = all cores)")->check(CLI::NonNegativeNumber);

  std::function<void()> action;
  std::string out_path;

  // generate
  auto* gen = app.add_subcommand("generate", "Write an iid N(0,1) matrix as DMAT");
  std::size_t gen_rows = 0, gen_cols = 0;
  std::uint64_t seed = 0;
  gen->add_option("--rows", gen_rows)->required();
  gen->add_option("--cols", gen_cols)->required();
  gen->add_option("--seed", seed)->required();
  gen->add_option("--out", out_path)->required();
  gen->callback([&] {
    action = [&] { write_dmat_file(out_path, gaussian_matrix(gen_rows, gen_cols, seed)); };
  });

  // quantize
  auto* quant = app.add_subcommand("quantize", "DMAT -> NLQ1; prints the effective rate");
  std::string in_path;
  CodecFlags codec;
  quant->add_option("--in", in_path)->required();
  quant->add_option("--out", out_path)->required();
  codec.add(*quant);
  quant->callback([&] {
    action = [&] {
      const Matrix m = read_dmat_file(in_path);
      const QuantizerConfig cfg = resolve_config(codec, m);
      const QuantizedMatrix qm = quantize_matrix(m, cfg);
      write_nlq_file(out_path, qm);
      const EffectiveRate rate = effective_rate(cfg, beta_usage(qm));
      out << "rows,cols,q,k,betas_q,bits_fixed,bits_entropy,rmse\n";
      out << m.rows() << ',' << m.cols() << ',' << cfg.q << ',' << cfg.k() << ',' << join_scaled(cfg.betas, cfg.q)
          << ',' << std::fixed << std::setprecision(2) << rate.fixed_bits << ',' << rate.entropy_bits << ','
          << std::defaultfloat << std::setprecision(10) << frobenius_rmse(m, dequantize_matrix(qm)) << '\n';
    };
  });

  // dequantize
  auto* deq = app.add_subcommand("dequantize", "NLQ1 -> DMAT");
  deq->add_option("--in", in_path)->required();
  deq->add_option("--out", out_path)->required();
  deq->callback([&] { action = [&] { write_dmat_file(out_path, dequantize_matrix(read_nlq_file(in_path))); }; });

  // compare
  auto* cmp = app.add_subcommand("compare", "Per-entry RMSE between two DMAT files");
  std::string a_path, b_path;
  cmp->add_option("--a", a_path)->required();
  cmp->add_option("--b", b_path)->required();
  cmp->callback([&] {
    action = [&] {
      const Matrix a = read_dmat_file(a_path);
      const Matrix b = read_dmat_file(b_path);
      const double rmse = frobenius_rmse(a, b);
      out << std::setprecision(10) << "rows,cols,rmse,max_abs\n"
          << a.rows() << ',' << a.cols() << ',' << rmse << ',' << (a.size() ? (a - b).cwiseAbs().maxCoeff() : 0.0)
          << '\n';
    };
  });

  // matmul
  auto* mm = app.add_subcommand("matmul", "A·Bᵀ from two NLQ1 files -> DMAT");
  mm->add_option("--a", a_path)->required();
  mm->add_option("--b", b_path)->required();
  mm->add_option("--out", out_path)->required();
  mm->callback([&] {
    action = [&] {
      const QuantizedMatrix a = read_nlq_file(a_path);
      const QuantizedMatrix b = read_nlq_file(b_path);
      if (!(a.config == b.config)) throw ShapeError("operands were quantized with different configurations");
      if (a.cols != b.cols) throw ShapeError("operands differ in column count");
      write_dmat_file(out_path, quantized_matmul(a, b));
    };
  });

  // bench
  auto* bench = app.add_subcommand("bench", "Synthetic Gaussian matmul rate/error sweep");
  BenchOptions bench_opts;
  bool full = false, frontier_only = false;
  bench->add_option("--n", bench_opts.n, "Matrix size (multiple of 8)");
  bench->add_flag("--full", full, "Use n = 4096");
  bench->add_option("--qs", bench_opts.qs)->delimiter(',');
  bench->add_option("--ks", bench_opts.ks)->delimiter(',');
  bench->add_option("--uniform-bits", bench_opts.uniform_bits)->delimiter(',');
  bench->add_option("--dp-samples", bench_opts.dp_samples);
  bench->add_flag("--frontier", frontier_only, "Only emit the efficient frontiers");
  bench->add_option("--seed", bench_opts.seed)->required();
  bench->add_option("--out", out_path);
  bench->callback([&] {
    action = [&] {
      if (full) bench_opts.n = 4096;
      std::vector<RateDistortionPoint> points = synthetic_matmul_benchmark(bench_opts);
      if (frontier_only) {
        std::vector<RateDistortionPoint> f = efficient_frontier(points, false);
        const std::vector<RateDistortionPoint> g = efficient_frontier(points, true);
        f.insert(f.end(), g.begin(), g.end());
        points = std::move(f);
      }
      Output o(out_path, out);
      write_bench_csv(*o, points);
      o.close();
    };
  });

  // bounds
  auto* bounds = app.add_subcommand("bounds", "Tabulate Γ(R) and D(R)");
  std::string rates_text = "0:0.25:5";
  bounds->add_option("--rates", rates_text, "start:step:stop");
  bounds->add_option("--out", out_path);
  bounds->callback([&] {
    action = [&] {
      const std::vector<double> rates = parse_range_flag(rates_text);
      Output o(out_path, out);
      *o << "rate,gamma,d\n";
      for (double r : rates) *o << r << ',' << gamma_lower_bound(r) << ',' << rate_distortion_gaussian(r) << '\n';
      o.close();
    };
  });

  // optimize-betas
  auto* opt = app.add_subcommand("optimize-betas", "DP scale selection on Gaussian 8-blocks");
  std::string samples_text = "32768", eval_text = "100000", profile_path;
  opt->add_option("--q", codec.q)->check(CLI::Range(2, 256));
  opt->add_option("--k", codec.k)->check(CLI::Range(1, 255));
  opt->add_option("--preset", codec.preset)->check(CLI::IsMember({"default", "synthetic", "appendixF"}));
  opt->add_option("--samples", samples_text, "Calibration blocks");
  opt->add_option("--eval-samples", eval_text, "Fresh blocks for the reported RMSE");
  opt->add_option("--profile-out", profile_path, "Write the (sample, beta) error profile as CSV");
  opt->add_option("--seed", seed)->required();
  opt->add_option("--out", out_path);
  opt->callback([&] {
    action = [&] {
      const std::size_t samples = parse_count_flag(samples_text);
      const std::size_t eval = parse_count_flag(eval_text);
      if (samples == 0 || eval == 0) throw CLI::ValidationError("sample counts must be positive");
      const std::vector<double> universe = universe_for(codec.preset, codec.q);
      const ErrorProfile profile = profile_errors(gaussian_blocks(samples, seed), universe, codec.q);
      if (!profile_path.empty()) {
        Output p(profile_path, out);
        write_profile_csv(*p, profile);
        p.close();
      }
      const BetaSelection sel = dp_optimal_betas(profile, codec.k);
      std::vector<std::pair<std::string, std::vector<double>>> candidates;
      std::vector<double> chosen;
      for (std::size_t idx : sel.indices) chosen.push_back(universe[idx]);
      candidates.emplace_back("dp", chosen);
      if (codec.preset == "appendixF") candidates.emplace_back("equally_spaced", presets::equally_spaced(codec.q, codec.k));

      const std::vector<Vec8> fresh = gaussian_blocks(eval, seed, kEvalStream);
      Output o(out_path, out);
      *o << "method,q,k,betas_q,calibration_rmse,opt_rmse,first_rmse\n";
      for (const auto& [name, betas] : candidates) {
        const ErrorProfile ep = profile_errors(fresh, betas, codec.q);
        std::vector<std::size_t> all(betas.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        const double denom = 8.0 * static_cast<double>(eval);
        const double calib = name == "dp" ? std::sqrt(sel.total / (8.0 * static_cast<double>(samples))) : NAN;
        *o << name << ',' << codec.q << ',' << betas.size() << ',' << join_scaled(betas, codec.q) << ',' << calib
           << ',' << std::sqrt(opt_beta_cost(ep, all) / denom) << ',' << std::sqrt(first_beta_cost(ep, all) / denom)
           << '\n';
      }
      o.close();
    };
  });

  // nsm
  auto* nsm = app.add_subcommand("nsm", "Monte Carlo normalized second moment");
  std::string lattice = "e8";
  std::string nsm_samples = "1e7";
  nsm->add_option("--lattice", lattice)->check(CLI::IsMember({"e8", "z"}));
  nsm->add_option("--samples", nsm_samples);
  nsm->add_option("--seed", seed)->required();
  nsm->add_option("--out", out_path);
  nsm->callback([&] {
    action = [&] {
      const std::size_t n = parse_count_flag(nsm_samples);
      const Estimate e = nsm_estimate(lattice == "z" ? LatticeKind::Z : LatticeKind::E8, n, seed);
      Output o(out_path, out);
      *o << "lattice,samples,nsm,std_error\n" << lattice << ',' << n << ',' << e.value << ',' << e.std_error << '\n';
      o.close();
    };
  });

  // measure-shaping
  auto* shaping = app.add_subcommand("measure-shaping", "Gaussian complement measure of equal-volume bodies");
  std::string scales_text = "1:0.25:3";
  std::string shaping_samples = "1e6";
  shaping->add_option("--scales", scales_text, "start:step:stop");
  shaping->add_option("--samples", shaping_samples);
  shaping->add_option("--seed", seed)->required();
  shaping->add_option("--out", out_path);
  shaping->callback([&] {
    action = [&] {
      const std::vector<double> scales = parse_range_flag(scales_text);
      const std::size_t n = parse_count_flag(shaping_samples);
      Output o(out_path, out);
      *o << "scale,cube,voronoi,ball,ball_exact,cube_minus_voronoi,cube_minus_voronoi_se,voronoi_minus_ball,"
            "voronoi_minus_ball_se\n";
      for (std::size_t i = 0; i < scales.size(); ++i) {
        const ShapingComparison c = compare_shaping(scales[i], n, seed + i);
        *o << c.scale << ',' << c.cube << ',' << c.voronoi << ',' << c.ball << ',' << c.ball_exact << ','
           << c.cube_minus_voronoi.value << ',' << c.cube_minus_voronoi.std_error << ',' << c.voronoi_minus_ball.value
           << ',' << c.voronoi_minus_ball.std_error << '\n';
      }
      o.close();
    };
  });

  // ldlq
  auto* ldlq = app.add_subcommand("ldlq", "Hessian-feedback weight quantization");
  std::string w_path, x_path, u_path;
  std::optional<double> eps2, ridge;
  bool estimate_eps = false;
  ldlq->add_option("--w", w_path, "Weights DMAT (rows = outputs)")->required();
  ldlq->add_option("--x", x_path, "Calibration activations DMAT (one per row)")->required();
  ldlq->add_option("--out", u_path, "Dequantized weights DMAT");
  ldlq->add_option("--eps2", eps2, "Activation noise variance for QA-LDLQ");
  ldlq->add_flag("--estimate-eps2", estimate_eps, "Estimate eps2 by quantizing the activations");
  ldlq->add_option("--ridge", ridge);
  codec.add(*ldlq);
  ldlq->callback([&] {
    action = [&] {
      const Matrix w = read_dmat_file(w_path);
      const Matrix x = read_dmat_file(x_path);
      if (x.cols() != w.cols()) throw ShapeError("activation width differs from weight columns");
      const Matrix batches[] = {x};
      const Hessian h = accumulate_hessian(batches);
      const QuantizerConfig cfg = resolve_config(codec, w);
      double e2 = eps2.value_or(0.0);
      if (estimate_eps) e2 = estimate_noise(x, cfg).eps2;
      if (e2 < 0.0) throw CLI::ValidationError("--eps2 must be non-negative");
      NestQuantRowQuantizer quantizer(cfg);
      const LdlqResult r = qa_ldlq_quantize(w, h.h, NoiseModel{e2}, quantizer, ridge);
      if (!u_path.empty()) write_dmat_file(u_path, r.dequantized);
      const Matrix j = e2 * Matrix::Identity(w.cols(), w.cols());
      out << std::setprecision(10) << "method,eps2,betas_q,proxy_loss,noisy_loss\n"
          << (e2 > 0.0 ? "qa-ldlq" : "ldlq") << ',' << e2 << ',' << join_scaled(cfg.betas, cfg.q) << ','
          << proxy_loss(w, r.dequantized, h.h) << ',' << noisy_loss(w, r.dequantized, h.h, j) << '\n';
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "nlq: " << e.what() << "\n" << app.help();
    return kConfigError;
  }

  try {
    set_max_threads(threads);
    if (action) action();
    return kOk;
  } catch (const IoError& e) {
    err << "nlq: I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const NumericalError& e) {
    err << "nlq: numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const CLI::ValidationError& e) {
    err << "nlq: " << e.what() << '\n';
    return kConfigError;
  } catch (const ShapeError& e) {
    err << "nlq: shape error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "nlq: invalid configuration: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "nlq: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace nestquant::cli
