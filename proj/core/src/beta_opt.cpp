#include "nestquant/beta_opt.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "nestquant/error.hpp"
#include "nestquant/parallel.hpp"
#include "nestquant/voronoi.hpp"

namespace nestquant {

bool ErrorProfile::safe(std::size_t j) const {
  for (std::size_t p = 0; p < samples; ++p) {
    if (overloaded(p, j)) return false;
  }
  return true;
}

ErrorProfile profile_errors(std::span<const Vec8> samples, std::span<const double> beta_universe, int q) {
  validate_nesting_ratio(q);
  if (samples.empty() || beta_universe.empty()) {
    throw std::invalid_argument("profile_errors: empty samples or beta universe");
  }
  for (std::size_t j = 0; j < beta_universe.size(); ++j) {
    if (!(beta_universe[j] > 0.0) || (j > 0 && beta_universe[j] <= beta_universe[j - 1])) {
      throw std::invalid_argument("profile_errors: beta universe must be positive and ascending");
    }
  }
  ErrorProfile prof;
  prof.beta_universe.assign(beta_universe.begin(), beta_universe.end());
  prof.q = q;
  prof.samples = samples.size();
  const std::size_t m = beta_universe.size();
  prof.sq_error.resize(samples.size() * m);
  prof.overload.resize(samples.size() * m);

  parallel_for(static_cast<std::int64_t>(samples.size()), [&](std::int64_t p) {
    const Vec8& v = samples[p];
    for (std::size_t j = 0; j < m; ++j) {
      const double beta = beta_universe[j];
      Vec8 scaled{};
      for (int i = 0; i < 8; ++i) scaled[i] = v[i] / beta;
      const VoronoiResult r = quantize_voronoi(scaled, q);
      double err = 0.0;
      for (int i = 0; i < 8; ++i) {
        const double d = r.reconstruction.coords[i] * beta - v[i];
        err += d * d;
      }
      prof.sq_error[p * m + j] = err;
      prof.overload[p * m + j] = r.overload ? 1 : 0;
    }
  });
  return prof;
}

void write_profile_csv(std::ostream& os, const ErrorProfile& profile) {
  os << "sample_id,beta,mse,overload\n";
  os << std::setprecision(12);
  for (std::size_t p = 0; p < profile.samples; ++p) {
    for (std::size_t j = 0; j < profile.betas(); ++j) {
      os << p << ',' << profile.beta_universe[j] << ',' << profile.error(p, j) / 8.0 << ','
         << (profile.overloaded(p, j) ? 1 : 0) << '\n';
    }
  }
}

namespace {

bool overloaded_at(const ErrorProfile& prof, std::size_t p, std::ptrdiff_t s) {
  return s < 0 || prof.overloaded(p, static_cast<std::size_t>(s));
}

void check_subset(const ErrorProfile& prof, std::span<const std::size_t> subset) {
  if (subset.empty()) throw std::invalid_argument("beta subset must be non-empty");
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (subset[i] >= prof.betas() || (i > 0 && subset[i] <= subset[i - 1])) {
      throw std::invalid_argument("beta subset must be ascending indices into the universe");
    }
  }
}

// Full (m+1)×(m+1) table of transition costs, row s+1 / column i+1 holding
// transition_cost(s, i). Samples whose overload pattern is a prefix (the usual
// case) are handled with per-threshold partial sums; the rest are added pair by
// pair exactly as in the defining formula.
std::vector<double> transition_table(const ErrorProfile& prof) {
  const std::size_t m = prof.betas();
  const std::size_t w = m + 1;
  std::vector<double> table(w * w, 0.0);
  // by_threshold[i * w + t]: summed error at β_i of monotone samples whose
  // first safe (1-based) index is t.
  std::vector<double> by_threshold(m * w, 0.0);

  for (std::size_t p = 0; p < prof.samples; ++p) {
    std::size_t first_safe = m;
    while (first_safe > 0 && !prof.overloaded(p, first_safe - 1)) --first_safe;
    bool monotone = true;
    for (std::size_t j = 0; j < first_safe; ++j) {
      if (!prof.overloaded(p, j)) {
        monotone = false;
        break;
      }
    }
    if (monotone) {
      const std::size_t t = first_safe + 1;  // 1-based threshold
      for (std::size_t i = first_safe; i < m; ++i) by_threshold[i * w + t] += prof.error(p, i);
      continue;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (prof.overloaded(p, i)) continue;
      for (std::ptrdiff_t s = -1; s < static_cast<std::ptrdiff_t>(i); ++s) {
        if (overloaded_at(prof, p, s)) table[(s + 1) * w + (i + 1)] += prof.error(p, i);
      }
    }
  }
  // transition (s, i) collects thresholds t with s+1 < t <= i+1 (1-based).
  for (std::size_t i = 0; i < m; ++i) {
    double suffix = 0.0;
    for (std::size_t s1 = i + 1; s1-- > 0;) {  // s1 = s + 1, from i down to 0
      suffix += by_threshold[i * w + s1 + 1];
      table[s1 * w + (i + 1)] += suffix;
    }
  }
  return table;
}

}  // namespace

double transition_cost(const ErrorProfile& prof, std::ptrdiff_t s, std::size_t i) {
  if (i >= prof.betas() || s < -1 || s >= static_cast<std::ptrdiff_t>(i)) {
    throw std::invalid_argument("transition_cost: need -1 <= s < i < m");
  }
  double cost = 0.0;
  for (std::size_t p = 0; p < prof.samples; ++p) {
    if (overloaded_at(prof, p, s) && !prof.overloaded(p, i)) cost += prof.error(p, i);
  }
  return cost;
}

double chain_cost(const ErrorProfile& prof, std::span<const std::size_t> subset) {
  check_subset(prof, subset);
  if (!prof.safe(subset.back())) {
    return std::numeric_limits<double>::infinity();
  }
  double total = 0.0;
  std::ptrdiff_t prev = -1;
  for (std::size_t i : subset) {
    total += transition_cost(prof, prev, i);
    prev = static_cast<std::ptrdiff_t>(i);
  }
  return total;
}

double first_beta_cost(const ErrorProfile& prof, std::span<const std::size_t> subset) {
  check_subset(prof, subset);
  double total = 0.0;
  for (std::size_t p = 0; p < prof.samples; ++p) {
    std::size_t chosen = subset.back();
    for (std::size_t j : subset) {
      if (!prof.overloaded(p, j)) {
        chosen = j;
        break;
      }
    }
    total += prof.error(p, chosen);
  }
  return total;
}

double opt_beta_cost(const ErrorProfile& prof, std::span<const std::size_t> subset) {
  check_subset(prof, subset);
  double total = 0.0;
  for (std::size_t p = 0; p < prof.samples; ++p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j : subset) best = std::min(best, prof.error(p, j));
    total += best;
  }
  return total;
}

BetaSelection dp_optimal_betas(const ErrorProfile& prof, std::size_t k) {
  if (k == 0) throw std::invalid_argument("dp_optimal_betas: k must be >= 1");
  if (prof.samples == 0 || prof.betas() == 0) throw std::invalid_argument("dp_optimal_betas: empty profile");
  const std::size_t m = prof.betas();
  std::vector<bool> safe(m);
  bool any_safe = false;
  for (std::size_t j = 0; j < m; ++j) {
    safe[j] = prof.safe(j);
    any_safe = any_safe || safe[j];
  }
  if (!any_safe) {
    throw NumericalError(
        "dp_optimal_betas: every beta in the universe overloads some sample; extend the universe "
        "with larger betas (add the calibration margin)");
  }

  const std::vector<double> cost = transition_table(prof);
  const std::size_t w = m + 1;
  const double inf = std::numeric_limits<double>::infinity();
  // dp[i][j]: state i is 1-based (0 = implicit all-overloading scale).
  std::vector<double> dp(w * (k + 1), inf);
  std::vector<std::size_t> from(w * (k + 1), 0);
  dp[0] = 0.0;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= k; ++j) {
      for (std::size_t s = 0; s < i; ++s) {
        const double prev = dp[s * (k + 1) + (j - 1)];
        if (prev == inf) continue;
        const double cand = prev + cost[s * w + i];
        if (dp[i * (k + 1) + j] > cand) {
          dp[i * (k + 1) + j] = cand;
          from[i * (k + 1) + j] = s;
        }
      }
    }
  }

  std::size_t best_pos = 0;
  std::size_t best_j = 0;
  double best = inf;
  for (std::size_t j = 1; j <= k; ++j) {
    for (std::size_t i = 1; i <= m; ++i) {
      if (safe[i - 1] && dp[i * (k + 1) + j] < best) {
        best = dp[i * (k + 1) + j];
        best_pos = i;
        best_j = j;
      }
    }
  }
  BetaSelection sel;
  sel.total = best;
  std::size_t pos = best_pos;
  for (std::size_t j = best_j; j >= 1; --j) {
    sel.indices.push_back(pos - 1);
    pos = from[pos * (k + 1) + j];
  }
  std::reverse(sel.indices.begin(), sel.indices.end());
  return sel;
}

BetaSelection brute_force_betas(const ErrorProfile& prof, std::size_t k) {
  if (k == 0) throw std::invalid_argument("brute_force_betas: k must be >= 1");
  const std::size_t m = prof.betas();
  double subsets = 0.0;
  for (std::size_t size = 1; size <= std::min(k, m); ++size) {
    double c = 1.0;
    for (std::size_t i = 0; i < size; ++i) c = c * static_cast<double>(m - i) / static_cast<double>(i + 1);
    subsets += c;
  }
  if (subsets > 1e6) throw std::invalid_argument("brute_force_betas: more than 1e6 subsets");

  BetaSelection best;
  best.total = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> subset;
  // Depth-first enumeration of ascending index sequences of length 1..k.
  auto visit = [&](auto&& self, std::size_t start) -> void {
    if (!subset.empty()) {
      const double c = chain_cost(prof, subset);
      if (c < best.total) {
        best.total = c;
        best.indices = subset;
      }
    }
    if (subset.size() == k) return;
    for (std::size_t i = start; i < m; ++i) {
      subset.push_back(i);
      self(self, i + 1);
      subset.pop_back();
    }
  };
  visit(visit, 0);
  if (best.indices.empty()) {
    throw NumericalError("brute_force_betas: no safe beta in the universe");
  }
  return best;
}

double apply_margin(double beta_max_needed, TensorKind kind, int q) {
  if (!(beta_max_needed > 0.0) || q <= 0) throw std::invalid_argument("apply_margin: positive inputs required");
  const double margin = kind == TensorKind::Weights ? 3.0 : 4.0;
  return beta_max_needed + margin / static_cast<double>(q);
}

double beta_max_needed(std::span<const Vec8> samples, int q) {
  validate_nesting_ratio(q);
  if (samples.empty()) throw std::invalid_argument("beta_max_needed: empty samples");
  auto any_overload = [&](double beta) {
    for (const Vec8& v : samples) {
      Vec8 s{};
      for (int i = 0; i < 8; ++i) s[i] = v[i] / beta;
      if (is_overload(s, q)) return true;
    }
    return false;
  };
  double max_norm = 0.0;
  for (const Vec8& v : samples) max_norm = std::max(max_norm, std::sqrt(squared_norm(v)));
  if (max_norm == 0.0) return std::numeric_limits<double>::min();
  // q·V contains the ball of radius q/√2 (packing radius of E8 is 1/√2) shrunk
  // by the covering radius, so this upper bracket never overloads.
  double hi = 2.0 * max_norm / (static_cast<double>(q) / std::sqrt(2.0) - 1.0 > 0.0
                                    ? static_cast<double>(q) / std::sqrt(2.0) - 1.0
                                    : 0.25);
  while (any_overload(hi)) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (any_overload(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

namespace presets {

std::vector<double> default_universe(int q) {
  validate_nesting_ratio(q);
  std::vector<double> out;
  auto add_range = [&](double from, double to, double step) {
    for (double v = from; v <= to + 1e-9; v += step) out.push_back(v);
  };
  add_range(1.0, 10.0, 0.25);
  add_range(10.5, 16.0, 0.5);
  add_range(17.0, 24.0, 1.0);
  add_range(26.0, 40.0, 2.0);
  for (double& v : out) v /= q;
  return out;
}

std::vector<double> synthetic_universe(int q) {
  validate_nesting_ratio(q);
  std::vector<double> out;
  for (int i = 1; i <= 50; ++i) out.push_back(0.5 * i / q);
  return out;
}

std::vector<double> uniform_universe(int q, double step) {
  validate_nesting_ratio(q);
  if (!(step > 0.0) || step > 10.0) throw std::invalid_argument("uniform_universe: step must be in (0, 10]");
  std::vector<double> out;
  const int count = static_cast<int>(std::floor(10.0 / step + 1e-9));
  for (int i = 1; i <= count; ++i) out.push_back(i * step / q);
  return out;
}

std::vector<double> equally_spaced(int q, std::size_t k, double top) {
  validate_nesting_ratio(q);
  if (k == 0 || !(top > 0.0)) throw std::invalid_argument("equally_spaced: need k >= 1 and top > 0");
  std::vector<double> out;
  for (std::size_t i = 1; i <= k; ++i) out.push_back(top * static_cast<double>(i) / static_cast<double>(k) / q);
  return out;
}

}  // namespace presets

}  // namespace nestquant
