#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "nestquant/e8.hpp"

namespace nestquant {

/// Per-(sample, β) squared reconstruction error and overload flag for a
/// single-scale Voronoi code. Row-major: entry (p, j) at p·betas + j.
struct ErrorProfile {
  std::vector<double> beta_universe;  // ascending
  int q = 0;
  std::size_t samples = 0;
  std::vector<double> sq_error;
  std::vector<std::uint8_t> overload;

  std::size_t betas() const { return beta_universe.size(); }
  double error(std::size_t p, std::size_t j) const { return sq_error[p * betas() + j]; }
  bool overloaded(std::size_t p, std::size_t j) const { return overload[p * betas() + j] != 0; }
  /// True if no sample overloads at β_j.
  bool safe(std::size_t j) const;
};

ErrorProfile profile_errors(std::span<const Vec8> samples, std::span<const double> beta_universe, int q);

/// CSV with header `sample_id,beta,mse,overload`; mse is the squared error
/// per coordinate.
void write_profile_csv(std::ostream& os, const ErrorProfile& profile);

struct BetaSelection {
  std::vector<std::size_t> indices;  // ascending indices into the universe
  double total = 0.0;                // summed squared error over all samples
};

/// Cost of moving from selected β_s to the next selected β_i (s < i, both
/// 0-based; s = -1 is the implicit scale that overloads every sample):
/// Σ over samples overloading at s but not at i of their error at i.
double transition_cost(const ErrorProfile& profile, std::ptrdiff_t s, std::size_t i);

/// Sum of transition costs along an ascending subset whose last element is
/// safe. This is the objective minimized by dp_optimal_betas; it coincides
/// with first_beta_cost whenever overload is monotone in β for each sample.
double chain_cost(const ErrorProfile& profile, std::span<const std::size_t> subset);

/// First-β: each sample uses the smallest selected β that does not overload
/// it, falling back to the largest. Opt-β: the minimum error over the subset.
double first_beta_cost(const ErrorProfile& profile, std::span<const std::size_t> subset);
double opt_beta_cost(const ErrorProfile& profile, std::span<const std::size_t> subset);

/// Optimal subset of at most k betas under chain_cost. Throws NumericalError
/// if no β in the universe is safe for every sample.
BetaSelection dp_optimal_betas(const ErrorProfile& profile, std::size_t k);

/// Exhaustive verifier for dp_optimal_betas; refuses more than 10⁶ subsets.
BetaSelection brute_force_betas(const ErrorProfile& profile, std::size_t k);

enum class TensorKind { Weights, Activations };

/// Adds 3/q (weights) or 4/q (activations, keys, values) to the largest β
/// needed for zero overloads on calibration data.
double apply_margin(double beta_max_needed, TensorKind kind, int q);

/// Smallest β (continuous search by bisection on `samples`) for which none of
/// the samples overload.
double beta_max_needed(std::span<const Vec8> samples, int q);

namespace presets {

// Universes are written in the q-scaled convention β̂·q and divided by q here,
// so they apply to unit-variance inputs.

/// 1..40 with spacing 0.25 up to 10, 0.5 up to 16, 1 up to 24, 2 up to 40.
std::vector<double> default_universe(int q);
/// ½·{1, …, 50}.
std::vector<double> synthetic_universe(int q);
/// Uniform grid step, 2·step, …, 10.
std::vector<double> uniform_universe(int q, double step);
/// k equally spaced scales top·i/k, i = 1..k.
std::vector<double> equally_spaced(int q, std::size_t k, double top = 10.0);

}  // namespace presets

}  // namespace nestquant
