#pragma once

#include <cstddef>
#include <cstdint>

namespace nestquant {

/// Threshold rate of the two-branch inner-product bound (printed value).
inline constexpr double kGammaThresholdRate = 0.906;

/// Γ(R): lower bound on E(XᵀY − est)²/n for rate-R descriptions of iid
/// N(0,1) vectors X, Y. Linear below R* and 2·2^{-2R} − 2^{-4R} above.
double gamma_lower_bound(double rate);

/// D(R) = 2^{-2R}.
double rate_distortion_gaussian(double rate);

/// P(‖X‖ ≤ radius) for X ~ N(0, I₈): the χ²₈ CDF at radius².
double gaussian_measure_ball(double radius);

/// Radius of the unit-volume ball in 8 dimensions, (4!)^{1/8}/√π.
double unit_volume_ball_radius();

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Unit-volume shaping bodies: the cube [-½, ½]⁸, the Voronoi cell of E8
/// (covolume 1) and the ball of radius unit_volume_ball_radius().
enum class ShapingRegion { Cube, E8Voronoi, Ball };

/// Monte Carlo estimate of μ(scale·region) for μ = N(0, I₈).
Estimate gaussian_measure_region(ShapingRegion region, double scale, std::size_t samples, std::uint64_t seed);

/// Complement measures of the three bodies at one scale, estimated on common
/// samples. The *_gap entries are paired differences with their standard
/// errors.
struct ShapingComparison {
  double scale = 0.0;
  double cube = 0.0;
  double voronoi = 0.0;
  double ball = 0.0;
  double ball_exact = 0.0;
  Estimate cube_minus_voronoi;
  Estimate voronoi_minus_ball;
};

ShapingComparison compare_shaping(double scale, std::size_t samples, std::uint64_t seed);

enum class LatticeKind { Z, E8 };

/// Normalized second moment by Monte Carlo: points uniform in [0, 64)^d are
/// reduced modulo the lattice and the mean of ‖x − Q(x)‖²/d is returned.
/// Both lattices have unit covolume.
Estimate nsm_estimate(LatticeKind lattice, std::size_t samples, std::uint64_t seed);

}  // namespace nestquant
