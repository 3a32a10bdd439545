#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "nestquant/e8.hpp"
#include "nestquant/voronoi.hpp"

namespace nq = nestquant;

namespace {

std::vector<nq::Vec8> e8_roots() {
  std::vector<nq::Vec8> roots;
  for (int i = 0; i < 8; ++i) {
    for (int j = i + 1; j < 8; ++j) {
      for (int si : {-1, 1}) {
        for (int sj : {-1, 1}) {
          nq::Vec8 v{};
          v[i] = si;
          v[j] = sj;
          roots.push_back(v);
        }
      }
    }
  }
  for (int mask = 0; mask < 256; ++mask) {
    if (__builtin_popcount(mask) % 2 != 0) continue;
    nq::Vec8 v{};
    for (int i = 0; i < 8; ++i) v[i] = (mask >> i) & 1 ? -0.5 : 0.5;
    roots.push_back(v);
  }
  return roots;
}

// p lies in q·V (closed) iff no scaled root q·r brings it closer to the origin.
bool in_scaled_voronoi(const nq::Vec8& p, int q, const std::vector<nq::Vec8>& roots) {
  const double n = nq::squared_norm(p);
  for (const auto& r : roots) {
    double d = 0.0;
    for (int i = 0; i < 8; ++i) d += (p[i] - q * r[i]) * (p[i] - q * r[i]);
    if (d < n - 1e-9) return false;
  }
  return true;
}

nq::Vec8 gaussian(std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> n(0.0, sigma);
  nq::Vec8 v;
  for (double& x : v) x = n(rng);
  return v;
}

class ExhaustiveCosets : public ::testing::TestWithParam<int> {};

}  // namespace

TEST_P(ExhaustiveCosets, DecodeIsMinimumEnergyBijection) {
  const int q = GetParam();
  const auto roots = e8_roots();
  const auto codes = nq::enumerate_codes(q);
  ASSERT_EQ(codes.size(), static_cast<std::size_t>(std::pow(q, 8)));
  std::set<nq::Vec8> points;
  for (const auto& c : codes) {
    const nq::LatticePoint8 p = nq::decode(c);
    ASSERT_TRUE(nq::is_in_e8(p.coords));
    ASSERT_TRUE(in_scaled_voronoi(p.coords, q, roots));
    ASSERT_EQ(nq::encode(p.coords, q), c);
    // Same coset as the generator combination of the residues.
    nq::IntVec8 raw;
    for (int i = 0; i < 8; ++i) raw[i] = c.residues[i];
    const nq::Vec8 g = nq::point_from_coords(raw).coords;
    nq::Vec8 diff;
    for (int i = 0; i < 8; ++i) diff[i] = (g[i] - p.coords[i]) / q;
    ASSERT_TRUE(nq::is_in_e8(diff));
    points.insert(p.coords);
  }
  EXPECT_EQ(points.size(), codes.size());
}

INSTANTIATE_TEST_SUITE_P(SmallQ, ExhaustiveCosets, ::testing::Values(2, 3));

TEST(Voronoi, ValidatesNestingRatio) {
  EXPECT_THROW(nq::validate_nesting_ratio(1), std::invalid_argument);
  EXPECT_THROW(nq::validate_nesting_ratio(257), std::invalid_argument);
  EXPECT_NO_THROW(nq::validate_nesting_ratio(2));
  EXPECT_NO_THROW(nq::validate_nesting_ratio(256));
  EXPECT_THROW(nq::encode(nq::Vec8{}, 0), std::invalid_argument);
}

TEST(Voronoi, OverloadIffReconstructionDiffersFromNearest) {
  std::mt19937_64 rng(21);
  const auto roots = e8_roots();
  int overloads = 0;
  for (int t = 0; t < 4000; ++t) {
    const int q = 2 + t % 15;
    const nq::Vec8 x = gaussian(rng, 0.4 * q);
    const nq::VoronoiResult r = nq::quantize_voronoi(x, q);
    EXPECT_EQ(r.nearest, nq::closest_point_e8(x));
    EXPECT_EQ(r.reconstruction, nq::decode(r.code));
    EXPECT_EQ(r.reconstruction, nq::encode_decode(x, q));
    EXPECT_EQ(r.overload, !(r.reconstruction == r.nearest));
    EXPECT_EQ(r.overload, nq::is_overload(x, q));
    // Without overload, the nearest point must already sit inside q·V.
    if (!r.overload) EXPECT_TRUE(in_scaled_voronoi(r.nearest.coords, q, roots));
    overloads += r.overload;
  }
  EXPECT_GT(overloads, 0);
  EXPECT_LT(overloads, 4000);
}

TEST(Voronoi, ReconstructionDiffersFromNearestByCoarseLatticePoint) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 2000; ++t) {
    const int q = 2 + t % 30;
    const nq::Vec8 x = gaussian(rng, q);
    const nq::VoronoiResult r = nq::quantize_voronoi(x, q);
    nq::Vec8 d;
    for (int i = 0; i < 8; ++i) d[i] = (r.nearest.coords[i] - r.reconstruction.coords[i]) / q;
    ASSERT_TRUE(nq::is_in_e8(d));
  }
}

TEST(Voronoi, SmallInputsNeverOverload) {
  // The inscribed radius of V is √2/2, so ‖x‖ + 1 < q·√2/2 is safe.
  std::mt19937_64 rng(23);
  for (int q : {4, 8, 16, 64, 256}) {
    const double safe = q * std::sqrt(2.0) / 2.0 - 1.0;
    for (int t = 0; t < 500; ++t) {
      nq::Vec8 x = gaussian(rng, 1.0);
      const double n = std::sqrt(nq::squared_norm(x));
      for (double& v : x) v *= 0.999 * safe / n;
      EXPECT_FALSE(nq::is_overload(x, q));
    }
  }
}

TEST(Voronoi, ResiduesAreBelowQ) {
  std::mt19937_64 rng(24);
  for (int q : {2, 7, 100, 256}) {
    for (int t = 0; t < 200; ++t) {
      const nq::VoronoiCode c = nq::encode(gaussian(rng, 50.0), q);
      EXPECT_EQ(c.q, q);
      for (auto r : c.residues) EXPECT_LT(r, q);
    }
  }
}
