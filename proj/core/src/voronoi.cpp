#include "nestquant/voronoi.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nestquant {

void validate_nesting_ratio(int q) {
  if (q < kMinNestingRatio || q > kMaxNestingRatio) {
    throw std::invalid_argument("nesting ratio q must be in [2, 256], got " + std::to_string(q));
  }
}

namespace {

VoronoiCode reduce(const IntVec8& v, int q) {
  VoronoiCode code;
  code.q = q;
  for (int i = 0; i < 8; ++i) {
    std::int64_t r = v[i] % q;
    if (r < 0) r += q;
    code.residues[i] = static_cast<std::uint8_t>(r);
  }
  return code;
}

}  // namespace

VoronoiCode encode(const Vec8& x, int q) {
  validate_nesting_ratio(q);
  return reduce(coords(closest_point_e8(x)), q);
}

LatticePoint8 decode(const VoronoiCode& code) {
  validate_nesting_ratio(code.q);
  IntVec8 c{};
  for (int i = 0; i < 8; ++i) c[i] = code.residues[i];
  const LatticePoint8 p = point_from_coords(c);
  const double q = code.q;
  Vec8 scaled{};
  for (int i = 0; i < 8; ++i) scaled[i] = p.coords[i] / q;
  const LatticePoint8 shift = closest_point_e8(scaled);
  LatticePoint8 out;
  for (int i = 0; i < 8; ++i) out.coords[i] = p.coords[i] - q * shift.coords[i];
  return out;
}

VoronoiResult quantize_voronoi(const Vec8& x, int q) {
  validate_nesting_ratio(q);
  VoronoiResult r;
  r.nearest = closest_point_e8(x);
  r.code = reduce(coords(r.nearest), q);
  r.reconstruction = decode(r.code);
  r.overload = r.reconstruction != r.nearest;
  return r;
}

LatticePoint8 encode_decode(const Vec8& x, int q) { return decode(encode(x, q)); }

bool is_overload(const Vec8& x, int q) { return quantize_voronoi(x, q).overload; }

std::vector<VoronoiCode> enumerate_codes(int q) {
  validate_nesting_ratio(q);
  std::size_t total = 1;
  for (int i = 0; i < 8; ++i) total *= static_cast<std::size_t>(q);
  std::vector<VoronoiCode> out;
  out.reserve(total);
  VoronoiCode code;
  code.q = q;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (int i = 7; i >= 0; --i) {
      code.residues[i] = static_cast<std::uint8_t>(rem % q);
      rem /= q;
    }
    out.push_back(code);
  }
  return out;
}

}  // namespace nestquant
