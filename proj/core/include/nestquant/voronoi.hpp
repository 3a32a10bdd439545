#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nestquant/e8.hpp"

namespace nestquant {

inline constexpr int kMinNestingRatio = 2;
inline constexpr int kMaxNestingRatio = 256;  // residues are stored in one byte

/// Coset of E8 / qE8, written as lattice coordinates reduced into [0, q).
struct VoronoiCode {
  std::array<std::uint8_t, 8> residues{};
  int q = kMinNestingRatio;

  friend bool operator==(const VoronoiCode&, const VoronoiCode&) = default;
};

void validate_nesting_ratio(int q);

/// Rate-log₂(q) Voronoi encoder: (G⁻¹·Q(x)) mod q.
VoronoiCode encode(const Vec8& x, int q);

/// Minimum-energy representative of the coset: p − q·Q(p/q) with p = G·c.
/// The result lies in q·V where V is the Voronoi cell of E8.
LatticePoint8 decode(const VoronoiCode& code);

/// Everything the encoder learns about one input in a single pass.
struct VoronoiResult {
  VoronoiCode code;
  LatticePoint8 nearest;         // Q(x)
  LatticePoint8 reconstruction;  // decode(code)
  bool overload = false;         // reconstruction != nearest
};

VoronoiResult quantize_voronoi(const Vec8& x, int q);

/// decode(encode(x)) for callers that only need the reconstruction.
LatticePoint8 encode_decode(const Vec8& x, int q);

/// True iff decode(encode(x)) differs from Q(x), i.e. Q(x) ∉ q·V.
bool is_overload(const Vec8& x, int q);

/// All q⁸ codes in lexicographic order of residues. Only sensible for small q.
std::vector<VoronoiCode> enumerate_codes(int q);

}  // namespace nestquant
