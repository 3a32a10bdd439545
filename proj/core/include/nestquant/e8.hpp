#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace nestquant {

using Vec8 = std::array<double, 8>;
using IntVec8 = std::array<std::int64_t, 8>;

/// A point of the Gosset lattice E8 = D8 ∪ (D8 + ½·1). Holding one of these
/// does not by itself guarantee membership; use is_in_e8() to check.
struct LatticePoint8 {
  Vec8 coords{};

  friend bool operator==(const LatticePoint8&, const LatticePoint8&) = default;
};

double squared_distance(const Vec8& x, const Vec8& y);
double squared_norm(const Vec8& x);

/// Membership test: all coordinates integer with even sum, or all in Z+½
/// with the shifted point in D8. Tolerance 1e-6 per coordinate.
bool is_in_e8(const Vec8& p);

/// Nearest point of D8 + offset·(1,…,1), offset ∈ {0, ½}. Rounds half toward
/// +∞; on odd parity flips the cheapest coordinate (lowest index on ties).
Vec8 closest_point_d8(const Vec8& x, double offset);

/// Exact nearest E8 point. Picks the nearer of the D8 and D8+½ candidates,
/// preferring D8+½ when both are equally close. Throws std::invalid_argument
/// for non-finite input.
LatticePoint8 closest_point_e8(const Vec8& x);

/// Same construction as closest_point_e8 but parity is always repaired on the
/// first coordinate. The result is in E8, is not always the nearest point,
/// and satisfies f(x + v) = f(x) + v for every v ∈ E8.
LatticePoint8 nestquantm_oracle(const Vec8& x);

/// Exhaustive reference: every E8 point within ±2 of the coordinate roundings
/// of x and x − ½, pruned by the covering radius. Requires ‖x‖∞ ≤ 100.
LatticePoint8 closest_point_e8_bruteforce(const Vec8& x);

/// Generator basis of E8: half of the decoder-friendly basis of 2·E8 whose
/// columns are (½·1), 2e₄, e₁+e₄, e₄+e₅, e₂+e₄, e₄+e₆, e₃+e₄, e₄+e₇
/// (0-based coordinates). |det| = 1.
struct GeneratorMatrix {
  using Dense = std::array<std::array<double, 8>, 8>;

  static const Dense& basis();
  static const Dense& inverse();
};

/// G⁻¹·p, rounded. Throws std::invalid_argument if p is not in E8 (any
/// coordinate off an integer by more than 1e-6).
IntVec8 coords(const LatticePoint8& p);

/// G·v.
LatticePoint8 point_from_coords(const IntVec8& v);

}  // namespace nestquant
