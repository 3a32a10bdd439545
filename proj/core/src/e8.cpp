#include "nestquant/e8.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nestquant {

double squared_distance(const Vec8& x, const Vec8& y) {
  double s = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

double squared_norm(const Vec8& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

namespace {

constexpr double kMembershipTol = 1e-6;

void require_finite(const Vec8& x) {
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("lattice oracle: non-finite input");
  }
}

bool is_in_d8(const Vec8& p) {
  long long sum = 0;
  for (double v : p) {
    const double r = std::round(v);
    if (std::abs(v - r) > kMembershipTol) return false;
    sum += static_cast<long long>(r);
  }
  return (sum & 1) == 0;
}

// Round every coordinate of x - offset to the nearest integer (halves go up)
// and repair odd parity. `flip_index` < 0 selects the cheapest coordinate,
// otherwise that coordinate is always flipped.
Vec8 round_to_d8(const Vec8& x, double offset, int flip_index) {
  Vec8 r{};
  Vec8 frac{};
  long long parity = 0;
  for (int i = 0; i < 8; ++i) {
    const double y = x[i] - offset;
    const double ri = std::floor(y + 0.5);
    r[i] = ri;
    frac[i] = y - ri;  // in [-½, ½)
    parity += static_cast<long long>(ri);
  }
  if (parity & 1) {
    int pos = flip_index;
    if (pos < 0) {
      // Flipping coordinate i costs 1 - 2|frac_i|: the largest |frac| is cheapest.
      pos = 0;
      double best = std::abs(frac[0]);
      for (int i = 1; i < 8; ++i) {
        const double a = std::abs(frac[i]);
        if (a > best) {
          best = a;
          pos = i;
        }
      }
    }
    r[pos] += frac[pos] >= 0.0 ? 1.0 : -1.0;
  }
  for (int i = 0; i < 8; ++i) r[i] += offset;
  return r;
}

LatticePoint8 pick_nearer(const Vec8& x, const Vec8& integer_candidate, const Vec8& half_candidate) {
  const double d_int = squared_distance(x, integer_candidate);
  const double d_half = squared_distance(x, half_candidate);
  return LatticePoint8{d_int < d_half ? integer_candidate : half_candidate};
}

}  // namespace

bool is_in_e8(const Vec8& p) {
  for (double v : p) {
    if (!std::isfinite(v)) return false;
  }
  if (is_in_d8(p)) return true;
  Vec8 shifted{};
  for (int i = 0; i < 8; ++i) shifted[i] = p[i] - 0.5;
  return is_in_d8(shifted);
}

Vec8 closest_point_d8(const Vec8& x, double offset) {
  require_finite(x);
  if (offset != 0.0 && offset != 0.5) {
    throw std::invalid_argument("closest_point_d8: offset must be 0 or 1/2");
  }
  return round_to_d8(x, offset, -1);
}

LatticePoint8 closest_point_e8(const Vec8& x) {
  require_finite(x);
  return pick_nearer(x, round_to_d8(x, 0.0, -1), round_to_d8(x, 0.5, -1));
}

LatticePoint8 nestquantm_oracle(const Vec8& x) {
  require_finite(x);
  return pick_nearer(x, round_to_d8(x, 0.0, 0), round_to_d8(x, 0.5, 0));
}

namespace {

struct BruteForceSearch {
  const Vec8& x;
  double offset;
  Vec8 centre{};
  Vec8 current{};
  Vec8 best{};
  double best_dist = std::numeric_limits<double>::infinity();
  double radius2 = 0.0;

  void run(int depth, double partial, long long parity_sum) {
    if (partial > radius2) return;
    if (depth == 8) {
      if ((parity_sum & 1) == 0 && partial < best_dist) {
        best_dist = partial;
        best = current;
      }
      return;
    }
    for (int delta = -2; delta <= 2; ++delta) {
      const double k = centre[depth] + delta;
      const double v = k + offset;
      const double d = x[depth] - v;
      current[depth] = v;
      run(depth + 1, partial + d * d, parity_sum + static_cast<long long>(k));
    }
  }
};

}  // namespace

LatticePoint8 closest_point_e8_bruteforce(const Vec8& x) {
  require_finite(x);
  for (double v : x) {
    if (std::abs(v) > 100.0) throw std::invalid_argument("closest_point_e8_bruteforce: |x|_inf > 100");
  }
  // Every x is within the covering radius (1) of E8, so the search only needs
  // candidates at squared distance <= 1; the slack absorbs roundoff.
  constexpr double kRadius2 = 1.0 + 1e-9;
  LatticePoint8 result;
  double result_dist = std::numeric_limits<double>::infinity();
  for (double offset : {0.0, 0.5}) {
    BruteForceSearch search{x, offset};
    search.radius2 = kRadius2;
    for (int i = 0; i < 8; ++i) search.centre[i] = std::round(x[i] - offset);
    search.run(0, 0.0, 0);
    // Same preference as the fast oracle on exact ties: the half-integer coset.
    if (search.best_dist < result_dist || (offset == 0.5 && search.best_dist == result_dist)) {
      result_dist = search.best_dist;
      result.coords = search.best;
    }
  }
  return result;
}

const GeneratorMatrix::Dense& GeneratorMatrix::basis() {
  // Row i = coordinate i, column j = basis vector j.
  static const Dense g = [] {
    Dense m{};
    for (int i = 0; i < 8; ++i) m[i][0] = 0.5;
    m[4][1] = 2.0;
    const int partner[8] = {-1, -1, 1, 5, 2, 6, 3, 7};
    for (int j = 2; j < 8; ++j) {
      m[4][j] = 1.0;
      m[partner[j]][j] = 1.0;
    }
    return m;
  }();
  return g;
}

const GeneratorMatrix::Dense& GeneratorMatrix::inverse() {
  static const Dense inv = [] {
    Dense m{};
    m[0][0] = 2.0;
    // c1 = (p4 + 5 p0 - p1 - p2 - p3 - p5 - p6 - p7) / 2
    m[1][0] = 2.5;
    m[1][4] = 0.5;
    for (int i : {1, 2, 3, 5, 6, 7}) m[1][i] = -0.5;
    // c_j = p_partner(j) - p0 for j >= 2
    const int partner[8] = {-1, -1, 1, 5, 2, 6, 3, 7};
    for (int j = 2; j < 8; ++j) {
      m[j][partner[j]] = 1.0;
      m[j][0] = -1.0;
    }
    return m;
  }();
  return inv;
}

IntVec8 coords(const LatticePoint8& p) {
  const auto& inv = GeneratorMatrix::inverse();
  IntVec8 v{};
  for (int i = 0; i < 8; ++i) {
    double s = 0.0;
    for (int j = 0; j < 8; ++j) s += inv[i][j] * p.coords[j];
    const double r = std::round(s);
    if (!std::isfinite(s) || std::abs(s - r) > kMembershipTol) {
      throw std::invalid_argument("coords: point is not in E8");
    }
    v[i] = static_cast<std::int64_t>(r);
  }
  return v;
}

LatticePoint8 point_from_coords(const IntVec8& v) {
  const auto& g = GeneratorMatrix::basis();
  LatticePoint8 p;
  for (int i = 0; i < 8; ++i) {
    double s = 0.0;
    for (int j = 0; j < 8; ++j) s += g[i][j] * static_cast<double>(v[j]);
    p.coords[i] = s;
  }
  return p;
}

}  // namespace nestquant
