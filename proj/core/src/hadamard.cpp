#include "nestquant/hadamard.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nestquant/error.hpp"
#include "nestquant/parallel.hpp"

namespace nestquant {

namespace {

constexpr std::array<int, 5> kStoredSizes = {1, 2, 4, 12, 20};

Matrix sylvester(int size) {
  Matrix h = Matrix::Constant(1, 1, 1.0);
  while (h.rows() < size) {
    const Eigen::Index s = h.rows();
    Matrix next(2 * s, 2 * s);
    next.topLeftCorner(s, s) = h;
    next.topRightCorner(s, s) = h;
    next.bottomLeftCorner(s, s) = h;
    next.bottomRightCorner(s, s) = -h;
    h = std::move(next);
  }
  return h;
}

// Paley construction I for a prime p ≡ 3 (mod 4): H = I + [[0, 1ᵀ], [-1, Q]]
// with Q the Jacobsthal matrix Q_ij = χ(j - i).
Matrix paley(int p) {
  std::vector<int> chi(p, -1);
  chi[0] = 0;
  for (int x = 1; x < p; ++x) chi[(x * x) % p] = 1;
  const int n = p + 1;
  Matrix h = Matrix::Identity(n, n);
  for (int j = 1; j < n; ++j) {
    h(0, j) += 1.0;
    h(j, 0) -= 1.0;
  }
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) h(i + 1, j + 1) += chi[((j - i) % p + p) % p];
  }
  return h;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

int log2_exact(std::size_t n) {
  int k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return k;
}

void fwht_inplace(double* x, std::size_t len, OpCounter* counter) {
  for (std::size_t h = 1; h < len; h <<= 1) {
    for (std::size_t i = 0; i < len; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double a = x[j];
        const double b = x[j + h];
        x[j] = a + b;
        x[j + h] = a - b;
      }
    }
    if (counter) counter->ops += len;
  }
}

}  // namespace

std::span<const int> stored_hadamard_sizes() { return kStoredSizes; }

const Matrix& stored_hadamard(int m) {
  static const std::array<Matrix, 5> table = {sylvester(1), sylvester(2), sylvester(4), paley(11), paley(19)};
  for (std::size_t i = 0; i < kStoredSizes.size(); ++i) {
    if (kStoredSizes[i] == m) return table[i];
  }
  throw std::invalid_argument("no stored Hadamard matrix of size " + std::to_string(m));
}

HadamardSpec HadamardSpec::for_dimension(std::size_t n) {
  if (is_power_of_two(n)) return make(1, log2_exact(n));
  for (int m : {12, 20}) {
    if (n % static_cast<std::size_t>(m) == 0 && is_power_of_two(n / m)) return make(m, log2_exact(n / m));
  }
  throw std::invalid_argument("no Hadamard factorization n = m·2^k with stored m for n = " + std::to_string(n));
}

HadamardSpec HadamardSpec::make(int m, int log2_sylvester) {
  (void)stored_hadamard(m);
  if (log2_sylvester < 0 || log2_sylvester > 30) throw std::invalid_argument("Sylvester order out of range");
  HadamardSpec spec;
  spec.m = m;
  spec.log2_sylvester = log2_sylvester;
  spec.n = static_cast<std::size_t>(m) << log2_sylvester;
  return spec;
}

Matrix hadamard_matrix(const HadamardSpec& spec) {
  const Matrix& h1 = stored_hadamard(spec.m);
  const Matrix h2 = sylvester(1 << spec.log2_sylvester);
  Matrix out(spec.n, spec.n);
  for (Eigen::Index a = 0; a < h1.rows(); ++a) {
    for (Eigen::Index c = 0; c < h1.cols(); ++c) {
      out.block(a * h2.rows(), c * h2.cols(), h2.rows(), h2.cols()) = h1(a, c) * h2;
    }
  }
  return out;
}

void fast_hadamard_transform(std::span<double> x, const HadamardSpec& spec, OpCounter* counter) {
  if (x.size() != spec.n) {
    throw ShapeError("fast_hadamard_transform: length " + std::to_string(x.size()) + " does not match spec n = " +
                     std::to_string(spec.n));
  }
  const std::size_t chunk = std::size_t{1} << spec.log2_sylvester;
  const std::size_t m = static_cast<std::size_t>(spec.m);
  for (std::size_t c = 0; c < m; ++c) fwht_inplace(x.data() + c * chunk, chunk, counter);

  if (m > 1) {
    const Matrix& h1 = stored_hadamard(spec.m);
    std::vector<double> column(m);
    for (std::size_t b = 0; b < chunk; ++b) {
      for (std::size_t c = 0; c < m; ++c) column[c] = x[c * chunk + b];
      for (std::size_t a = 0; a < m; ++a) {
        double acc = 0.0;
        for (std::size_t c = 0; c < m; ++c) acc += h1(a, c) > 0.0 ? column[c] : -column[c];
        x[a * chunk + b] = acc;
      }
    }
    if (counter) counter->ops += chunk * m * (m - 1);
  }

  const double norm = 1.0 / std::sqrt(static_cast<double>(spec.n));
  for (double& v : x) v *= norm;
  if (counter) counter->ops += spec.n;
}

std::vector<double> fast_hadamard_transform(std::span<const double> x, const HadamardSpec& spec,
                                            OpCounter* counter) {
  std::vector<double> out(x.begin(), x.end());
  fast_hadamard_transform(std::span<double>(out), spec, counter);
  return out;
}

Matrix rotate_matrix_rows(const Matrix& m, const HadamardSpec& spec) {
  if (static_cast<std::size_t>(m.cols()) != spec.n) throw ShapeError("rotate_matrix_rows: column count mismatch");
  Matrix out = m;
  parallel_for(out.rows(), [&](std::int64_t i) {
    fast_hadamard_transform(std::span<double>(out.row(i).data(), spec.n), spec);
  });
  return out;
}

}  // namespace nestquant
