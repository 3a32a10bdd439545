#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nestquant/matrix.hpp"

namespace nestquant {

/// Small ±1 Hadamard matrices kept by the library: sizes 1, 2, 4 (Sylvester)
/// and 12, 20 (Paley type I from the primes 11 and 19).
std::span<const int> stored_hadamard_sizes();
const Matrix& stored_hadamard(int m);

/// Factorization n = m·2^k of a rotation H = H₁ ⊗ H₂, H₁ stored of size m and
/// H₂ the Sylvester matrix of size 2^k.
struct HadamardSpec {
  std::size_t n = 1;
  int m = 1;
  int log2_sylvester = 0;

  /// Picks m = 1 when n is a power of two, otherwise the first stored size
  /// (12, then 20) leaving a power-of-two cofactor. Throws
  /// std::invalid_argument when no stored factor fits.
  static HadamardSpec for_dimension(std::size_t n);
  /// Explicit factorization; m must be a stored size.
  static HadamardSpec make(int m, int log2_sylvester);
};

/// Unnormalized ±1 matrix H₁ ⊗ H₂.
Matrix hadamard_matrix(const HadamardSpec& spec);

/// Counts additions and multiplications performed by the fast transform.
struct OpCounter {
  std::uint64_t ops = 0;
};

/// (H/√n)·x in O(n log₂(n/m) + n·m) operations. Orthonormal.
void fast_hadamard_transform(std::span<double> x, const HadamardSpec& spec, OpCounter* counter = nullptr);
std::vector<double> fast_hadamard_transform(std::span<const double> x, const HadamardSpec& spec,
                                            OpCounter* counter = nullptr);

/// Applies the transform to every row: M·(H/√n)ᵀ.
Matrix rotate_matrix_rows(const Matrix& m, const HadamardSpec& spec);

}  // namespace nestquant
