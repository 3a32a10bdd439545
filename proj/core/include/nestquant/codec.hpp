#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nestquant/matrix.hpp"
#include "nestquant/voronoi.hpp"

namespace nestquant {

inline constexpr std::size_t kBlockDim = 8;

enum class Strategy : std::uint8_t {
  OptBeta = 0,    // minimum reconstruction error over all scales
  FirstBeta = 1,  // smallest scale that does not overload
};

/// Multi-scale Voronoi codebook: the union of β·(E8 ∩ q·V) over the betas.
/// Betas are absolute scales applied to the row-normalized signal, whose
/// entries have unit mean square.
struct QuantizerConfig {
  int q = 16;
  std::vector<double> betas;
  Strategy strategy = Strategy::OptBeta;

  std::size_t k() const { return betas.size(); }
  /// Throws std::invalid_argument unless 2 ≤ q ≤ 256, 1 ≤ k ≤ 255 and the
  /// betas are positive, finite and strictly increasing.
  void validate() const;

  friend bool operator==(const QuantizerConfig&, const QuantizerConfig&) = default;
};

/// One 8-block quantized against the union codebook.
struct BlockCode {
  VoronoiCode code;
  std::uint8_t beta_index = 0;  // 0-based into QuantizerConfig::betas
  Vec8 reconstruction{};        // decode(code) · β
  double squared_error = 0.0;
};

BlockCode quantize_block(const Vec8& v, const QuantizerConfig& cfg);
Vec8 dequantize_block(const VoronoiCode& code, std::uint8_t beta_index, const QuantizerConfig& cfg);

/// A row of length n = 8b. `scale` is the L2 norm of the original row; a zero
/// row is stored with scale 0 and all-zero codes.
struct QuantizedVector {
  std::vector<std::uint8_t> codes;       // n residues in [0, q)
  std::vector<std::uint8_t> beta_index;  // b indices in [0, k)
  double scale = 0.0;

  std::size_t size() const { return codes.size(); }
  std::size_t blocks() const { return beta_index.size(); }

  friend bool operator==(const QuantizedVector&, const QuantizedVector&) = default;
};

QuantizedVector quantize_row(std::span<const double> row, const QuantizerConfig& cfg);

/// Reconstruction of the unit-mean-square signal, i.e. without the s/√n factor.
std::vector<double> decode_normalized(const QuantizedVector& qv, const QuantizerConfig& cfg);
std::vector<double> dequantize_row(const QuantizedVector& qv, const QuantizerConfig& cfg);

/// Inner product computed block by block from the codes, rescaled by s₁s₂/n.
double quantized_dot(const QuantizedVector& a, const QuantizedVector& b, const QuantizerConfig& cfg);

struct QuantizedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  QuantizerConfig config;
  std::vector<QuantizedVector> data;

  friend bool operator==(const QuantizedMatrix&, const QuantizedMatrix&) = default;
};

/// Quantizes every row independently (in parallel; output is independent of
/// the thread count).
QuantizedMatrix quantize_matrix(const Matrix& m, const QuantizerConfig& cfg);
Matrix dequantize_matrix(const QuantizedMatrix& qm);

/// A·Bᵀ from two quantized operands sharing a configuration. A is r×n, B is
/// m×n; the result is r×m.
Matrix quantized_matmul(const QuantizedMatrix& a, const QuantizedMatrix& b);

/// Fraction of blocks that selected each beta.
std::vector<double> beta_usage(const QuantizedMatrix& qm);

struct EffectiveRate {
  double fixed_bits = 0.0;    // log₂q + log₂(k)/8
  double entropy_bits = 0.0;  // log₂q + H(β usage)/8
};

EffectiveRate effective_rate(const QuantizerConfig& cfg, std::span<const double> usage);

/// Baseline: scale by ‖row‖∞ into [-1, 1], round to the 2^bits-level uniform
/// grid {-1 + 2i/(2^bits - 1)} and scale back.
std::vector<double> uniform_quantize_row(std::span<const double> row, int bits);

}  // namespace nestquant
