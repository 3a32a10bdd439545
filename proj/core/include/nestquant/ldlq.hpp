#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "nestquant/codec.hpp"
#include "nestquant/matrix.hpp"

namespace nestquant {

/// Second-moment matrix E[x xᵀ] of calibration activations.
struct Hessian {
  Matrix h;
  std::size_t count = 0;
};

/// Streaming accumulation of Σ x xᵀ. Partial accumulators from different
/// workers can be merged; the result only depends on the multiset of inputs
/// up to roundoff.
class HessianAccumulator {
 public:
  explicit HessianAccumulator(std::size_t n);

  void add(std::span<const double> x);
  /// Every row of `batch` is one activation vector.
  void add_batch(const Matrix& batch);
  void merge(const HessianAccumulator& other);

  std::size_t dim() const { return static_cast<std::size_t>(sum_.rows()); }
  std::size_t count() const { return count_; }
  /// Throws std::invalid_argument when nothing was accumulated.
  Hessian finish() const;

 private:
  Matrix sum_;
  std::size_t count_ = 0;
};

Hessian accumulate_hessian(std::span<const Matrix> batches);

/// H = L·D·Lᵀ with L unit lower triangular and D ≥ 0 diagonal.
struct LdlFactors {
  Matrix l;
  Vector d;
};

/// 10⁻⁶·tr(H)/n.
double default_ridge(const Matrix& h);

/// Factors H + ridge·I. Throws NumericalError on a non-positive pivot, with a
/// suggested ridge in the message.
LdlFactors ldl_decompose(const Matrix& h, double ridge);

/// Quantizes `width()` consecutive entries of one row at a time. Calls for
/// different rows may run concurrently.
class RowBlockQuantizer {
 public:
  virtual ~RowBlockQuantizer() = default;
  virtual std::size_t width() const = 0;
  /// Called once with the matrix about to be quantized.
  virtual void begin(const Matrix& target) = 0;
  virtual void quantize(std::size_t row, std::size_t col, std::span<const double> in, std::span<double> out) = 0;
};

/// NestQuant applied to 8-wide pieces. Each row is normalized by √n/‖row‖ of
/// the matrix passed to begin(); codes are collected into a QuantizedMatrix.
class NestQuantRowQuantizer final : public RowBlockQuantizer {
 public:
  explicit NestQuantRowQuantizer(QuantizerConfig cfg);

  std::size_t width() const override { return kBlockDim; }
  void begin(const Matrix& target) override;
  void quantize(std::size_t row, std::size_t col, std::span<const double> in, std::span<double> out) override;

  const QuantizedMatrix& result() const { return result_; }

 private:
  QuantizerConfig cfg_;
  QuantizedMatrix result_;
  std::vector<double> factor_;
};

/// Scalar round-to-nearest on the grid step·ℤ, `width` entries per call.
class RoundToNearestQuantizer final : public RowBlockQuantizer {
 public:
  RoundToNearestQuantizer(double step, std::size_t width);

  std::size_t width() const override { return width_; }
  void begin(const Matrix&) override {}
  void quantize(std::size_t row, std::size_t col, std::span<const double> in, std::span<double> out) override;

 private:
  double step_;
  std::size_t width_;
};

struct LdlqResult {
  Matrix dequantized;  // Û
  Matrix step_error;   // η: quantizer output minus its feedback-corrected input
  LdlFactors factors;  // of the (regularized) Hessian actually used
};

/// Feedback quantization U = Q(W + (W − U)(L − I)), processed in blocks of
/// quantizer.width() columns from the last block to the first. Feedback is
/// taken from already quantized later blocks only.
/// `ridge` defaults to default_ridge(h).
LdlqResult ldlq_quantize(const Matrix& w, const Matrix& h, RowBlockQuantizer& quantizer,
                         std::optional<double> ridge = std::nullopt);

/// Activation quantization noise modelled as N(0, eps2·I).
struct NoiseModel {
  double eps2 = 0.0;
};

/// W̃ = W·H·(H + J)⁻¹.
Matrix qa_target(const Matrix& w, const Matrix& h, const Matrix& j);

/// LDLQ of W̃ = W·H·(H + ε²I)⁻¹ against H + ε²I. With ε² = 0 this is exactly
/// ldlq_quantize(w, h, …).
LdlqResult qa_ldlq_quantize(const Matrix& w, const Matrix& h, NoiseModel noise, RowBlockQuantizer& quantizer,
                            std::optional<double> ridge = std::nullopt);
/// General noise covariance J.
LdlqResult qa_ldlq_quantize(const Matrix& w, const Matrix& h, const Matrix& j, RowBlockQuantizer& quantizer,
                            std::optional<double> ridge = std::nullopt);

/// ε² = per-coordinate MSE of the NestQuant codec on the sample rows.
NoiseModel estimate_noise(const Matrix& activations, const QuantizerConfig& cfg);

/// α(W, Z)/α(W, X) with α(W, V) = E‖WV‖ / E‖V‖, X the rows of `activations`
/// (zero rows skipped) and Z standard Gaussian (`gaussian_samples` draws).
double amplification_ratio(const Matrix& w, const Matrix& activations, std::size_t gaussian_samples,
                           std::uint64_t seed);

/// tr((W − U) H (W − U)ᵀ).
double proxy_loss(const Matrix& w, const Matrix& u, const Matrix& h);
/// E‖WX − U(X + Z)‖² = tr((W − U)H(W − U)ᵀ) + tr(U J Uᵀ).
double noisy_loss(const Matrix& w, const Matrix& u, const Matrix& h, const Matrix& j);
/// tr((W̃ − U)(H + J)(W̃ − U)ᵀ).
double qa_surrogate(const Matrix& w, const Matrix& u, const Matrix& h, const Matrix& j);
/// tr(W(H − H(H + J)⁻¹H)Wᵀ), the U-independent remainder.
double qa_bias(const Matrix& w, const Matrix& h, const Matrix& j);

}  // namespace nestquant
