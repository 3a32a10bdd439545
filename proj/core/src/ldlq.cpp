#include "nestquant/ldlq.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nestquant/error.hpp"
#include "nestquant/parallel.hpp"
#include "nestquant/random.hpp"

namespace nestquant {

HessianAccumulator::HessianAccumulator(std::size_t n) : sum_(Matrix::Zero(n, n)) {
  if (n == 0) throw std::invalid_argument("HessianAccumulator: dimension must be positive");
}

void HessianAccumulator::add(std::span<const double> x) {
  if (x.size() != dim()) throw ShapeError("HessianAccumulator: vector length mismatch");
  const Eigen::Map<const Vector> v(x.data(), static_cast<Eigen::Index>(x.size()));
  sum_.selfadjointView<Eigen::Lower>().rankUpdate(v);
  ++count_;
}

void HessianAccumulator::add_batch(const Matrix& batch) {
  if (static_cast<std::size_t>(batch.cols()) != dim()) throw ShapeError("HessianAccumulator: batch width mismatch");
  sum_.selfadjointView<Eigen::Lower>().rankUpdate(batch.transpose());
  count_ += static_cast<std::size_t>(batch.rows());
}

void HessianAccumulator::merge(const HessianAccumulator& other) {
  if (other.dim() != dim()) throw ShapeError("HessianAccumulator: merge dimension mismatch");
  sum_ += other.sum_;
  count_ += other.count_;
}

Hessian HessianAccumulator::finish() const {
  if (count_ == 0) throw std::invalid_argument("HessianAccumulator: no samples");
  Hessian out;
  out.h = sum_.selfadjointView<Eigen::Lower>();
  out.h /= static_cast<double>(count_);
  out.count = count_;
  return out;
}

Hessian accumulate_hessian(std::span<const Matrix> batches) {
  if (batches.empty()) throw std::invalid_argument("accumulate_hessian: no batches");
  HessianAccumulator acc(static_cast<std::size_t>(batches.front().cols()));
  for (const Matrix& b : batches) acc.add_batch(b);
  return acc.finish();
}

double default_ridge(const Matrix& h) {
  if (h.rows() == 0) return 0.0;
  return 1e-6 * h.trace() / static_cast<double>(h.rows());
}

LdlFactors ldl_decompose(const Matrix& h, double ridge) {
  if (h.rows() != h.cols() || h.rows() == 0) throw ShapeError("ldl_decompose: matrix must be square");
  if (!(ridge >= 0.0)) throw std::invalid_argument("ldl_decompose: ridge must be >= 0");
  const Eigen::Index n = h.rows();
  const double scale = std::max(h.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  LdlFactors f{Matrix::Identity(n, n), Vector::Zero(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    double dj = h(j, j) + ridge;
    for (Eigen::Index k = 0; k < j; ++k) dj -= f.l(j, k) * f.l(j, k) * f.d(k);
    if (!(dj > 1e-14 * scale)) {
      std::ostringstream msg;
      msg << "ldl_decompose: non-positive pivot " << dj << " at index " << j << "; retry with ridge >= "
          << std::max(10.0 * ridge, 1e-4 * h.trace() / static_cast<double>(n));
      throw NumericalError(msg.str());
    }
    f.d(j) = dj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = 0.5 * (h(i, j) + h(j, i));
      for (Eigen::Index k = 0; k < j; ++k) v -= f.l(i, k) * f.l(j, k) * f.d(k);
      f.l(i, j) = v / dj;
    }
  }
  return f;
}

NestQuantRowQuantizer::NestQuantRowQuantizer(QuantizerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

void NestQuantRowQuantizer::begin(const Matrix& target) {
  const auto rows = static_cast<std::size_t>(target.rows());
  const auto cols = static_cast<std::size_t>(target.cols());
  if (cols == 0 || cols % kBlockDim != 0) throw ShapeError("NestQuantRowQuantizer: width must be a multiple of 8");
  result_ = QuantizedMatrix{rows, cols, cfg_, {}};
  result_.data.resize(rows);
  factor_.assign(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    QuantizedVector& qv = result_.data[i];
    qv.codes.assign(cols, 0);
    qv.beta_index.assign(cols / kBlockDim, 0);
    qv.scale = target.row(static_cast<Eigen::Index>(i)).norm();
    if (qv.scale > 0.0) factor_[i] = std::sqrt(static_cast<double>(cols)) / qv.scale;
  }
}

void NestQuantRowQuantizer::quantize(std::size_t row, std::size_t col, std::span<const double> in,
                                     std::span<double> out) {
  if (in.size() != kBlockDim || out.size() != kBlockDim || col % kBlockDim != 0) {
    throw ShapeError("NestQuantRowQuantizer: expects aligned 8-wide pieces");
  }
  const double f = factor_.at(row);
  if (f == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  Vec8 v{};
  for (std::size_t i = 0; i < kBlockDim; ++i) v[i] = in[i] * f;
  const BlockCode bc = quantize_block(v, cfg_);
  QuantizedVector& qv = result_.data[row];
  std::copy(bc.code.residues.begin(), bc.code.residues.end(), qv.codes.begin() + col);
  qv.beta_index[col / kBlockDim] = bc.beta_index;
  for (std::size_t i = 0; i < kBlockDim; ++i) out[i] = bc.reconstruction[i] / f;
}

RoundToNearestQuantizer::RoundToNearestQuantizer(double step, std::size_t width) : step_(step), width_(width) {
  if (!(step > 0.0) || width == 0) throw std::invalid_argument("RoundToNearestQuantizer: need step > 0, width > 0");
}

void RoundToNearestQuantizer::quantize(std::size_t, std::size_t, std::span<const double> in, std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = step_ * std::round(in[i] / step_);
}

LdlqResult ldlq_quantize(const Matrix& w, const Matrix& h, RowBlockQuantizer& quantizer, std::optional<double> ridge) {
  const Eigen::Index n = w.cols();
  const Eigen::Index a = w.rows();
  if (h.rows() != n || h.cols() != n) throw ShapeError("ldlq_quantize: Hessian does not match weight width");
  const auto width = static_cast<Eigen::Index>(quantizer.width());
  if (n == 0 || n % width != 0) throw ShapeError("ldlq_quantize: width must divide the column count");

  LdlqResult res;
  res.factors = ldl_decompose(h, ridge.value_or(default_ridge(h)));
  res.dequantized = Matrix::Zero(a, n);
  res.step_error = Matrix::Zero(a, n);
  Matrix residual = Matrix::Zero(a, n);  // W − U on processed columns
  const Matrix& l = res.factors.l;

  quantizer.begin(w);
  for (Eigen::Index c0 = n - width; c0 >= 0; c0 -= width) {
    const Eigen::Index later = n - (c0 + width);
    Matrix target = w.middleCols(c0, width);
    if (later > 0) {
      target.noalias() += residual.rightCols(later) * l.block(c0 + width, c0, later, width);
    }
    parallel_for(a, [&](std::int64_t i) {
      std::span<const double> in(target.row(i).data(), static_cast<std::size_t>(width));
      std::vector<double> out(static_cast<std::size_t>(width));
      quantizer.quantize(static_cast<std::size_t>(i), static_cast<std::size_t>(c0), in, out);
      for (Eigen::Index t = 0; t < width; ++t) {
        res.dequantized(i, c0 + t) = out[t];
        res.step_error(i, c0 + t) = out[t] - target(i, t);
        residual(i, c0 + t) = w(i, c0 + t) - out[t];
      }
    });
  }
  return res;
}

Matrix qa_target(const Matrix& w, const Matrix& h, const Matrix& j) {
  const Matrix hj = h + j;
  Eigen::LLT<Eigen::MatrixXd> llt(hj);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("qa_target: H + J is not positive definite; add a ridge to H");
  }
  // (H+J) is symmetric, so W̃ᵀ = (H+J)⁻¹·H·Wᵀ.
  const Eigen::MatrixXd rhs = h * w.transpose();
  return llt.solve(rhs).transpose();
}

LdlqResult qa_ldlq_quantize(const Matrix& w, const Matrix& h, NoiseModel noise, RowBlockQuantizer& quantizer,
                            std::optional<double> ridge) {
  if (!(noise.eps2 >= 0.0)) throw std::invalid_argument("qa_ldlq_quantize: eps2 must be >= 0");
  if (noise.eps2 == 0.0) return ldlq_quantize(w, h, quantizer, ridge);
  const Matrix j = noise.eps2 * Matrix::Identity(h.rows(), h.cols());
  return qa_ldlq_quantize(w, h, j, quantizer, ridge);
}

LdlqResult qa_ldlq_quantize(const Matrix& w, const Matrix& h, const Matrix& j, RowBlockQuantizer& quantizer,
                            std::optional<double> ridge) {
  if (h.rows() != w.cols() || j.rows() != h.rows() || j.cols() != h.cols()) {
    throw ShapeError("qa_ldlq_quantize: dimension mismatch");
  }
  const Matrix hj = h + j;
  return ldlq_quantize(qa_target(w, h, j), hj, quantizer, ridge);
}

NoiseModel estimate_noise(const Matrix& activations, const QuantizerConfig& cfg) {
  if (activations.rows() == 0) throw std::invalid_argument("estimate_noise: empty sample");
  const Matrix rec = dequantize_matrix(quantize_matrix(activations, cfg));
  return NoiseModel{(activations - rec).squaredNorm() / static_cast<double>(activations.size())};
}

double amplification_ratio(const Matrix& w, const Matrix& activations, std::size_t gaussian_samples,
                           std::uint64_t seed) {
  if (activations.cols() != w.cols()) throw ShapeError("amplification_ratio: sample length mismatch");
  if (gaussian_samples == 0) throw std::invalid_argument("amplification_ratio: need Gaussian samples");
  double out_x = 0.0, in_x = 0.0;
  std::size_t used = 0;
  for (Eigen::Index i = 0; i < activations.rows(); ++i) {
    const double nx = activations.row(i).norm();
    if (nx == 0.0) continue;
    in_x += nx;
    out_x += (w * activations.row(i).transpose()).norm();
    ++used;
  }
  if (used == 0) throw std::invalid_argument("amplification_ratio: all samples have zero norm");

  Rng rng = make_stream(seed, 0);
  std::normal_distribution<double> normal;
  Vector z(w.cols());
  double out_z = 0.0, in_z = 0.0;
  for (std::size_t s = 0; s < gaussian_samples; ++s) {
    for (Eigen::Index t = 0; t < z.size(); ++t) z(t) = normal(rng);
    in_z += z.norm();
    out_z += (w * z).norm();
  }
  const double alpha_x = out_x / in_x;
  const double alpha_z = out_z / in_z;
  return alpha_z / alpha_x;
}

double proxy_loss(const Matrix& w, const Matrix& u, const Matrix& h) {
  const Matrix e = w - u;
  return (e * h * e.transpose()).trace();
}

double noisy_loss(const Matrix& w, const Matrix& u, const Matrix& h, const Matrix& j) {
  return proxy_loss(w, u, h) + (u * j * u.transpose()).trace();
}

double qa_surrogate(const Matrix& w, const Matrix& u, const Matrix& h, const Matrix& j) {
  const Matrix e = qa_target(w, h, j) - u;
  return (e * (h + j) * e.transpose()).trace();
}

double qa_bias(const Matrix& w, const Matrix& h, const Matrix& j) {
  const Matrix hj = h + j;
  Eigen::LLT<Eigen::MatrixXd> llt(hj);
  if (llt.info() != Eigen::Success) throw NumericalError("qa_bias: H + J is not positive definite");
  const Eigen::MatrixXd hh = h;
  const Matrix inner = h - h * llt.solve(hh);
  return (w * inner * w.transpose()).trace();
}

}  // namespace nestquant
