#include "nestquant/codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "nestquant/error.hpp"
#include "nestquant/parallel.hpp"

namespace nestquant {

void QuantizerConfig::validate() const {
  validate_nesting_ratio(q);
  if (betas.empty() || betas.size() > 255) {
    throw std::invalid_argument("quantizer config: need 1..255 betas, got " + std::to_string(betas.size()));
  }
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!std::isfinite(betas[i]) || betas[i] <= 0.0) {
      throw std::invalid_argument("quantizer config: betas must be positive and finite");
    }
    if (i > 0 && betas[i] <= betas[i - 1]) {
      throw std::invalid_argument("quantizer config: betas must be strictly increasing");
    }
  }
}

namespace {

Vec8 load_block(std::span<const double> src, std::size_t block, double factor) {
  Vec8 v{};
  for (std::size_t i = 0; i < kBlockDim; ++i) v[i] = src[block * kBlockDim + i] * factor;
  return v;
}

void require_row_length(std::size_t n) {
  if (n == 0 || n % kBlockDim != 0) {
    throw std::invalid_argument("row length must be a positive multiple of 8, got " + std::to_string(n));
  }
}

}  // namespace

BlockCode quantize_block(const Vec8& v, const QuantizerConfig& cfg) {
  BlockCode best;
  best.squared_error = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < cfg.betas.size(); ++p) {
    const double beta = cfg.betas[p];
    Vec8 scaled{};
    for (std::size_t i = 0; i < kBlockDim; ++i) scaled[i] = v[i] / beta;
    const VoronoiResult r = quantize_voronoi(scaled, cfg.q);
    Vec8 recon{};
    for (std::size_t i = 0; i < kBlockDim; ++i) recon[i] = r.reconstruction.coords[i] * beta;
    const double err = squared_distance(recon, v);

    if (cfg.strategy == Strategy::FirstBeta) {
      const bool last = p + 1 == cfg.betas.size();
      if (!r.overload || last) {
        return BlockCode{r.code, static_cast<std::uint8_t>(p), recon, err};
      }
      continue;
    }
    if (err < best.squared_error) {
      best = BlockCode{r.code, static_cast<std::uint8_t>(p), recon, err};
    }
  }
  return best;
}

Vec8 dequantize_block(const VoronoiCode& code, std::uint8_t beta_index, const QuantizerConfig& cfg) {
  if (beta_index >= cfg.betas.size()) throw std::invalid_argument("beta index out of range");
  const LatticePoint8 p = decode(code);
  Vec8 out{};
  for (std::size_t i = 0; i < kBlockDim; ++i) out[i] = p.coords[i] * cfg.betas[beta_index];
  return out;
}

QuantizedVector quantize_row(std::span<const double> row, const QuantizerConfig& cfg) {
  require_row_length(row.size());
  const std::size_t n = row.size();
  const std::size_t blocks = n / kBlockDim;

  double norm2 = 0.0;
  for (double v : row) {
    if (!std::isfinite(v)) throw std::invalid_argument("quantize_row: non-finite entry");
    norm2 += v * v;
  }
  QuantizedVector qv;
  qv.codes.assign(n, 0);
  qv.beta_index.assign(blocks, 0);
  qv.scale = std::sqrt(norm2);
  if (qv.scale == 0.0) return qv;

  const double factor = std::sqrt(static_cast<double>(n)) / qv.scale;
  for (std::size_t j = 0; j < blocks; ++j) {
    const BlockCode bc = quantize_block(load_block(row, j, factor), cfg);
    std::copy(bc.code.residues.begin(), bc.code.residues.end(), qv.codes.begin() + j * kBlockDim);
    qv.beta_index[j] = bc.beta_index;
  }
  return qv;
}

namespace {

void check_vector(const QuantizedVector& qv, const QuantizerConfig& cfg) {
  if (qv.codes.size() != qv.beta_index.size() * kBlockDim || qv.codes.empty()) {
    throw ShapeError("quantized vector: codes/beta index length mismatch");
  }
  for (std::uint8_t c : qv.codes) {
    if (c >= cfg.q) throw ShapeError("quantized vector: residue outside [0, q)");
  }
  for (std::uint8_t b : qv.beta_index) {
    if (b >= cfg.betas.size()) throw ShapeError("quantized vector: beta index outside [0, k)");
  }
}

Vec8 decode_block(const QuantizedVector& qv, std::size_t j, const QuantizerConfig& cfg) {
  VoronoiCode code;
  code.q = cfg.q;
  std::copy_n(qv.codes.begin() + j * kBlockDim, kBlockDim, code.residues.begin());
  return dequantize_block(code, qv.beta_index[j], cfg);
}

}  // namespace

std::vector<double> decode_normalized(const QuantizedVector& qv, const QuantizerConfig& cfg) {
  check_vector(qv, cfg);
  std::vector<double> out(qv.size(), 0.0);
  if (qv.scale == 0.0) return out;
  for (std::size_t j = 0; j < qv.blocks(); ++j) {
    const Vec8 b = decode_block(qv, j, cfg);
    std::copy(b.begin(), b.end(), out.begin() + j * kBlockDim);
  }
  return out;
}

std::vector<double> dequantize_row(const QuantizedVector& qv, const QuantizerConfig& cfg) {
  std::vector<double> out = decode_normalized(qv, cfg);
  const double factor = qv.scale / std::sqrt(static_cast<double>(qv.size()));
  for (double& v : out) v *= factor;
  return out;
}

double quantized_dot(const QuantizedVector& a, const QuantizedVector& b, const QuantizerConfig& cfg) {
  check_vector(a, cfg);
  check_vector(b, cfg);
  if (a.size() != b.size()) throw ShapeError("quantized_dot: length mismatch");
  if (a.scale == 0.0 || b.scale == 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < a.blocks(); ++j) {
    VoronoiCode ca, cb;
    ca.q = cb.q = cfg.q;
    std::copy_n(a.codes.begin() + j * kBlockDim, kBlockDim, ca.residues.begin());
    std::copy_n(b.codes.begin() + j * kBlockDim, kBlockDim, cb.residues.begin());
    const Vec8 pa = decode(ca).coords;
    const Vec8 pb = decode(cb).coords;
    double dot = 0.0;
    for (std::size_t i = 0; i < kBlockDim; ++i) dot += pa[i] * pb[i];
    acc += dot * cfg.betas[a.beta_index[j]] * cfg.betas[b.beta_index[j]];
  }
  return acc * (a.scale * b.scale / static_cast<double>(a.size()));
}

QuantizedMatrix quantize_matrix(const Matrix& m, const QuantizerConfig& cfg) {
  cfg.validate();
  require_row_length(static_cast<std::size_t>(m.cols()));
  QuantizedMatrix qm;
  qm.rows = static_cast<std::size_t>(m.rows());
  qm.cols = static_cast<std::size_t>(m.cols());
  qm.config = cfg;
  qm.data.resize(qm.rows);
  parallel_for(static_cast<std::int64_t>(qm.rows), [&](std::int64_t i) {
    qm.data[i] = quantize_row(std::span<const double>(m.row(i).data(), qm.cols), cfg);
  });
  return qm;
}

namespace {

Matrix decode_all_normalized(const QuantizedMatrix& qm) {
  Matrix out(qm.rows, qm.cols);
  parallel_for(static_cast<std::int64_t>(qm.rows), [&](std::int64_t i) {
    const std::vector<double> r = decode_normalized(qm.data[i], qm.config);
    std::copy(r.begin(), r.end(), out.row(i).data());
  });
  return out;
}

void check_matrix(const QuantizedMatrix& qm) {
  qm.config.validate();
  if (qm.data.size() != qm.rows) throw ShapeError("quantized matrix: row count mismatch");
  for (const QuantizedVector& r : qm.data) {
    if (r.size() != qm.cols) throw ShapeError("quantized matrix: row length mismatch");
  }
}

}  // namespace

Matrix dequantize_matrix(const QuantizedMatrix& qm) {
  check_matrix(qm);
  Matrix out = decode_all_normalized(qm);
  const double root_n = std::sqrt(static_cast<double>(qm.cols));
  for (std::size_t i = 0; i < qm.rows; ++i) out.row(i) *= qm.data[i].scale / root_n;
  return out;
}

Matrix quantized_matmul(const QuantizedMatrix& a, const QuantizedMatrix& b) {
  check_matrix(a);
  check_matrix(b);
  if (a.cols != b.cols) throw ShapeError("quantized_matmul: inner dimensions differ");
  if (!(a.config == b.config)) throw ShapeError("quantized_matmul: quantizer configs differ");

  const Matrix ra = decode_all_normalized(a);
  const Matrix rb = decode_all_normalized(b);
  Matrix out(a.rows, b.rows);
  const double inv_n = 1.0 / static_cast<double>(a.cols);

  // Fixed 64-row panels keep the GEMM blocking (and thus rounding) identical
  // for any number of threads.
  const ChunkPlan plan{a.rows, 64};
  parallel_for(static_cast<std::int64_t>(plan.count()), [&](std::int64_t c) {
    const auto begin = static_cast<Eigen::Index>(plan.begin(c));
    const auto len = static_cast<Eigen::Index>(plan.end(c) - plan.begin(c));
    out.middleRows(begin, len).noalias() = ra.middleRows(begin, len) * rb.transpose();
    for (Eigen::Index i = begin; i < begin + len; ++i) {
      const double si = a.data[i].scale;
      for (std::size_t j = 0; j < b.rows; ++j) out(i, j) *= si * b.data[j].scale * inv_n;
    }
  });
  return out;
}

std::vector<double> beta_usage(const QuantizedMatrix& qm) {
  std::vector<double> counts(qm.config.k(), 0.0);
  double total = 0.0;
  for (const QuantizedVector& r : qm.data) {
    for (std::uint8_t b : r.beta_index) {
      counts.at(b) += 1.0;
      total += 1.0;
    }
  }
  if (total > 0.0) {
    for (double& c : counts) c /= total;
  }
  return counts;
}

EffectiveRate effective_rate(const QuantizerConfig& cfg, std::span<const double> usage) {
  cfg.validate();
  if (usage.empty()) throw std::invalid_argument("effective_rate: empty beta usage histogram");
  double sum = 0.0;
  double entropy = 0.0;
  for (double p : usage) {
    if (!(p >= 0.0)) throw std::invalid_argument("effective_rate: negative probability");
    sum += p;
    if (p > 0.0) entropy -= p * std::log2(p);
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("effective_rate: histogram must sum to 1");
  const double base = std::log2(static_cast<double>(cfg.q));
  const double d = static_cast<double>(kBlockDim);
  return EffectiveRate{base + std::log2(static_cast<double>(cfg.k())) / d, base + entropy / d};
}

std::vector<double> uniform_quantize_row(std::span<const double> row, int bits) {
  if (bits < 1 || bits > 30) throw std::invalid_argument("uniform_quantize_row: bits must be in [1, 30]");
  double peak = 0.0;
  for (double v : row) peak = std::max(peak, std::abs(v));
  std::vector<double> out(row.size(), 0.0);
  if (peak == 0.0) return out;
  const double steps = std::ldexp(1.0, bits) - 1.0;  // number of intervals
  for (std::size_t i = 0; i < row.size(); ++i) {
    const double t = (row[i] / peak + 1.0) * 0.5 * steps;
    const double idx = std::clamp(std::round(t), 0.0, steps);
    out[i] = (-1.0 + 2.0 * idx / steps) * peak;
  }
  return out;
}

}  // namespace nestquant
