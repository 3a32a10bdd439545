#include "nestquant/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "nestquant/error.hpp"

namespace nestquant {

namespace {

template <typename T>
void put_le(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw IoError("unexpected end of file");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

void put_f64(std::ostream& os, double v) { put_le(os, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& is) { return std::bit_cast<double>(get_le<std::uint64_t>(is)); }

void expect_magic(std::istream& is, const char (&magic)[5]) {
  char got[4];
  if (!is.read(got, 4)) throw IoError("unexpected end of file reading magic");
  if (std::memcmp(got, magic, 4) != 0) throw IoError(std::string("bad magic, expected ") + magic);
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) throw ShapeError(std::string(what) + " exceeds u32");
  return static_cast<std::uint32_t>(v);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path.string());
  return is;
}

}  // namespace

void write_dmat(std::ostream& os, const Matrix& m) {
  os.write("DMAT", 4);
  put_le(os, checked_u32(static_cast<std::size_t>(m.rows()), "rows"));
  put_le(os, checked_u32(static_cast<std::size_t>(m.cols()), "cols"));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_le(os, std::bit_cast<std::uint32_t>(static_cast<float>(m(i, j))));
  }
  if (!os) throw IoError("write failed");
}

Matrix read_dmat(std::istream& is) {
  expect_magic(is, "DMAT");
  const auto rows = get_le<std::uint32_t>(is);
  const auto cols = get_le<std::uint32_t>(is);
  Matrix m(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t j = 0; j < cols; ++j) {
      const float v = std::bit_cast<float>(get_le<std::uint32_t>(is));
      if (!std::isfinite(v)) throw IoError("DMAT: non-finite entry");
      m(i, j) = v;
    }
  }
  return m;
}

void write_dmat_file(const std::filesystem::path& path, const Matrix& m) {
  auto os = open_out(path);
  write_dmat(os, m);
}

Matrix read_dmat_file(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_dmat(is);
}

void write_nlq(std::ostream& os, const QuantizedMatrix& qm) {
  qm.config.validate();
  if (qm.data.size() != qm.rows) throw ShapeError("write_nlq: row count mismatch");
  const std::size_t k = qm.config.k();
  os.write("NLQ1", 4);
  put_le(os, kNlqVersion);
  put_le(os, checked_u32(qm.rows, "rows"));
  put_le(os, checked_u32(qm.cols, "cols"));
  put_le(os, static_cast<std::uint16_t>(qm.config.q));
  put_le(os, static_cast<std::uint8_t>(k));
  put_le(os, static_cast<std::uint8_t>(qm.config.strategy));
  for (double b : qm.config.betas) put_f64(os, b);

  const std::size_t blocks = qm.cols / kBlockDim;
  for (const QuantizedVector& row : qm.data) {
    if (row.size() != qm.cols || row.blocks() != blocks) throw ShapeError("write_nlq: row length mismatch");
    put_f64(os, row.scale);
    if (k <= 4) {
      std::vector<std::uint8_t> packed((blocks + 3) / 4, 0);
      for (std::size_t j = 0; j < blocks; ++j) {
        packed[j / 4] |= static_cast<std::uint8_t>((row.beta_index[j] & 0x3) << (2 * (j % 4)));
      }
      os.write(reinterpret_cast<const char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
    } else {
      os.write(reinterpret_cast<const char*>(row.beta_index.data()), static_cast<std::streamsize>(blocks));
    }
    os.write(reinterpret_cast<const char*>(row.codes.data()), static_cast<std::streamsize>(row.codes.size()));
  }
  if (!os) throw IoError("write failed");
}

QuantizedMatrix read_nlq(std::istream& is) {
  expect_magic(is, "NLQ1");
  const auto version = get_le<std::uint16_t>(is);
  if (version != kNlqVersion) throw IoError("NLQ1: unsupported version " + std::to_string(version));
  QuantizedMatrix qm;
  qm.rows = get_le<std::uint32_t>(is);
  qm.cols = get_le<std::uint32_t>(is);
  qm.config.q = get_le<std::uint16_t>(is);
  const std::size_t k = get_le<std::uint8_t>(is);
  const auto strategy = get_le<std::uint8_t>(is);
  if (strategy > 1) throw IoError("NLQ1: unknown strategy " + std::to_string(strategy));
  qm.config.strategy = static_cast<Strategy>(strategy);
  for (std::size_t i = 0; i < k; ++i) qm.config.betas.push_back(get_f64(is));
  try {
    qm.config.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("NLQ1: invalid quantizer config: ") + e.what());
  }
  if (qm.cols % kBlockDim != 0) throw IoError("NLQ1: column count is not a multiple of 8");

  const std::size_t blocks = qm.cols / kBlockDim;
  qm.data.resize(qm.rows);
  std::vector<std::uint8_t> packed((blocks + 3) / 4);
  for (QuantizedVector& row : qm.data) {
    row.scale = get_f64(is);
    if (!std::isfinite(row.scale) || row.scale < 0.0) throw IoError("NLQ1: invalid row scale");
    row.beta_index.assign(blocks, 0);
    if (k <= 4) {
      if (!is.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()))) {
        throw IoError("unexpected end of file");
      }
      for (std::size_t j = 0; j < blocks; ++j) row.beta_index[j] = (packed[j / 4] >> (2 * (j % 4))) & 0x3;
    } else if (!is.read(reinterpret_cast<char*>(row.beta_index.data()), static_cast<std::streamsize>(blocks))) {
      throw IoError("unexpected end of file");
    }
    row.codes.resize(qm.cols);
    if (!is.read(reinterpret_cast<char*>(row.codes.data()), static_cast<std::streamsize>(qm.cols))) {
      throw IoError("unexpected end of file");
    }
    for (std::uint8_t b : row.beta_index) {
      if (b >= k) throw IoError("NLQ1: beta index out of range");
    }
    for (std::uint8_t c : row.codes) {
      if (c >= qm.config.q) throw IoError("NLQ1: residue out of range");
    }
  }
  return qm;
}

void write_nlq_file(const std::filesystem::path& path, const QuantizedMatrix& qm) {
  auto os = open_out(path);
  write_nlq(os, qm);
}

QuantizedMatrix read_nlq_file(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_nlq(is);
}

}  // namespace nestquant
