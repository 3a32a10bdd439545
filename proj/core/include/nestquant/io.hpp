#pragma once

#include <filesystem>
#include <iosfwd>

#include "nestquant/codec.hpp"
#include "nestquant/matrix.hpp"

namespace nestquant {

// Dense matrix container, little-endian:
//   "DMAT" | rows u32 | cols u32 | rows·cols f32, row-major.
void write_dmat(std::ostream& os, const Matrix& m);
Matrix read_dmat(std::istream& is);
void write_dmat_file(const std::filesystem::path& path, const Matrix& m);
Matrix read_dmat_file(const std::filesystem::path& path);

// Quantized matrix container, little-endian:
//   "NLQ1" | version u16 = 1 | rows u32 | cols u32 | q u16 | k u8 |
//   strategy u8 (0 = Opt-β, 1 = First-β) | k × β f64 |
//   per row: scale f64 | beta indices (2 bits each, LSB first, when k ≤ 4;
//   otherwise one byte each; padded to a byte) | cols × code u8.
inline constexpr std::uint16_t kNlqVersion = 1;

void write_nlq(std::ostream& os, const QuantizedMatrix& qm);
QuantizedMatrix read_nlq(std::istream& is);
void write_nlq_file(const std::filesystem::path& path, const QuantizedMatrix& qm);
QuantizedMatrix read_nlq_file(const std::filesystem::path& path);

}  // namespace nestquant
