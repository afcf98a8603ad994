#pragma once

#include <filesystem>
#include <iosfwd>

#include "qctc/numeric/tensor.hpp"

// Binary matrix file: 16-byte header ("QCTC", u32 rows, u32 cols,
// u32 reserved = 0), then rows*cols little-endian float32 in row-major order.
// Values are widened to double on load.
namespace qctc::matrix_io {

inline constexpr char kMagic[4] = {'Q', 'C', 'T', 'C'};
inline constexpr std::size_t kHeaderBytes = 16;

void write(std::ostream& out, const Tensor& t);
Tensor read(std::istream& in);

void save(const std::filesystem::path& path, const Tensor& t);
Tensor load(const std::filesystem::path& path);

}  // namespace qctc::matrix_io
