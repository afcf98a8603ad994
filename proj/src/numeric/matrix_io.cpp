#include "qctc/numeric/matrix_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

namespace qctc::matrix_io {

namespace {

static_assert(std::numeric_limits<float>::is_iec559, "float32 must be IEEE-754");

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> bytes = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                     static_cast<char>((v >> 16) & 0xFF),
                                     static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes.data(), 4);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write(std::ostream& out, const Tensor& t) {
  if (t.rows() > std::numeric_limits<std::uint32_t>::max() ||
      t.cols() > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("matrix too large for the binary format");
  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(t.rows()));
  put_u32(out, static_cast<std::uint32_t>(t.cols()));
  put_u32(out, 0);
  for (double v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  if (!out) throw std::runtime_error("failed to write matrix");
}

Tensor read(std::istream& in) {
  std::array<unsigned char, kHeaderBytes> header{};
  in.read(reinterpret_cast<char*>(header.data()), kHeaderBytes);
  if (in.gcount() != static_cast<std::streamsize>(kHeaderBytes))
    throw std::runtime_error("truncated matrix header");
  if (std::memcmp(header.data(), kMagic, 4) != 0) throw std::runtime_error("bad matrix magic");
  const std::uint32_t rows = get_u32(header.data() + 4);
  const std::uint32_t cols = get_u32(header.data() + 8);
  const std::size_t count = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> raw(count * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw std::runtime_error("truncated matrix payload");
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i)
    data[i] = static_cast<double>(std::bit_cast<float>(get_u32(raw.data() + 4 * i)));
  return Tensor(rows, cols, std::move(data));
}

void save(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write(out, t);
}

Tensor load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open matrix file " + path.string());
  return read(in);
}

}  // namespace qctc::matrix_io
