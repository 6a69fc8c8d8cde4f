#include "ledits/binary_io.hpp"

#include <bit>
#include <cstring>

#include "ledits/error.hpp"

namespace ledits {

namespace {

template <typename U>
void put_le(std::ofstream& out, U v) {
  unsigned char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(U));
}

template <typename U>
U get_le(const unsigned char* buf) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

BinaryWriter::BinaryWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
}

void BinaryWriter::magic(const Magic& m) { out_.write(m.data(), m.size()); }
void BinaryWriter::u32(std::uint32_t v) { put_le(out_, v); }
void BinaryWriter::u64(std::uint64_t v) { put_le(out_, v); }
void BinaryWriter::f64(double v) { put_le(out_, std::bit_cast<std::uint64_t>(v)); }
void BinaryWriter::f64s(std::span<const double> v) {
  for (double x : v) f64(x);
}

void BinaryWriter::finish() {
  out_.flush();
  if (!out_) throw IoError("write failed: " + path_.string());
}

BinaryReader::BinaryReader(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open " + path.string());
}

void BinaryReader::read(unsigned char* dst, std::size_t n) {
  in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) {
    throw IoError("truncated file: " + path_.string());
  }
}

void BinaryReader::expect_magic(const Magic& m, const std::string& what) {
  Magic got{};
  read(reinterpret_cast<unsigned char*>(got.data()), got.size());
  if (got != m) throw CompatibilityError(path_.string() + " is not a " + what);
}

std::uint32_t BinaryReader::u32() {
  unsigned char b[4];
  read(b, 4);
  return get_le<std::uint32_t>(b);
}

std::uint64_t BinaryReader::u64() {
  unsigned char b[8];
  read(b, 8);
  return get_le<std::uint64_t>(b);
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::vector<double> BinaryReader::f64s(std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = f64();
  return v;
}

void BinaryReader::expect_end() {
  if (in_.peek() != std::ifstream::traits_type::eof()) {
    throw IoError("trailing bytes in " + path_.string());
  }
}

}  // namespace ledits
