#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace ledits {

// Artifacts share one header convention: an 8-byte magic, then a u32 version,
// then type-specific fields. All integers and doubles are little-endian.
using Magic = std::array<char, 8>;

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path);
  void magic(const Magic& m);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64s(std::span<const double> v);
  // Flushes and throws IoError if anything failed.
  void finish();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path);
  // Throws CompatibilityError when the magic does not match.
  void expect_magic(const Magic& m, const std::string& what);
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::vector<double> f64s(std::size_t n);
  // Throws IoError if bytes remain.
  void expect_end();

 private:
  void read(unsigned char* dst, std::size_t n);
  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace ledits
