#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace csmc::io {

/// Little-endian primitive writers.
void write_u8(std::ostream& out, std::uint8_t v);
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f32(std::ostream& out, float v);
void write_f64(std::ostream& out, double v);
void write_bytes(std::ostream& out, std::string_view bytes);

/// Little-endian reader that tracks the byte offset and throws ParseError on
/// truncated input.
class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  std::string bytes(std::size_t n);
  /// Reads `magic.size()` bytes and throws ParseError when they differ.
  void expect_magic(std::string_view magic);

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  void read(std::span<unsigned char> dst);

  std::istream& in_;
  std::uint64_t offset_ = 0;
};

}  // namespace csmc::io
