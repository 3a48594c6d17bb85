#include "csmc/io/binary.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include "csmc/error.hpp"

namespace csmc::io {
namespace {

template <typename U>
void write_le(std::ostream& out, U v) {
  std::array<char, sizeof(U)> buf{};
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf.data(), buf.size());
}

template <typename U>
U read_le(std::span<const unsigned char> bytes) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void write_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }
void write_u32(std::ostream& out, std::uint32_t v) { write_le(out, v); }
void write_u64(std::ostream& out, std::uint64_t v) { write_le(out, v); }
void write_f32(std::ostream& out, float v) { write_le(out, std::bit_cast<std::uint32_t>(v)); }
void write_f64(std::ostream& out, double v) { write_le(out, std::bit_cast<std::uint64_t>(v)); }
void write_bytes(std::ostream& out, std::string_view bytes) {
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void BinaryReader::read(std::span<unsigned char> dst) {
  in_.read(reinterpret_cast<char*>(dst.data()), static_cast<std::streamsize>(dst.size()));
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got != dst.size()) {
    throw ParseError("unexpected end of stream (wanted " + std::to_string(dst.size()) + " bytes, got " +
                         std::to_string(got) + ")",
                     offset_ + got);
  }
  offset_ += got;
}

std::uint8_t BinaryReader::u8() {
  std::array<unsigned char, 1> b{};
  read(b);
  return b[0];
}

std::uint32_t BinaryReader::u32() {
  std::array<unsigned char, 4> b{};
  read(b);
  return read_le<std::uint32_t>(b);
}

std::uint64_t BinaryReader::u64() {
  std::array<unsigned char, 8> b{};
  read(b);
  return read_le<std::uint64_t>(b);
}

float BinaryReader::f32() { return std::bit_cast<float>(u32()); }
double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::bytes(std::size_t n) {
  std::string s(n, '\0');
  read(std::span<unsigned char>(reinterpret_cast<unsigned char*>(s.data()), n));
  return s;
}

void BinaryReader::expect_magic(std::string_view magic) {
  const std::uint64_t at = offset_;
  const std::string got = bytes(magic.size());
  if (got != magic) throw ParseError("bad magic: expected \"" + std::string(magic) + "\"", at);
}

}  // namespace csmc::io
