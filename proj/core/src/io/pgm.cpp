#include "csmc/io/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "csmc/error.hpp"

namespace csmc::io {

using sensing::FramePlane;

void write_pgm(std::ostream& out, const FramePlane& frame) {
  out << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
  std::string bytes(frame.values.size(), '\0');
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<char>(static_cast<unsigned char>(std::clamp(std::lround(frame.values[i]), 0L, 255L)));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void write_pgm(const std::string& path, const FramePlane& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_pgm(out, frame);
}

namespace {

std::size_t header_number(std::istream& in, std::uint64_t& offset) {
  int c = in.get();
  ++offset;
  while (c != std::char_traits<char>::eof() && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      while (c != std::char_traits<char>::eof() && c != '\n') {
        c = in.get();
        ++offset;
      }
    }
    c = in.get();
    ++offset;
  }
  if (c == std::char_traits<char>::eof() || !std::isdigit(c)) throw ParseError("malformed PGM header", offset - 1);
  std::size_t v = 0;
  while (c != std::char_traits<char>::eof() && std::isdigit(c)) {
    v = v * 10 + static_cast<std::size_t>(c - '0');
    if (v > (1u << 24)) throw ParseError("PGM header value too large", offset);
    c = in.get();
    ++offset;
  }
  if (c == std::char_traits<char>::eof() || !std::isspace(c)) throw ParseError("malformed PGM header", offset - 1);
  return v;
}

}  // namespace

FramePlane read_pgm(std::istream& in) {
  char magic[2] = {};
  in.read(magic, 2);
  if (in.gcount() != 2 || magic[0] != 'P' || magic[1] != '5') throw ParseError("not a binary PGM (P5)", 0);
  std::uint64_t offset = 2;
  const std::size_t width = header_number(in, offset);
  const std::size_t height = header_number(in, offset);
  const std::size_t maxval = header_number(in, offset);
  if (width == 0 || height == 0) throw ParseError("PGM with zero size", offset);
  if (maxval == 0 || maxval > 255) throw ParseError("only 8-bit PGM is supported", offset);
  std::string bytes(width * height, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
    throw ParseError("truncated PGM payload", offset + static_cast<std::uint64_t>(in.gcount()));
  }
  FramePlane f(height, width);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    f.values[i] = static_cast<unsigned char>(bytes[i]) * 255.0 / static_cast<double>(maxval);
  }
  return f;
}

FramePlane read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_pgm(in);
}

}  // namespace csmc::io
