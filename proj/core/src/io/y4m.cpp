#include "csmc/io/y4m.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "csmc/error.hpp"

namespace csmc::io {

using sensing::FramePlane;

namespace {

enum class Chroma { c420, c444, mono };

class Cursor {
 public:
  explicit Cursor(std::istream& in) : in_(in) {}

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }
  std::uint64_t offset() const { return offset_; }

  // Reads up to and including '\n'; the newline is not returned.
  std::string line(std::string_view what) {
    std::string s;
    for (;;) {
      const int c = in_.get();
      if (c == std::char_traits<char>::eof()) throw ParseError("unterminated " + std::string(what), offset_);
      ++offset_;
      if (c == '\n') return s;
      s.push_back(static_cast<char>(c));
      if (s.size() > 4096) throw ParseError(std::string(what) + " line too long", offset_);
    }
  }

  void read(char* dst, std::size_t n, std::string_view what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(in_.gcount());
    offset_ += got;
    if (got != n) {
      throw ParseError("truncated " + std::string(what) + ": expected " + std::to_string(n) + " bytes, got " +
                           std::to_string(got),
                       offset_);
    }
  }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

std::size_t parse_dim(std::string_view v, char tag, std::uint64_t offset) {
  std::size_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || out == 0) {
    throw ParseError(std::string("invalid ") + tag + " tag '" + std::string(v) + "'", offset);
  }
  return out;
}

Chroma parse_colorspace(std::string_view v, std::uint64_t offset) {
  if (v == "420jpeg" || v == "420paldv" || v == "420mpeg2" || v == "420") return Chroma::c420;
  if (v == "444") return Chroma::c444;
  if (v == "mono") return Chroma::mono;
  throw ParseError("unsupported colorspace C" + std::string(v), offset);
}

}  // namespace

std::vector<FramePlane> parse_y4m(std::istream& in) {
  Cursor cur(in);
  const std::string header = cur.line("stream header");
  constexpr std::string_view magic = "YUV4MPEG2";
  if (header.compare(0, magic.size(), magic) != 0 || (header.size() > magic.size() && header[magic.size()] != ' ')) {
    throw ParseError("not a YUV4MPEG2 stream", 0);
  }
  std::size_t width = 0, height = 0;
  Chroma chroma = Chroma::c420;
  std::size_t pos = magic.size();
  while (pos < header.size()) {
    if (header[pos] == ' ') {
      ++pos;
      continue;
    }
    const std::size_t end = std::min(header.find(' ', pos), header.size());
    const std::string_view token(header.data() + pos, end - pos);
    const std::string_view value = token.substr(1);
    switch (token[0]) {
      case 'W': width = parse_dim(value, 'W', pos); break;
      case 'H': height = parse_dim(value, 'H', pos); break;
      case 'C': chroma = parse_colorspace(value, pos); break;
      default: break;
    }
    pos = end;
  }
  if (width == 0 || height == 0) throw ParseError("stream header lacks W or H", cur.offset());

  const std::size_t luma = width * height;
  std::size_t chroma_bytes = 0;
  if (chroma == Chroma::c420) chroma_bytes = 2 * ((width + 1) / 2) * ((height + 1) / 2);
  if (chroma == Chroma::c444) chroma_bytes = 2 * luma;

  std::vector<FramePlane> frames;
  std::string payload(luma, '\0');
  std::string skip(chroma_bytes, '\0');
  while (!cur.at_end()) {
    const std::uint64_t marker_at = cur.offset();
    const std::string marker = cur.line("frame header");
    if (marker.compare(0, 5, "FRAME") != 0 || (marker.size() > 5 && marker[5] != ' ')) {
      throw ParseError("expected FRAME marker", marker_at);
    }
    cur.read(payload.data(), luma, "luma plane");
    if (chroma_bytes) cur.read(skip.data(), chroma_bytes, "chroma planes");
    FramePlane f(height, width, 0.0, static_cast<std::int64_t>(frames.size()));
    for (std::size_t i = 0; i < luma; ++i) f.values[i] = static_cast<unsigned char>(payload[i]);
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<FramePlane> read_y4m(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return parse_y4m(in);
}

void write_y4m(std::ostream& out, const std::vector<FramePlane>& frames) {
  if (frames.empty()) throw GeometryError("cannot write an empty Y4M stream");
  const auto& first = frames.front();
  out << "YUV4MPEG2 W" << first.width << " H" << first.height << " F25:1 Ip A1:1 Cmono\n";
  std::string bytes;
  for (const auto& f : frames) {
    if (f.height != first.height || f.width != first.width) throw GeometryError("Y4M frames differ in size");
    bytes.resize(f.values.size());
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      bytes[i] = static_cast<char>(static_cast<unsigned char>(std::clamp(std::lround(f.values[i]), 0L, 255L)));
    }
    out << "FRAME\n";
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
}

void write_y4m(const std::string& path, const std::vector<FramePlane>& frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_y4m(out, frames);
}

}  // namespace csmc::io
