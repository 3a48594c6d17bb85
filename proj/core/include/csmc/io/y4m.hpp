#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "csmc/sensing/frame.hpp"

namespace csmc::io {

/// Luma planes of a YUV4MPEG2 stream. Accepts 8-bit C420 variants, C444 and
/// Cmono (C420 when the tag is absent); chroma is skipped. Throws ParseError
/// with the byte offset on bad magic, unsupported colorspace, a missing FRAME
/// marker or a truncated frame.
std::vector<sensing::FramePlane> parse_y4m(std::istream& in);
std::vector<sensing::FramePlane> read_y4m(const std::string& path);

/// Cmono stream, values rounded and clamped to [0, 255].
void write_y4m(std::ostream& out, const std::vector<sensing::FramePlane>& frames);
void write_y4m(const std::string& path, const std::vector<sensing::FramePlane>& frames);

}  // namespace csmc::io
