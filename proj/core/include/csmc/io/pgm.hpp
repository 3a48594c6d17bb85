#pragma once

#include <iosfwd>
#include <string>

#include "csmc/sensing/frame.hpp"

namespace csmc::io {

/// Binary P5, maxval 255; values rounded and clamped.
void write_pgm(std::ostream& out, const sensing::FramePlane& frame);
void write_pgm(const std::string& path, const sensing::FramePlane& frame);

/// Binary P5 with maxval <= 255; '#' comments allowed in the header.
sensing::FramePlane read_pgm(std::istream& in);
sensing::FramePlane read_pgm(const std::string& path);

}  // namespace csmc::io
