#pragma once

#include <iosfwd>
#include <string>

#include "csmc/unfold/model.hpp"

namespace csmc::io {

inline constexpr std::uint32_t kModelFileVersion = 1;

/// Little-endian "CSKN" file: version, model header (block size, stage count,
/// rate list in thousandths, conv stack, ITP flag / factor / index
/// convention, hypothesis stride, fusion weight, operator seed,
/// normalization), then named parameter blocks (length-prefixed name, rank,
/// dims, f32 data). Parameters are stored in single precision.
void save_model(std::ostream& out, const unfold::ModelParams& model);
void save_model(const std::string& path, const unfold::ModelParams& model);

/// Throws ParseError on malformed input, missing or unexpected parameters
/// and shape mismatches.
unfold::ModelParams load_model(std::istream& in);
unfold::ModelParams load_model(const std::string& path);

}  // namespace csmc::io
