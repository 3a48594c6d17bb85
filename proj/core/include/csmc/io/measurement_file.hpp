#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "csmc/sensing/sampling.hpp"

namespace csmc::io {

inline constexpr std::uint32_t kMeasurementFileVersion = 1;

/// Measurements of a frame sequence at one rate.
struct MeasurementStream {
  std::size_t block = 0;
  std::uint64_t operator_seed = 0;
  std::vector<sensing::MeasurementGrid> frames;

  friend bool operator==(const MeasurementStream&, const MeasurementStream&) = default;
};

/// Little-endian "CSKY": version, B, M_B, grid_h, grid_w, frame count, rate
/// in thousandths (u32 each), operator seed (u64), then f32 values frame by
/// frame in grid order (channel, row, column).
void write_measurements(std::ostream& out, const MeasurementStream& stream);
void write_measurements(const std::string& path, const MeasurementStream& stream);
MeasurementStream read_measurements(std::istream& in);
MeasurementStream read_measurements(const std::string& path);

}  // namespace csmc::io
