#include "csmc/io/measurement_file.hpp"

#include <fstream>

#include "csmc/error.hpp"
#include "csmc/io/binary.hpp"

namespace csmc::io {

void write_measurements(std::ostream& out, const MeasurementStream& s) {
  if (s.frames.empty()) throw GeometryError("measurement stream has no frames");
  const auto& first = s.frames.front();
  for (const auto& g : s.frames) {
    if (g.channels != first.channels || g.grid_h != first.grid_h || g.grid_w != first.grid_w || g.cr != first.cr ||
        g.data.size() != g.channels * g.grid_h * g.grid_w) {
      throw GeometryError("measurement grids in one stream must share geometry and rate");
    }
  }
  write_bytes(out, "CSKY");
  write_u32(out, kMeasurementFileVersion);
  write_u32(out, static_cast<std::uint32_t>(s.block));
  write_u32(out, static_cast<std::uint32_t>(first.channels));
  write_u32(out, static_cast<std::uint32_t>(first.grid_h));
  write_u32(out, static_cast<std::uint32_t>(first.grid_w));
  write_u32(out, static_cast<std::uint32_t>(s.frames.size()));
  write_u32(out, first.cr.milli());
  write_u64(out, s.operator_seed);
  for (const auto& g : s.frames) {
    for (double v : g.data) write_f32(out, static_cast<float>(v));
  }
  if (!out) throw Error("failed writing measurements");
}

void write_measurements(const std::string& path, const MeasurementStream& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_measurements(out, s);
}

MeasurementStream read_measurements(std::istream& in) {
  BinaryReader r(in);
  r.expect_magic("CSKY");
  const auto version_at = r.offset();
  if (const auto v = r.u32(); v != kMeasurementFileVersion) {
    throw ParseError("unsupported measurement file version " + std::to_string(v), version_at);
  }
  MeasurementStream s;
  s.block = r.u32();
  const std::size_t channels = r.u32();
  const std::size_t gh = r.u32();
  const std::size_t gw = r.u32();
  const std::size_t count = r.u32();
  const auto cr = sensing::Ratio::from_milli(r.u32());
  s.operator_seed = r.u64();
  if (s.block == 0 || channels == 0 || gh == 0 || gw == 0 || channels > s.block * s.block) {
    throw ParseError("invalid measurement stream geometry", r.offset());
  }
  if (count > (1u << 20)) throw ParseError("implausible frame count", r.offset());
  for (std::size_t f = 0; f < count; ++f) {
    sensing::MeasurementGrid g;
    g.channels = channels;
    g.grid_h = gh;
    g.grid_w = gw;
    g.cr = cr;
    g.data.resize(channels * gh * gw);
    for (double& v : g.data) v = r.f32();
    s.frames.push_back(std::move(g));
  }
  return s;
}

MeasurementStream read_measurements(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_measurements(in);
}

}  // namespace csmc::io
