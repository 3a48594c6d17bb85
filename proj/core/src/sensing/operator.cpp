#include "csmc/sensing/operator.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "csmc/error.hpp"
#include "csmc/io/binary.hpp"
#include "csmc/random.hpp"

namespace csmc::sensing {
namespace {
constexpr std::uint32_t kOperatorVersion = 1;
}

Ratio Ratio::from_double(double value) {
  if (!std::isfinite(value) || value < 0.0 || value > 4.0e6) {
    throw ConfigError("invalid compression ratio " + std::to_string(value));
  }
  return Ratio(static_cast<std::uint32_t>(std::llround(value * 1000.0)));
}

std::string to_string(Ratio r) {
  std::string s = std::to_string(r.milli() / 1000) + ".";
  const std::uint32_t frac = r.milli() % 1000;
  s += static_cast<char>('0' + frac / 100);
  s += static_cast<char>('0' + frac / 10 % 10);
  s += static_cast<char>('0' + frac % 10);
  return s;
}

std::size_t measurement_count(Ratio cr, std::size_t block) {
  // round-half-up of milli * B^2 / 1000 in integer arithmetic
  const std::uint64_t scaled = static_cast<std::uint64_t>(cr.milli()) * block * block;
  return static_cast<std::size_t>((2 * scaled + 1000) / 2000);
}

diff::Tensor OperatorView::as_filters() const { return rows_.reshaped({rows(), 1, block_, block_}); }

MeasurementOperator MeasurementOperator::make(std::size_t block, double cr_max, std::uint64_t seed) {
  if (!(cr_max > 0.0 && cr_max <= 1.0)) {
    throw ConfigError("CR_max must lie in (0, 1], got " + std::to_string(cr_max));
  }
  return make(block, Ratio::from_double(cr_max), seed);
}

MeasurementOperator MeasurementOperator::make(std::size_t block, Ratio cr_max, std::uint64_t seed) {
  if (block == 0) throw ConfigError("block size must be positive");
  if (cr_max.milli() == 0 || cr_max.milli() > 1000) {
    throw ConfigError("CR_max must lie in (0, 1], got " + to_string(cr_max));
  }
  const std::size_t rows = measurement_count(cr_max, block);
  if (rows == 0) throw ConfigError("CR_max " + to_string(cr_max) + " yields no measurements");
  const std::size_t cols = block * block;
  diff::Tensor m({rows, cols});
  Rng rng(seed);
  for (double& v : m.data()) v = rng.normal();
  return MeasurementOperator(block, seed, std::move(m));
}

OperatorView MeasurementOperator::row_view(std::size_t rows) const {
  if (rows == 0 || rows > max_rows()) {
    throw ConfigError("operator has " + std::to_string(max_rows()) + " rows, requested " + std::to_string(rows));
  }
  const std::size_t cols = block_ * block_;
  std::vector<double> prefix(rows_.data().begin(), rows_.data().begin() + static_cast<std::ptrdiff_t>(rows * cols));
  return OperatorView(block_, diff::Tensor({rows, cols}, std::move(prefix)));
}

OperatorView MeasurementOperator::rate_view(Ratio cr) const { return row_view(measurement_count(cr, block_)); }

void MeasurementOperator::save(std::ostream& out) const {
  io::write_bytes(out, "CSKM");
  io::write_u32(out, kOperatorVersion);
  io::write_u32(out, static_cast<std::uint32_t>(block_));
  io::write_u32(out, static_cast<std::uint32_t>(max_rows()));
  io::write_u64(out, seed_);
  for (double v : rows_.data()) io::write_f64(out, v);
}

MeasurementOperator MeasurementOperator::load(std::istream& in) {
  io::BinaryReader r(in);
  r.expect_magic("CSKM");
  const std::uint64_t version_at = r.offset();
  if (const auto version = r.u32(); version != kOperatorVersion) {
    throw ParseError("unsupported operator file version " + std::to_string(version), version_at);
  }
  const std::size_t block = r.u32();
  const std::size_t rows = r.u32();
  const std::uint64_t seed = r.u64();
  if (block == 0 || rows == 0 || rows > block * block) {
    throw ParseError("invalid operator geometry B=" + std::to_string(block) + " M_max=" + std::to_string(rows),
                     r.offset());
  }
  diff::Tensor m({rows, block * block});
  for (double& v : m.data()) v = r.f64();
  return MeasurementOperator(block, seed, std::move(m));
}

void MeasurementOperator::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  save(out);
}

MeasurementOperator MeasurementOperator::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return load(in);
}

}  // namespace csmc::sensing
