#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>

#include "csmc/diffcore/tensor.hpp"

namespace csmc::sensing {

/// Compression ratio M_B / B^2 stored in thousandths, so that rate lists,
/// index arithmetic and file headers stay exact.
class Ratio {
 public:
  constexpr Ratio() = default;
  static constexpr Ratio from_milli(std::uint32_t milli) { return Ratio(milli); }
  /// Rounds to the nearest thousandth.
  static Ratio from_double(double value);

  constexpr std::uint32_t milli() const noexcept { return milli_; }
  constexpr double value() const noexcept { return milli_ / 1000.0; }

  friend constexpr auto operator<=>(Ratio, Ratio) = default;

 private:
  constexpr explicit Ratio(std::uint32_t milli) : milli_(milli) {}
  std::uint32_t milli_ = 0;
};

std::string to_string(Ratio r);

/// M_B = round(CR * B^2), halves rounded up.
std::size_t measurement_count(Ratio cr, std::size_t block);

/// The first M_B rows of a measurement operator: the sampling matrix for one
/// compression ratio, M_B x B^2.
class OperatorView {
 public:
  OperatorView(std::size_t block, diff::Tensor rows) : block_(block), rows_(std::move(rows)) {}

  std::size_t block() const noexcept { return block_; }
  std::size_t rows() const noexcept { return rows_.dim(0); }
  const diff::Tensor& matrix() const noexcept { return rows_; }
  /// Same rows as B^2-tap strided convolution filters, M_B x 1 x B x B.
  diff::Tensor as_filters() const;

 private:
  std::size_t block_;
  diff::Tensor rows_;
};

/// Gaussian block measurement matrix at the maximal rate. Entries are i.i.d.
/// standard normal, generated row by row from the seed, so a view at a lower
/// rate is a prefix of every view at a higher rate.
class MeasurementOperator {
 public:
  static MeasurementOperator make(std::size_t block, Ratio cr_max, std::uint64_t seed);
  static MeasurementOperator make(std::size_t block, double cr_max, std::uint64_t seed);

  std::size_t block() const noexcept { return block_; }
  std::size_t max_rows() const noexcept { return rows_.dim(0); }
  std::uint64_t seed() const noexcept { return seed_; }
  const diff::Tensor& matrix() const noexcept { return rows_; }

  OperatorView rate_view(Ratio cr) const;
  OperatorView row_view(std::size_t rows) const;

  /// Little-endian: "CSKM", version u32, B u32, M_max u32, seed u64, then
  /// M_max * B^2 f64 row-major.
  void save(std::ostream& out) const;
  static MeasurementOperator load(std::istream& in);
  void save(const std::string& path) const;
  static MeasurementOperator load(const std::string& path);

  friend bool operator==(const MeasurementOperator& a, const MeasurementOperator& b) {
    return a.block_ == b.block_ && a.seed_ == b.seed_ && a.rows_.shape() == b.rows_.shape() &&
           std::equal(a.rows_.data().begin(), a.rows_.data().end(), b.rows_.data().begin());
  }

 private:
  MeasurementOperator(std::size_t block, std::uint64_t seed, diff::Tensor rows)
      : block_(block), seed_(seed), rows_(std::move(rows)) {}

  std::size_t block_ = 0;
  std::uint64_t seed_ = 0;
  diff::Tensor rows_;
};

}  // namespace csmc::sensing
