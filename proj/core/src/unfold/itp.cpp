#include "csmc/unfold/itp.hpp"

#include <algorithm>
#include <string>

#include "csmc/diffcore/ops.hpp"
#include "csmc/error.hpp"

namespace csmc::unfold {

using sensing::MeasurementGrid;
using sensing::Ratio;

std::size_t amplification_factor(Ratio cr_min, Ratio cr_max) {
  if (cr_min.milli() == 0 || cr_max < cr_min) {
    throw ConfigError("invalid ITP rate range [" + to_string(cr_min) + ", " + to_string(cr_max) + "]");
  }
  return cr_max.milli() / cr_min.milli();
}

std::vector<std::size_t> selection_indices(Ratio cr, Ratio cr_min, std::size_t expanded, std::size_t output) {
  if (expanded == 0) throw DimensionError("selection from an empty channel set");
  const std::uint64_t num = cr.milli();
  const std::uint64_t den = cr_min.milli();
  std::vector<std::size_t> idx(output);
  for (std::size_t i = 1; i <= output; ++i) {
    std::uint64_t one_based = (2 * i * num + den) / (2 * den);
    one_based = std::clamp<std::uint64_t>(one_based, 1, expanded);
    idx[i - 1] = static_cast<std::size_t>(one_based - 1);
  }
  return idx;
}

ItpParams make_itp_params(Ratio cr_min, Ratio cr_max, std::vector<Ratio> cr_list, std::size_t block) {
  ItpParams p;
  p.factor = amplification_factor(cr_min, cr_max);
  p.kernel = diff::Tensor({p.factor}, 1.0);
  p.cr_min = cr_min;
  p.cr_max = cr_max;
  p.cr_list = std::move(cr_list);
  p.max_measurements = sensing::measurement_count(cr_max, block);
  return p;
}

namespace {

void check_rate(const ItpParams& itp, Ratio cr, std::size_t channels, std::size_t block) {
  if (std::find(itp.cr_list.begin(), itp.cr_list.end(), cr) == itp.cr_list.end()) {
    throw UnsupportedRateError("compression ratio " + to_string(cr) +
                               " is not in the trained rate list; ITP only decodes trained rates");
  }
  const std::size_t expected = sensing::measurement_count(cr, block);
  if (channels != expected) {
    throw DimensionError("ITP input at rate " + to_string(cr) + " must have " + std::to_string(expected) +
                         " channels, got " + std::to_string(channels));
  }
}

diff::Tensor grid_tensor(const MeasurementGrid& g) {
  return diff::Tensor({g.channels, g.grid_h, g.grid_w}, g.data);
}

MeasurementGrid to_grid(const diff::Tensor& t, Ratio cr) {
  MeasurementGrid g;
  g.channels = t.dim(0);
  g.grid_h = t.dim(1);
  g.grid_w = t.dim(2);
  g.data.assign(t.data().begin(), t.data().end());
  g.cr = cr;
  return g;
}

}  // namespace

diff::Var itp_forward(diff::Tape& tape, const diff::Binder& bind, const ItpParams& itp, diff::Var y, Ratio cr,
                      std::size_t block) {
  check_rate(itp, cr, tape.value(y).dim(0), block);
  const diff::Var expanded = diff::channel_deconv(tape, y, bind(tape, itp.kernel));
  const auto idx = selection_indices(cr, itp.cr_min, tape.value(expanded).dim(0), itp.max_measurements);
  return diff::gather_channels(tape, expanded, idx);
}

MeasurementGrid itp_expand(const ItpParams& itp, const MeasurementGrid& grid, std::size_t block) {
  check_rate(itp, grid.cr, grid.channels, block);
  diff::Tape tape(false);
  const auto y = tape.constant(grid_tensor(grid));
  const auto out = diff::channel_deconv(tape, y, tape.constant_ref(itp.kernel));
  return to_grid(tape.value(out), grid.cr);
}

MeasurementGrid select_channels(const MeasurementGrid& expanded, Ratio cr, Ratio cr_min,
                                std::size_t max_measurements) {
  diff::Tape tape(false);
  const auto x = tape.constant(grid_tensor(expanded));
  const auto idx = selection_indices(cr, cr_min, expanded.channels, max_measurements);
  return to_grid(tape.value(diff::gather_channels(tape, x, idx)), cr);
}

MeasurementGrid itp_interpolate(const ItpParams& itp, const MeasurementGrid& grid, std::size_t block) {
  return select_channels(itp_expand(itp, grid, block), grid.cr, itp.cr_min, itp.max_measurements);
}

}  // namespace csmc::unfold
