#pragma once

#include <cstddef>
#include <vector>

#include "csmc/diffcore/tape.hpp"
#include "csmc/sensing/sampling.hpp"
#include "csmc/unfold/model.hpp"

namespace csmc::unfold {

/// floor(CR_max / CR_min).
std::size_t amplification_factor(sensing::Ratio cr_min, sensing::Ratio cr_max);

/// Zero-based expanded-channel index for each of the `output` channels:
/// round-half-up(i * CR / CR_min) for i = 1..output, clamped to [1, expanded].
std::vector<std::size_t> selection_indices(sensing::Ratio cr, sensing::Ratio cr_min, std::size_t expanded,
                                           std::size_t output);

ItpParams make_itp_params(sensing::Ratio cr_min, sensing::Ratio cr_max, std::vector<sensing::Ratio> cr_list,
                          std::size_t block);

/// Channel deconvolution followed by selection, on a tape. `y` holds the
/// round(CR * B^2) raw measurements (optionally with trailing grid axes).
diff::Var itp_forward(diff::Tape& tape, const diff::Binder& bind, const ItpParams& itp, diff::Var y,
                      sensing::Ratio cr, std::size_t block);

/// Deconvolution only: A * M_B channels.
sensing::MeasurementGrid itp_expand(const ItpParams& itp, const sensing::MeasurementGrid& grid, std::size_t block);

/// Picks M_max channels from an expanded grid produced at rate `cr`.
sensing::MeasurementGrid select_channels(const sensing::MeasurementGrid& expanded, sensing::Ratio cr,
                                         sensing::Ratio cr_min, std::size_t max_measurements);

/// Expand then select: always returns M_max channels.
sensing::MeasurementGrid itp_interpolate(const ItpParams& itp, const sensing::MeasurementGrid& grid,
                                         std::size_t block);

}  // namespace csmc::unfold
