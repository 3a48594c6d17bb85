#pragma once

#include <string>

#include "csmc/sensing/frame.hpp"

namespace csmc::io {

/// 10 log10(255^2 / MSE); +infinity for identical frames.
double psnr(const sensing::FramePlane& a, const sensing::FramePlane& b);

/// Mean SSIM over all valid 11x11 Gaussian windows (sigma 1.5). Frames
/// smaller than the window use a single window cut to the frame.
double ssim(const sensing::FramePlane& a, const sensing::FramePlane& b);

/// Fixed-point dB string, "inf" for an infinite value.
std::string format_db(double db, int precision = 2);

}  // namespace csmc::io
