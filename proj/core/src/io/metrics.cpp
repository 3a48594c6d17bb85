#include "csmc/io/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <locale>
#include <sstream>
#include <vector>

#include "csmc/error.hpp"

namespace csmc::io {

using sensing::FramePlane;

namespace {

void check_same(const FramePlane& a, const FramePlane& b) {
  if (a.height != b.height || a.width != b.width) {
    throw GeometryError("metric inputs differ in size: " + std::to_string(a.height) + "x" + std::to_string(a.width) +
                        " vs " + std::to_string(b.height) + "x" + std::to_string(b.width));
  }
  if (a.values.empty()) throw GeometryError("metric on an empty frame");
}

std::vector<double> gaussian_1d(std::size_t size, double sigma) {
  std::vector<double> g(size);
  const double c = (static_cast<double>(size) - 1.0) / 2.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - c;
    g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  return g;
}

}  // namespace

double psnr(const FramePlane& a, const FramePlane& b) {
  check_same(a, b);
  double sq = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    sq += d * d;
  }
  if (sq == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sq / static_cast<double>(a.values.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim(const FramePlane& a, const FramePlane& b) {
  check_same(a, b);
  constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  const std::size_t wh = std::min<std::size_t>(11, a.height);
  const std::size_t ww = std::min<std::size_t>(11, a.width);
  const auto gy = gaussian_1d(wh, 1.5);
  const auto gx = gaussian_1d(ww, 1.5);

  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r0 = 0; r0 + wh <= a.height; ++r0) {
    for (std::size_t c0 = 0; c0 + ww <= a.width; ++c0) {
      double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
      for (std::size_t i = 0; i < wh; ++i) {
        for (std::size_t j = 0; j < ww; ++j) {
          const double w = gy[i] * gx[j];
          const double va = a.at(r0 + i, c0 + j), vb = b.at(r0 + i, c0 + j);
          mu_a += w * va;
          mu_b += w * vb;
          aa += w * va * va;
          bb += w * vb * vb;
          ab += w * va * vb;
        }
      }
      const double var_a = aa - mu_a * mu_a;
      const double var_b = bb - mu_b * mu_b;
      const double cov = ab - mu_a * mu_b;
      total += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

std::string format_db(double db, int precision) {
  if (std::isinf(db)) return db > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.setf(std::ios::fixed);
  s.precision(precision);
  s << db;
  return s.str();
}

}  // namespace csmc::io
