#include "csmc/diffcore/ops.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "csmc/error.hpp"

namespace csmc::diff {
namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + to_string(a.shape()) + " and " +
                       to_string(b.shape()));
}

void require_same_size(const char* op, const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) shape_error(op, a, b);
}

// Signed padding helper for the same-size convolution: the range of output
// rows y for which y + offset stays inside [0, extent).
struct Span1d {
  std::size_t begin;
  std::size_t end;
};

Span1d valid_range(std::ptrdiff_t offset, std::size_t extent) {
  const auto n = static_cast<std::ptrdiff_t>(extent);
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -offset);
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, n - offset);
  if (hi <= lo) return {0, 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

}  // namespace

Var linear(Tape& tape, Var x, Var weight, Var bias) {
  const Tensor& xv = tape.value(x);
  const Tensor& wv = tape.value(weight);
  if (wv.rank() != 2 || wv.dim(1) != xv.size()) shape_error("linear", wv, xv);
  const std::size_t rows = wv.dim(0);
  const std::size_t cols = wv.dim(1);
  if (bias.valid() && tape.value(bias).size() != rows) shape_error("linear", wv, tape.value(bias));

  Tensor out({rows});
  const double* w = wv.data().data();
  const double* xd = xv.data().data();
  for (std::size_t o = 0; o < rows; ++o) {
    double acc = bias.valid() ? tape.value(bias)[o] : 0.0;
    const double* row = w + o * cols;
    for (std::size_t n = 0; n < cols; ++n) acc += row[n] * xd[n];
    out[o] = acc;
  }

  return tape.push(std::move(out), {x, weight, bias}, [x, weight, bias, rows, cols](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    if (t.needs_grad(x)) {
      auto gx = t.grad_target(x);
      const double* w = t.value(weight).data().data();
      for (std::size_t o = 0; o < rows; ++o) {
        const double go = g[o];
        if (go == 0.0) continue;
        const double* row = w + o * cols;
        for (std::size_t n = 0; n < cols; ++n) gx[n] += go * row[n];
      }
    }
    if (t.needs_grad(weight)) {
      auto gw = t.grad_target(weight);
      const double* xd = t.value(x).data().data();
      for (std::size_t o = 0; o < rows; ++o) {
        const double go = g[o];
        if (go == 0.0) continue;
        double* row = gw.data() + o * cols;
        for (std::size_t n = 0; n < cols; ++n) row[n] += go * xd[n];
      }
    }
    if (bias.valid() && t.needs_grad(bias)) {
      auto gb = t.grad_target(bias);
      for (std::size_t o = 0; o < rows; ++o) gb[o] += g[o];
    }
  });
}

Var combine_rows(Tape& tape, Var weights, Var rows) {
  const Tensor& wv = tape.value(weights);
  const Tensor& rv = tape.value(rows);
  if (rv.rank() != 2 || rv.dim(0) != wv.size()) shape_error("combine_rows", wv, rv);
  const std::size_t k = rv.dim(0);
  const std::size_t n = rv.dim(1);

  Tensor out({n});
  for (std::size_t i = 0; i < k; ++i) {
    const double wi = wv[i];
    if (wi == 0.0) continue;
    const double* row = rv.data().data() + i * n;
    for (std::size_t p = 0; p < n; ++p) out[p] += wi * row[p];
  }

  return tape.push(std::move(out), {weights, rows}, [weights, rows, k, n](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const double* r = t.value(rows).data().data();
    if (t.needs_grad(weights)) {
      auto gw = t.grad_target(weights);
      for (std::size_t i = 0; i < k; ++i) {
        double acc = 0.0;
        const double* row = r + i * n;
        for (std::size_t p = 0; p < n; ++p) acc += row[p] * g[p];
        gw[i] += acc;
      }
    }
    if (t.needs_grad(rows)) {
      auto gr = t.grad_target(rows);
      const auto& w = t.value(weights);
      for (std::size_t i = 0; i < k; ++i) {
        double* row = gr.data() + i * n;
        for (std::size_t p = 0; p < n; ++p) row[p] += w[i] * g[p];
      }
    }
  });
}

Var conv2d_same(Tape& tape, Var x, Var kernel, Var bias) {
  const Tensor& xv = tape.value(x);
  const Tensor& kv = tape.value(kernel);
  if (xv.rank() != 3 || kv.rank() != 4 || kv.dim(1) != xv.dim(0)) shape_error("conv2d_same", xv, kv);
  const std::size_t kh = kv.dim(2), kw = kv.dim(3);
  if (kh % 2 == 0 || kw % 2 == 0) {
    throw UnsupportedKernelError("conv2d_same needs odd kernel sizes, got " + to_string(kv.shape()));
  }
  const std::size_t channels = xv.dim(0), height = xv.dim(1), width = xv.dim(2);
  const std::size_t filters = kv.dim(0);
  if (bias.valid() && tape.value(bias).size() != filters) shape_error("conv2d_same", kv, tape.value(bias));
  const auto ph = static_cast<std::ptrdiff_t>(kh / 2);
  const auto pw = static_cast<std::ptrdiff_t>(kw / 2);
  const std::size_t plane = height * width;

  Tensor out({filters, height, width});
  const double* in = xv.data().data();
  const double* k = kv.data().data();
  double* o = out.data().data();
  for (std::size_t f = 0; f < filters; ++f) {
    double* of = o + f * plane;
    if (bias.valid()) std::fill(of, of + plane, tape.value(bias)[f]);
    for (std::size_t c = 0; c < channels; ++c) {
      const double* ic = in + c * plane;
      for (std::size_t i = 0; i < kh; ++i) {
        const auto dy = static_cast<std::ptrdiff_t>(i) - ph;
        const Span1d rows = valid_range(dy, height);
        for (std::size_t j = 0; j < kw; ++j) {
          const auto dx = static_cast<std::ptrdiff_t>(j) - pw;
          const Span1d cols = valid_range(dx, width);
          const double kval = k[((f * channels + c) * kh + i) * kw + j];
          if (kval == 0.0) continue;
          const std::size_t len = cols.end - cols.begin;
          const std::size_t src_col = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(cols.begin) + dx);
          for (std::size_t y = rows.begin; y < rows.end; ++y) {
            double* orow = of + y * width + cols.begin;
            const double* irow =
                ic + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(y) + dy) * width + src_col;
            for (std::size_t xx = 0; xx < len; ++xx) orow[xx] += kval * irow[xx];
          }
        }
      }
    }
  }

  return tape.push(std::move(out), {x, kernel, bias},
                   [=](Tape& t, std::size_t self) {
                     const auto g = t.grad(self);
                     const double* in = t.value(x).data().data();
                     const double* k = t.value(kernel).data().data();
                     const bool want_x = t.needs_grad(x);
                     const bool want_k = t.needs_grad(kernel);
                     double* gx = want_x ? t.grad_target(x).data() : nullptr;
                     double* gk = want_k ? t.grad_target(kernel).data() : nullptr;
                     for (std::size_t f = 0; f < filters; ++f) {
                       const double* gf = g.data() + f * plane;
                       for (std::size_t c = 0; c < channels; ++c) {
                         const double* ic = in + c * plane;
                         double* gxc = want_x ? gx + c * plane : nullptr;
                         for (std::size_t i = 0; i < kh; ++i) {
                           const auto dy = static_cast<std::ptrdiff_t>(i) - ph;
                           const Span1d rows = valid_range(dy, height);
                           for (std::size_t j = 0; j < kw; ++j) {
                             const auto dx = static_cast<std::ptrdiff_t>(j) - pw;
                             const Span1d cols = valid_range(dx, width);
                             const std::size_t kidx = ((f * channels + c) * kh + i) * kw + j;
                             const double kval = k[kidx];
                             double acc = 0.0;
                             const std::size_t len = cols.end - cols.begin;
                             const std::size_t src_col =
                                 static_cast<std::size_t>(static_cast<std::ptrdiff_t>(cols.begin) + dx);
                             for (std::size_t y = rows.begin; y < rows.end; ++y) {
                               const double* grow = gf + y * width + cols.begin;
                               const std::size_t src =
                                   static_cast<std::size_t>(static_cast<std::ptrdiff_t>(y) + dy) * width + src_col;
                               const double* irow = ic + src;
                               if (want_k) {
                                 for (std::size_t xx = 0; xx < len; ++xx) acc += grow[xx] * irow[xx];
                               }
                               if (want_x && kval != 0.0) {
                                 double* gxrow = gxc + src;
                                 for (std::size_t xx = 0; xx < len; ++xx) gxrow[xx] += kval * grow[xx];
                               }
                             }
                             if (want_k) gk[kidx] += acc;
                           }
                         }
                       }
                     }
                     if (bias.valid() && t.needs_grad(bias)) {
                       auto gb = t.grad_target(bias);
                       for (std::size_t f = 0; f < filters; ++f) {
                         double acc = 0.0;
                         for (std::size_t p = 0; p < plane; ++p) acc += g[f * plane + p];
                         gb[f] += acc;
                       }
                     }
                   });
}

Var conv2d_valid_strided(Tape& tape, Var x, Var kernel, std::size_t stride) {
  const Tensor& xv = tape.value(x);
  const Tensor& kv = tape.value(kernel);
  if (xv.rank() != 3 || xv.dim(0) != 1 || kv.rank() != 4 || kv.dim(1) != 1) {
    shape_error("conv2d_valid_strided", xv, kv);
  }
  if (stride == 0 || kv.dim(2) != stride || kv.dim(3) != stride) {
    throw UnsupportedKernelError("conv2d_valid_strided needs a square kernel equal to the stride, got " +
                                 to_string(kv.shape()) + " with stride " + std::to_string(stride));
  }
  const std::size_t height = xv.dim(1), width = xv.dim(2);
  if (height % stride != 0 || width % stride != 0) {
    throw GeometryError("frame " + std::to_string(height) + "x" + std::to_string(width) +
                        " is not divisible by block size " + std::to_string(stride));
  }
  const std::size_t filters = kv.dim(0);
  const std::size_t gh = height / stride, gw = width / stride;
  const std::size_t taps = stride * stride;

  Tensor out({filters, gh, gw});
  const double* in = xv.data().data();
  const double* k = kv.data().data();
  for (std::size_t f = 0; f < filters; ++f) {
    const double* kf = k + f * taps;
    for (std::size_t by = 0; by < gh; ++by) {
      for (std::size_t bx = 0; bx < gw; ++bx) {
        double acc = 0.0;
        for (std::size_t i = 0; i < stride; ++i) {
          const double* irow = in + (by * stride + i) * width + bx * stride;
          const double* krow = kf + i * stride;
          for (std::size_t j = 0; j < stride; ++j) acc += krow[j] * irow[j];
        }
        out[(f * gh + by) * gw + bx] = acc;
      }
    }
  }

  return tape.push(std::move(out), {x, kernel}, [=](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const double* in = t.value(x).data().data();
    const double* k = t.value(kernel).data().data();
    const bool want_x = t.needs_grad(x);
    const bool want_k = t.needs_grad(kernel);
    double* gx = want_x ? t.grad_target(x).data() : nullptr;
    double* gk = want_k ? t.grad_target(kernel).data() : nullptr;
    for (std::size_t f = 0; f < filters; ++f) {
      for (std::size_t by = 0; by < gh; ++by) {
        for (std::size_t bx = 0; bx < gw; ++bx) {
          const double go = g[(f * gh + by) * gw + bx];
          if (go == 0.0) continue;
          for (std::size_t i = 0; i < stride; ++i) {
            const std::size_t base = (by * stride + i) * width + bx * stride;
            for (std::size_t j = 0; j < stride; ++j) {
              if (want_x) gx[base + j] += go * k[f * taps + i * stride + j];
              if (want_k) gk[f * taps + i * stride + j] += go * in[base + j];
            }
          }
        }
      }
    }
  });
}

Var relu(Tape& tape, Var x) {
  const Tensor& xv = tape.value(x);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  return tape.push(std::move(out), {x}, [x](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const auto& xv = t.value(x);
    auto gx = t.grad_target(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > 0.0) gx[i] += g[i];
    }
  });
}

Var add(Tape& tape, Var a, Var b) {
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  require_same_size("add", av, bv);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
  return tape.push(std::move(out), {a, b}, [a, b](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    for (Var v : {a, b}) {
      if (!t.needs_grad(v)) continue;
      auto gv = t.grad_target(v);
      for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i];
    }
  });
}

Var sub(Tape& tape, Var a, Var b) {
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  require_same_size("sub", av, bv);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] - bv[i];
  return tape.push(std::move(out), {a, b}, [a, b](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    if (t.needs_grad(a)) {
      auto ga = t.grad_target(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.needs_grad(b)) {
      auto gb = t.grad_target(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var scale(Tape& tape, Var a, double factor) {
  const Tensor& av = tape.value(a);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = factor * av[i];
  return tape.push(std::move(out), {a}, [a, factor](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    auto ga = t.grad_target(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
  });
}

Var squared_distance(Tape& tape, Var a, Var b) {
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  require_same_size("squared_distance", av, bv);
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    acc += d * d;
  }
  return tape.push(Tensor({1}, {acc}), {a, b}, [a, b](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    const auto& av = t.value(a);
    const auto& bv = t.value(b);
    if (t.needs_grad(a)) {
      auto ga = t.grad_target(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += 2.0 * g * (av[i] - bv[i]);
    }
    if (t.needs_grad(b)) {
      auto gb = t.grad_target(b);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= 2.0 * g * (av[i] - bv[i]);
    }
  });
}

Var mse(Tape& tape, Var a, Var b) {
  const std::size_t n = tape.value(a).size();
  if (n == 0) throw DimensionError("mse of empty tensors");
  Var sq = squared_distance(tape, a, b);
  return scale(tape, sq, 1.0 / (2.0 * static_cast<double>(n)));
}

Var sum_scaled(Tape& tape, std::span<const Var> terms, double factor) {
  double acc = 0.0;
  for (Var v : terms) {
    if (tape.value(v).size() != 1) throw DimensionError("sum_scaled expects scalar terms");
    acc += tape.value(v)[0];
  }
  std::vector<Var> inputs(terms.begin(), terms.end());
  return tape.push(Tensor({1}, {factor * acc}), terms,
                   [inputs = std::move(inputs), factor](Tape& t, std::size_t self) {
                     const double g = t.grad(self)[0];
                     for (Var v : inputs) {
                       if (t.needs_grad(v)) t.grad_target(v)[0] += factor * g;
                     }
                   });
}

Var reshape(Tape& tape, Var x, Shape shape) {
  Tensor out = tape.value(x).reshaped(std::move(shape));
  return tape.push(std::move(out), {x}, [x](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    auto gx = t.grad_target(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

Var concat(Tape& tape, std::span<const Var> parts) {
  std::size_t total = 0;
  for (Var p : parts) total += tape.value(p).size();
  Tensor out({total});
  std::size_t at = 0;
  for (Var p : parts) {
    const auto d = tape.value(p).data();
    std::copy(d.begin(), d.end(), out.data().begin() + static_cast<std::ptrdiff_t>(at));
    at += d.size();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape.push(std::move(out), parts, [inputs = std::move(inputs)](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    std::size_t at = 0;
    for (Var p : inputs) {
      const std::size_t n = t.value(p).size();
      if (t.needs_grad(p)) {
        auto gp = t.grad_target(p);
        for (std::size_t i = 0; i < n; ++i) gp[i] += g[at + i];
      }
      at += n;
    }
  });
}

Var pad_to(Tape& tape, Var x, std::size_t length) {
  const Tensor& xv = tape.value(x);
  if (xv.size() > length) {
    throw DimensionError("pad_to: input of " + std::to_string(xv.size()) + " elements exceeds length " +
                         std::to_string(length));
  }
  Tensor out({length});
  std::copy(xv.data().begin(), xv.data().end(), out.data().begin());
  const std::size_t n = xv.size();
  return tape.push(std::move(out), {x}, [x, n](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    auto gx = t.grad_target(x);
    for (std::size_t i = 0; i < n; ++i) gx[i] += g[i];
  });
}

Var channel_deconv(Tape& tape, Var y, Var kernel) {
  const Tensor& yv = tape.value(y);
  const Tensor& kv = tape.value(kernel);
  if (yv.rank() == 0 || kv.rank() != 1 || kv.size() == 0) shape_error("channel_deconv", yv, kv);
  const std::size_t channels = yv.dim(0);
  const std::size_t cells = channels ? yv.size() / channels : 0;
  const std::size_t factor = kv.size();

  Shape shape = yv.shape();
  shape[0] = channels * factor;
  Tensor out(shape);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t a = 0; a < factor; ++a) {
      double* dst = out.data().data() + (c * factor + a) * cells;
      const double* src = yv.data().data() + c * cells;
      for (std::size_t p = 0; p < cells; ++p) dst[p] = kv[a] * src[p];
    }
  }

  return tape.push(std::move(out), {y, kernel}, [=](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const auto& yv = t.value(y);
    const auto& kv = t.value(kernel);
    const bool want_y = t.needs_grad(y);
    const bool want_k = t.needs_grad(kernel);
    double* gy = want_y ? t.grad_target(y).data() : nullptr;
    double* gk = want_k ? t.grad_target(kernel).data() : nullptr;
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t a = 0; a < factor; ++a) {
        const double* gsrc = g.data() + (c * factor + a) * cells;
        for (std::size_t p = 0; p < cells; ++p) {
          if (want_y) gy[c * cells + p] += kv[a] * gsrc[p];
          if (want_k) gk[a] += yv[c * cells + p] * gsrc[p];
        }
      }
    }
  });
}

Var gather_channels(Tape& tape, Var x, std::span<const std::size_t> indices) {
  const Tensor& xv = tape.value(x);
  if (xv.rank() == 0) throw DimensionError("gather_channels on a scalar");
  const std::size_t channels = xv.dim(0);
  const std::size_t cells = channels ? xv.size() / channels : 0;
  for (std::size_t idx : indices) {
    if (idx >= channels) {
      throw DimensionError("gather_channels: index " + std::to_string(idx) + " outside " +
                           std::to_string(channels) + " channels");
    }
  }
  Shape shape = xv.shape();
  shape[0] = indices.size();
  Tensor out(shape);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy_n(xv.data().data() + indices[i] * cells, cells, out.data().data() + i * cells);
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return tape.push(std::move(out), {x}, [x, cells, idx = std::move(idx)](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    auto gx = t.grad_target(x);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t p = 0; p < cells; ++p) gx[idx[i] * cells + p] += g[i * cells + p];
    }
  });
}

}  // namespace csmc::diff
