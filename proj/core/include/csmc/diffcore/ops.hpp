#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csmc/diffcore/tape.hpp"

/// Differentiable operations recorded on a Tape. Each op checks its shapes
/// and throws DimensionError (or a more specific error) on mismatch.
namespace csmc::diff {

/// out[o] = sum_n W[o,n] x[n] + b[o]. `bias` may be an invalid Var.
Var linear(Tape& tape, Var x, Var weight, Var bias = {});

/// out[p] = sum_k weights[k] rows[k,p]: a linear combination of matrix rows.
Var combine_rows(Tape& tape, Var weights, Var rows);

/// Stride-1 cross-correlation with zero padding so the spatial size is kept.
/// x: C x H x W, kernel: F x C x Kh x Kw (odd), bias: F (may be invalid).
Var conv2d_same(Tape& tape, Var x, Var kernel, Var bias = {});

/// Non-overlapping block filtering: x: 1 x H x W, kernel: F x 1 x S x S,
/// stride S. No bias. Output F x H/S x W/S.
Var conv2d_valid_strided(Tape& tape, Var x, Var kernel, std::size_t stride);

Var relu(Tape& tape, Var x);
Var add(Tape& tape, Var a, Var b);
Var sub(Tape& tape, Var a, Var b);
Var scale(Tape& tape, Var a, double factor);

/// Sum of squared differences, as a scalar.
Var squared_distance(Tape& tape, Var a, Var b);
/// (1 / 2N) * sum (a - b)^2 with N the element count.
Var mse(Tape& tape, Var a, Var b);
/// Sum of scalar terms, each multiplied by `factor`.
Var sum_scaled(Tape& tape, std::span<const Var> terms, double factor);

Var reshape(Tape& tape, Var x, Shape shape);
/// Flattened concatenation of all inputs.
Var concat(Tape& tape, std::span<const Var> parts);
/// Appends zeros so the (flat) result has `length` elements.
Var pad_to(Tape& tape, Var x, std::size_t length);

/// Channel-axis transposed convolution with kernel length A and stride A.
/// y: C x (cells...), kernel: A. out[c*A + a, cell] = kernel[a] * y[c, cell].
Var channel_deconv(Tape& tape, Var y, Var kernel);

/// out[i, cell] = x[indices[i], cell] along the leading axis.
Var gather_channels(Tape& tape, Var x, std::span<const std::size_t> indices);

}  // namespace csmc::diff
