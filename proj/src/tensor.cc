/*
 * Copyright The portconv Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "portconv/tensor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "portconv/error.h"

namespace portconv {

Index checked_mul(Index a, Index b) {
  Index result = 0;
  if (a < 0 || b < 0 || __builtin_mul_overflow(a, b, &result)) {
    throw OverflowError("count overflow: " + std::to_string(a) + " * " +
                        std::to_string(b));
  }
  return result;
}

void Shape4D::validate() const {
  if (batch < 1 || rows < 1 || cols < 1 || channels < 1) {
    throw InvalidParamsError("shape extents must be >= 1, got " +
                             std::to_string(batch) + "x" +
                             std::to_string(rows) + "x" +
                             std::to_string(cols) + "x" +
                             std::to_string(channels));
  }
}

Index Shape4D::element_count() const {
  validate();
  return checked_mul(checked_mul(checked_mul(batch, rows), cols), channels);
}

Tensor::Tensor(Shape4D shape)
    : shape_{shape},
      data_(static_cast<std::size_t>(shape.element_count()), 0.f) {}

Tensor::Tensor(Shape4D shape, std::vector<float> values)
    : shape_{shape}, data_{std::move(values)} {
  if (static_cast<Index>(data_.size()) != shape_.element_count()) {
    throw ShapeMismatchError("tensor data holds " +
                             std::to_string(data_.size()) +
                             " values, shape needs " +
                             std::to_string(shape_.element_count()));
  }
}

Coord4D decode_index(Shape4D const& shape, Index linear) {
  Coord4D coord{};
  coord.c = linear % shape.channels;
  linear /= shape.channels;
  coord.w = linear % shape.cols;
  linear /= shape.cols;
  coord.h = linear % shape.rows;
  coord.n = linear / shape.rows;
  return coord;
}

ConvParams ConvParams::square(Index window, Index stride, Index rows,
                              Index cols, Index in_features,
                              Index out_features, Index batch,
                              Padding padding) {
  ConvParams p;
  p.window_rows = p.window_cols = window;
  p.stride_rows = p.stride_cols = stride;
  p.padding = padding;
  p.input = Shape4D{batch, rows, cols, in_features};
  p.features = out_features;
  return p;
}

void ConvParams::validate() const {
  input.validate();
  if (window_rows < 1 || window_cols < 1) {
    throw InvalidParamsError("window extents must be >= 1");
  }
  if (stride_rows < 1 || stride_cols < 1) {
    throw InvalidParamsError("stride extents must be >= 1");
  }
  if (features < 1) {
    throw InvalidParamsError("feature count must be >= 1");
  }
  if (padding == Padding::Valid &&
      (window_rows > input.rows || window_cols > input.cols)) {
    throw InvalidParamsError(
        "Valid padding requires the window to fit inside the input");
  }
}

namespace {

Index same_extent(Index in, Index stride) { return (in + stride - 1) / stride; }

Index same_pad_before(Index in, Index out, Index window, Index stride) {
  Index const total = std::max<Index>((out - 1) * stride + window - in, 0);
  return total / 2;
}

}  // namespace

Shape4D output_shape(ConvParams const& params) {
  params.validate();
  Shape4D out{params.input.batch, 0, 0, params.features};
  if (params.padding == Padding::Same) {
    out.rows = same_extent(params.input.rows, params.stride_rows);
    out.cols = same_extent(params.input.cols, params.stride_cols);
  } else {
    out.rows = (params.input.rows - params.window_rows) / params.stride_rows + 1;
    out.cols = (params.input.cols - params.window_cols) / params.stride_cols + 1;
  }
  return out;
}

PadBefore pad_before(ConvParams const& params) {
  if (params.padding == Padding::Valid) return {0, 0};
  Shape4D const out = output_shape(params);
  return {same_pad_before(params.input.rows, out.rows, params.window_rows,
                          params.stride_rows),
          same_pad_before(params.input.cols, out.cols, params.window_cols,
                          params.stride_cols)};
}

Index flop_count(ConvParams const& params) {
  Shape4D const out = output_shape(params);
  Index n = checked_mul(2, out.element_count());
  n = checked_mul(n, params.window_rows);
  n = checked_mul(n, params.window_cols);
  return checked_mul(n, params.input.channels);
}

Tensor fill_random(Tensor tensor, std::uint64_t seed) {
  // Top 24 bits of each draw give an exactly representable float in [0, 1).
  std::mt19937_64 engine{seed};
  for (float& v : tensor.data()) {
    auto const bits = static_cast<std::uint32_t>(engine() >> 40);
    v = static_cast<float>(bits) * 0x1p-23f - 1.f;
  }
  return tensor;
}

Tensor random_tensor(Shape4D shape, std::uint64_t seed) {
  return fill_random(Tensor{shape}, seed);
}

double max_relative_error(std::span<float const> a, std::span<float const> b) {
  if (a.size() != b.size()) {
    throw ShapeMismatchError("max_relative_error: sizes differ");
  }
  constexpr double kEps = 1e-6;
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double const x = a[i];
    double const y = b[i];
    double const denom = std::max({std::abs(x), std::abs(y), kEps});
    double const err = std::abs(x - y) / denom;
    if (std::isnan(err)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, err);
  }
  return worst;
}

double max_relative_error(Tensor const& a, Tensor const& b) {
  if (!(a.shape() == b.shape())) {
    throw ShapeMismatchError("max_relative_error: shapes differ");
  }
  return max_relative_error(a.data(), b.data());
}

}  // namespace portconv
