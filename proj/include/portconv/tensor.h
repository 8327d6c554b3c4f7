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

#ifndef PORTCONV_TENSOR_H_
#define PORTCONV_TENSOR_H_

#include <cstdint>
#include <span>
#include <vector>

namespace portconv {

using Index = std::int64_t;

/// Multiplies two non-negative counts, throwing OverflowError on overflow.
Index checked_mul(Index a, Index b);

/// Extents of a dense 4-D tensor in batch, rows, cols, channels order.
struct Shape4D {
  Index batch = 1;
  Index rows = 1;
  Index cols = 1;
  Index channels = 1;

  /// Throws InvalidParamsError unless every extent is >= 1.
  void validate() const;
  /// Total number of elements, checked for overflow.
  Index element_count() const;

  friend bool operator==(Shape4D const&, Shape4D const&) = default;
};

/// Dense NHWC tensor of 32-bit floats. Channels are contiguous.
class Tensor {
 public:
  Tensor() = default;
  /// Zero-initialised tensor of the given shape.
  explicit Tensor(Shape4D shape);
  Tensor(Shape4D shape, std::vector<float> values);

  Shape4D const& shape() const noexcept { return shape_; }
  Index size() const noexcept { return static_cast<Index>(data_.size()); }

  std::span<float const> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  Index index(Index n, Index h, Index w, Index c) const noexcept {
    return ((n * shape_.rows + h) * shape_.cols + w) * shape_.channels + c;
  }
  float at(Index n, Index h, Index w, Index c) const noexcept {
    return data_[static_cast<std::size_t>(index(n, h, w, c))];
  }
  float& at(Index n, Index h, Index w, Index c) noexcept {
    return data_[static_cast<std::size_t>(index(n, h, w, c))];
  }

  friend bool operator==(Tensor const&, Tensor const&) = default;

 private:
  Shape4D shape_{};
  std::vector<float> data_ = std::vector<float>(1, 0.f);
};

/// Position of an element decoded from its linear NHWC index.
struct Coord4D {
  Index n, h, w, c;
  friend bool operator==(Coord4D const&, Coord4D const&) = default;
};

Coord4D decode_index(Shape4D const& shape, Index linear);

enum class Padding { Same, Valid };

/// Forward convolution description: window, stride and padding applied to an
/// NHWC input producing `features` output channels.
struct ConvParams {
  Index window_rows = 1;
  Index window_cols = 1;
  Index stride_rows = 1;
  Index stride_cols = 1;
  Padding padding = Padding::Same;
  Shape4D input{};
  Index features = 1;

  /// Square window and stride, in the order (window, stride, rows, cols,
  /// input features, output features).
  static ConvParams square(Index window, Index stride, Index rows, Index cols,
                           Index in_features, Index out_features,
                           Index batch = 1, Padding padding = Padding::Same);

  void validate() const;

  friend bool operator==(ConvParams const&, ConvParams const&) = default;
};

/// Zero padding added before the first row / column of the input.
struct PadBefore {
  Index rows;
  Index cols;
};

Shape4D output_shape(ConvParams const& params);
/// Same: floor(pad_total / 2) where pad_total = max((out-1)*stride+window-in,
/// 0). Valid: zero.
PadBefore pad_before(ConvParams const& params);

/// 2 * N * Ho * Wo * Kh * Kw * C * F.
Index flop_count(ConvParams const& params);

/// Fills with values uniform in [-1, 1], fully determined by (seed, shape).
Tensor fill_random(Tensor tensor, std::uint64_t seed);
Tensor random_tensor(Shape4D shape, std::uint64_t seed);

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, 1e-6).
double max_relative_error(Tensor const& a, Tensor const& b);
double max_relative_error(std::span<float const> a, std::span<float const> b);

}  // namespace portconv

#endif  // PORTCONV_TENSOR_H_
