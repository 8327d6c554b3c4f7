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

#ifndef PORTCONV_CONV_REF_H_
#define PORTCONV_CONV_REF_H_

#include <cstdint>

#include "portconv/tensor.h"

namespace portconv {

/// Convolution weights laid out (window_rows, window_cols, in_channels,
/// features), features contiguous. Reshaped to a (Kh*Kw*C) x F matrix it is
/// the right-hand operand of the im2col product.
class Filter {
 public:
  Filter() = default;
  Filter(Index window_rows, Index window_cols, Index in_channels,
         Index features);
  Filter(Index window_rows, Index window_cols, Index in_channels,
         Index features, std::vector<float> values);
  /// Zero filter matching `params`.
  explicit Filter(ConvParams const& params);

  Index window_rows() const noexcept { return values_.shape().batch; }
  Index window_cols() const noexcept { return values_.shape().rows; }
  Index in_channels() const noexcept { return values_.shape().cols; }
  Index features() const noexcept { return values_.shape().channels; }

  std::span<float const> data() const noexcept { return values_.data(); }
  std::span<float> data() noexcept { return values_.data(); }
  Tensor const& tensor() const noexcept { return values_; }
  Tensor& tensor() noexcept { return values_; }

  float at(Index kh, Index kw, Index c, Index f) const noexcept {
    return values_.at(kh, kw, c, f);
  }
  float& at(Index kh, Index kw, Index c, Index f) noexcept {
    return values_.at(kh, kw, c, f);
  }

 private:
  Tensor values_{};
};

Filter random_filter(ConvParams const& params, std::uint64_t seed);

/// Throws ShapeMismatchError unless input and filter agree with `params`.
void check_operands(Tensor const& input, Filter const& filter,
                    ConvParams const& params);

/// Real multiplications performed by an instrumented run. `main_stage` is
/// the multiply-accumulate (or Winograd element-wise) stage; `transforms`
/// covers Winograd data transforms.
struct MultiplyCounter {
  std::uint64_t main_stage = 0;
  std::uint64_t transforms = 0;
};

/// Serial direct convolution; the oracle every other algorithm is checked
/// against. Padding taps read as zero and are still multiplied. Accumulates
/// in 64-bit and rounds once per output.
Tensor conv2d_ref(Tensor const& input, Filter const& filter,
                  ConvParams const& params,
                  MultiplyCounter* counter = nullptr);

/// Direct convolution with one task per output position, each task
/// producing the full feature vector in fixed-width chunks.
Tensor conv2d_naive_vectorized(Tensor const& input, Filter const& filter,
                               ConvParams const& params);

}  // namespace portconv

#endif  // PORTCONV_CONV_REF_H_
