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

#ifndef PORTCONV_TESTS_ORACLE_H_
#define PORTCONV_TESTS_ORACLE_H_

// Test-only brute-force convolution. It materialises the zero-padded input
// explicitly and sums in long double, so it shares no code path with
// conv2d_ref beyond the shape algebra.

#include <vector>

#include "portconv/conv_ref.h"
#include "portconv/tensor.h"

namespace portconv::testing {

inline Tensor brute_force_conv(Tensor const& input, Filter const& filter,
                               ConvParams const& p) {
  Shape4D const out = output_shape(p);
  PadBefore const pad = pad_before(p);
  Index const padded_rows = (out.rows - 1) * p.stride_rows + p.window_rows;
  Index const padded_cols = (out.cols - 1) * p.stride_cols + p.window_cols;
  Index const c_in = p.input.channels;
  std::vector<long double> padded(static_cast<std::size_t>(
      p.input.batch * padded_rows * padded_cols * c_in));
  auto at = [&](Index n, Index h, Index w, Index c) -> long double& {
    return padded[static_cast<std::size_t>(
        ((n * padded_rows + h) * padded_cols + w) * c_in + c)];
  };
  for (Index n = 0; n < p.input.batch; ++n)
    for (Index h = 0; h < p.input.rows; ++h)
      for (Index w = 0; w < p.input.cols; ++w)
        for (Index c = 0; c < c_in; ++c) {
          Index const ph = h + pad.rows;
          Index const pw = w + pad.cols;
          if (ph < padded_rows && pw < padded_cols) {
            at(n, ph, pw, c) = input.at(n, h, w, c);
          }
        }
  Tensor result{out};
  for (Index n = 0; n < out.batch; ++n)
    for (Index ho = 0; ho < out.rows; ++ho)
      for (Index wo = 0; wo < out.cols; ++wo)
        for (Index f = 0; f < out.channels; ++f) {
          long double sum = 0;
          for (Index kh = 0; kh < p.window_rows; ++kh)
            for (Index kw = 0; kw < p.window_cols; ++kw)
              for (Index c = 0; c < c_in; ++c)
                sum += at(n, ho * p.stride_rows + kh, wo * p.stride_cols + kw,
                          c) *
                       static_cast<long double>(filter.at(kh, kw, c, f));
          result.at(n, ho, wo, f) = static_cast<float>(sum);
        }
  return result;
}

}  // namespace portconv::testing

#endif  // PORTCONV_TESTS_ORACLE_H_
