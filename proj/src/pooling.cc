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

#include "portconv/pooling.h"

#include <algorithm>
#include <limits>

#include "portconv/error.h"
#include "portconv/parallel.h"

namespace portconv {
namespace {

ConvParams pool_params(Tensor const& input, PoolWindow window,
                       PoolStride stride, Padding padding) {
  ConvParams p;
  p.window_rows = window.rows;
  p.window_cols = window.cols;
  p.stride_rows = stride.rows;
  p.stride_cols = stride.cols;
  p.padding = padding;
  p.input = input.shape();
  p.features = input.shape().channels;
  p.validate();
  return p;
}

// Folds the in-bounds elements of each window per channel, then `finish`
// maps (folded value, in-bounds count) to the output.
template <typename Init, typename Accumulate, typename Finish>
Tensor pool(Tensor const& input, PoolWindow window, PoolStride stride,
            Padding padding, Init init, Accumulate accumulate,
            Finish finish) {
  ConvParams const params = pool_params(input, window, stride, padding);
  Shape4D const out_shape = output_shape(params);
  PadBefore const pad = pad_before(params);
  Tensor output{out_shape};
  Shape4D const& in = params.input;
  Index const positions = out_shape.batch * out_shape.rows * out_shape.cols;

  parallel_for(positions, [&](Index first, Index last) {
    std::vector<double> acc(static_cast<std::size_t>(in.channels));
    for (Index pos = first; pos < last; ++pos) {
      Index const wo = pos % out_shape.cols;
      Index const ho = (pos / out_shape.cols) % out_shape.rows;
      Index const n = pos / (out_shape.cols * out_shape.rows);
      std::fill(acc.begin(), acc.end(), init);
      Index count = 0;
      for (Index kh = 0; kh < window.rows; ++kh) {
        Index const ih = ho * stride.rows + kh - pad.rows;
        if (ih < 0 || ih >= in.rows) continue;
        for (Index kw = 0; kw < window.cols; ++kw) {
          Index const iw = wo * stride.cols + kw - pad.cols;
          if (iw < 0 || iw >= in.cols) continue;
          ++count;
          for (Index c = 0; c < in.channels; ++c) {
            auto& a = acc[static_cast<std::size_t>(c)];
            a = accumulate(a, static_cast<double>(input.at(n, ih, iw, c)));
          }
        }
      }
      for (Index c = 0; c < in.channels; ++c) {
        output.at(n, ho, wo, c) =
            static_cast<float>(finish(acc[static_cast<std::size_t>(c)], count));
      }
    }
  });
  return output;
}

}  // namespace

Tensor max_pool2d(Tensor const& input, PoolWindow window, PoolStride stride,
                  Padding padding) {
  return pool(
      input, window, stride, padding, -std::numeric_limits<double>::infinity(),
      [](double a, double x) { return std::max(a, x); },
      [](double a, Index) { return a; });
}

Tensor avg_pool2d(Tensor const& input, PoolWindow window, PoolStride stride,
                  Padding padding) {
  return pool(
      input, window, stride, padding, 0.0,
      [](double a, double x) { return a + x; },
      [](double a, Index count) { return a / static_cast<double>(count); });
}

}  // namespace portconv
