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

#include "portconv/conv_ref.h"

#include <algorithm>
#include <string>

#include "portconv/error.h"
#include "portconv/parallel.h"

namespace portconv {

Filter::Filter(Index window_rows, Index window_cols, Index in_channels,
               Index features)
    : values_{Shape4D{window_rows, window_cols, in_channels, features}} {}

Filter::Filter(Index window_rows, Index window_cols, Index in_channels,
               Index features, std::vector<float> values)
    : values_{Shape4D{window_rows, window_cols, in_channels, features},
              std::move(values)} {}

Filter::Filter(ConvParams const& params)
    : Filter{params.window_rows, params.window_cols, params.input.channels,
             params.features} {}

Filter random_filter(ConvParams const& params, std::uint64_t seed) {
  Filter filter{params};
  filter.tensor() = fill_random(std::move(filter.tensor()), seed);
  return filter;
}

void check_operands(Tensor const& input, Filter const& filter,
                    ConvParams const& params) {
  params.validate();
  if (!(input.shape() == params.input)) {
    throw ShapeMismatchError("input shape does not match convolution params");
  }
  if (filter.window_rows() != params.window_rows ||
      filter.window_cols() != params.window_cols ||
      filter.in_channels() != params.input.channels ||
      filter.features() != params.features) {
    throw ShapeMismatchError(
        "filter must be (window_rows, window_cols, channels, features) = (" +
        std::to_string(params.window_rows) + ", " +
        std::to_string(params.window_cols) + ", " +
        std::to_string(params.input.channels) + ", " +
        std::to_string(params.features) + ")");
  }
}

Tensor conv2d_ref(Tensor const& input, Filter const& filter,
                  ConvParams const& params, MultiplyCounter* counter) {
  check_operands(input, filter, params);
  Shape4D const out_shape = output_shape(params);
  PadBefore const pad = pad_before(params);
  Tensor output{out_shape};
  Shape4D const& in = params.input;
  Index const features = params.features;
  std::vector<double> acc(static_cast<std::size_t>(features));
  std::uint64_t multiplies = 0;

  for (Index n = 0; n < out_shape.batch; ++n) {
    for (Index ho = 0; ho < out_shape.rows; ++ho) {
      for (Index wo = 0; wo < out_shape.cols; ++wo) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (Index kh = 0; kh < params.window_rows; ++kh) {
          Index const ih = ho * params.stride_rows + kh - pad.rows;
          for (Index kw = 0; kw < params.window_cols; ++kw) {
            Index const iw = wo * params.stride_cols + kw - pad.cols;
            bool const inside = ih >= 0 && ih < in.rows && iw >= 0 &&
                                iw < in.cols;
            for (Index c = 0; c < in.channels; ++c) {
              double const x = inside ? input.at(n, ih, iw, c) : 0.0;
              for (Index f = 0; f < features; ++f) {
                acc[static_cast<std::size_t>(f)] +=
                    x * static_cast<double>(filter.at(kh, kw, c, f));
              }
              multiplies += static_cast<std::uint64_t>(features);
            }
          }
        }
        for (Index f = 0; f < features; ++f) {
          output.at(n, ho, wo, f) =
              static_cast<float>(acc[static_cast<std::size_t>(f)]);
        }
      }
    }
  }
  if (counter != nullptr) counter->main_stage += multiplies;
  return output;
}

Tensor conv2d_naive_vectorized(Tensor const& input, Filter const& filter,
                               ConvParams const& params) {
  check_operands(input, filter, params);
  Shape4D const out_shape = output_shape(params);
  PadBefore const pad = pad_before(params);
  Tensor output{out_shape};
  Shape4D const& in = params.input;
  Index const features = params.features;
  Index const positions = out_shape.batch * out_shape.rows * out_shape.cols;
  float const* in_data = input.data().data();
  float const* flt = filter.data().data();
  float* out_data = output.data().data();

  parallel_for(positions, [&](Index first, Index last) {
    std::vector<double> acc(static_cast<std::size_t>(features));
    for (Index pos = first; pos < last; ++pos) {
      Index const wo = pos % out_shape.cols;
      Index const ho = (pos / out_shape.cols) % out_shape.rows;
      Index const n = pos / (out_shape.cols * out_shape.rows);
      Index const h0 = ho * params.stride_rows - pad.rows;
      Index const w0 = wo * params.stride_cols - pad.cols;
      // Padding taps contribute nothing, so the window is clipped instead.
      Index const kh_begin = std::max<Index>(0, -h0);
      Index const kh_end = std::min(params.window_rows, in.rows - h0);
      Index const kw_begin = std::max<Index>(0, -w0);
      Index const kw_end = std::min(params.window_cols, in.cols - w0);
      double* a = acc.data();
      std::fill(acc.begin(), acc.end(), 0.0);

      for (Index kh = kh_begin; kh < kh_end; ++kh) {
        for (Index kw = kw_begin; kw < kw_end; ++kw) {
          float const* x = in_data + input.index(n, h0 + kh, w0 + kw, 0);
          float const* w =
              flt + (kh * params.window_cols + kw) * in.channels * features;
          for (Index c = 0; c < in.channels; ++c) {
            double const xv = x[c];
            float const* wc = w + c * features;
            for (Index f = 0; f < features; ++f) a[f] += xv * wc[f];
          }
        }
      }
      float* out_vec = out_data + pos * features;
      for (Index f = 0; f < features; ++f) {
        out_vec[f] = static_cast<float>(a[f]);
      }
    }
  });
  return output;
}

}  // namespace portconv
