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

#include "portconv/conv_algos.h"

#include <algorithm>
#include <string>
#include <utility>

#include "portconv/error.h"
#include "portconv/parallel.h"

namespace portconv {

void TileConfig::validate() const {
  if (tile_rows < 1 || tile_cols < 1 || feature_block < 1) {
    throw InvalidParamsError("tile extents must be >= 1");
  }
}

namespace {

void require_support(Algorithm alg, ConvParams const& params) {
  if (!supports(alg, params)) {
    throw IncompatibleAlgorithmError(
        std::string{to_string(alg)} + " does not support window " +
        std::to_string(params.window_rows) + "x" +
        std::to_string(params.window_cols) + " stride " +
        std::to_string(params.stride_rows) + "x" +
        std::to_string(params.stride_cols));
  }
}

// Inputs of one tile for a fixed (kh, kw): pointer to the channel vector
// feeding each output, or a zero vector for padding.
struct TileTaps {
  std::vector<float const*> x;
  std::vector<float> zeros;
};

void gather_taps(float const* in_data, Tensor const& input,
                 ConvParams const& params, PadBefore pad, Index n, Index ho0,
                 Index wo0, Index tr, Index tc, Index kh, Index kw,
                 TileTaps& taps) {
  for (Index i = 0; i < tr; ++i) {
    Index const ih = (ho0 + i) * params.stride_rows + kh - pad.rows;
    for (Index j = 0; j < tc; ++j) {
      Index const iw = (wo0 + j) * params.stride_cols + kw - pad.cols;
      bool const inside = ih >= 0 && ih < params.input.rows && iw >= 0 &&
                          iw < params.input.cols;
      taps.x[static_cast<std::size_t>(i * tc + j)] =
          inside ? in_data + input.index(n, ih, iw, 0) : taps.zeros.data();
    }
  }
}

using Double4 = double __attribute__((vector_size(32)));
using Float4 = float __attribute__((vector_size(16)));

inline Double4 load_widen(float const* p) {
  Float4 v;
  __builtin_memcpy(&v, p, sizeof(v));
  return __builtin_convertvector(v, Double4);
}

// Full tile with compile-time extents: the TR*TC*FB accumulators stay in
// registers and every filter vector is reused across the whole tile.
template <Index TR, Index TC, Index FB>
void tiled_kernel(float const* in_data, Tensor const& input, float const* flt,
                  ConvParams const& params, PadBefore pad, Index n, Index ho0,
                  Index wo0, Index f0, TileTaps& taps, float* out_data,
                  Shape4D const& out_shape) {
  static_assert(FB % 4 == 0);
  constexpr Index kLanes = FB / 4;
  Index const features = params.features;
  Index const channels = params.input.channels;
  Double4 acc[TR * TC][kLanes] = {};
  for (Index kh = 0; kh < params.window_rows; ++kh) {
    for (Index kw = 0; kw < params.window_cols; ++kw) {
      gather_taps(in_data, input, params, pad, n, ho0, wo0, TR, TC, kh, kw,
                  taps);
      float const* w_base =
          flt + (kh * params.window_cols + kw) * channels * features + f0;
      float const* const* x = taps.x.data();
      for (Index c = 0; c < channels; ++c) {
        Double4 w[kLanes];
        for (Index l = 0; l < kLanes; ++l) {
          w[l] = load_widen(w_base + c * features + 4 * l);
        }
        for (Index t = 0; t < TR * TC; ++t) {
          double const xv = x[t][c];
          for (Index l = 0; l < kLanes; ++l) acc[t][l] += xv * w[l];
        }
      }
    }
  }
  for (Index t = 0; t < TR * TC; ++t) {
    float* dst = out_data +
                 ((n * out_shape.rows + ho0 + t / TC) * out_shape.cols + wo0 +
                  t % TC) * features + f0;
    for (Index l = 0; l < kLanes; ++l) {
      for (int q = 0; q < 4; ++q) dst[4 * l + q] = static_cast<float>(acc[t][l][q]);
    }
  }
}

// Edge tiles and narrow feature blocks.
void tiled_generic(float const* in_data, Tensor const& input,
                   float const* flt, ConvParams const& params, PadBefore pad,
                   Index n, Index ho0, Index wo0, Index tr, Index tc, Index f0,
                   Index width, TileTaps& taps, std::vector<double>& acc,
                   float* out_data, Shape4D const& out_shape) {
  Index const features = params.features;
  Index const channels = params.input.channels;
  std::fill(acc.begin(), acc.end(), 0.0);
  for (Index kh = 0; kh < params.window_rows; ++kh) {
    for (Index kw = 0; kw < params.window_cols; ++kw) {
      gather_taps(in_data, input, params, pad, n, ho0, wo0, tr, tc, kh, kw,
                  taps);
      float const* w_base =
          flt + (kh * params.window_cols + kw) * channels * features + f0;
      for (Index c = 0; c < channels; ++c) {
        float const* wc = w_base + c * features;
        for (Index t = 0; t < tr * tc; ++t) {
          double const xv = taps.x[static_cast<std::size_t>(t)][c];
          double* a = acc.data() + t * width;
          for (Index q = 0; q < width; ++q) a[q] += xv * wc[q];
        }
      }
    }
  }
  for (Index t = 0; t < tr * tc; ++t) {
    float* dst = out_data +
                 ((n * out_shape.rows + ho0 + t / tc) * out_shape.cols + wo0 +
                  t % tc) * features + f0;
    double const* a = acc.data() + t * width;
    for (Index q = 0; q < width; ++q) dst[q] = static_cast<float>(a[q]);
  }
}

}  // namespace

Tensor conv2d_tiled(Tensor const& input, Filter const& filter,
                    ConvParams const& params, TileConfig const& tile) {
  check_operands(input, filter, params);
  require_support(Algorithm::Tiled, params);
  tile.validate();
  Shape4D const out_shape = output_shape(params);
  PadBefore const pad = pad_before(params);
  Tensor output{out_shape};
  Index const grid_rows = (out_shape.rows + tile.tile_rows - 1) / tile.tile_rows;
  Index const grid_cols = (out_shape.cols + tile.tile_cols - 1) / tile.tile_cols;
  Index const tasks = out_shape.batch * grid_rows * grid_cols;
  float const* in_data = input.data().data();
  float const* flt = filter.data().data();
  float* out_data = output.data().data();
  Index const features = params.features;
  Index const fb = tile.feature_block;

  bool const fast = tile.tile_rows == 2 && tile.tile_cols == 4 && fb == 8;

  parallel_for(tasks, [&](Index first, Index last) {
    std::vector<double> acc(
        static_cast<std::size_t>(tile.tile_rows * tile.tile_cols * fb));
    TileTaps taps{std::vector<float const*>(static_cast<std::size_t>(
                      tile.tile_rows * tile.tile_cols)),
                  std::vector<float>(
                      static_cast<std::size_t>(params.input.channels), 0.f)};
    for (Index t = first; t < last; ++t) {
      Index const gx = t % grid_cols;
      Index const gy = (t / grid_cols) % grid_rows;
      Index const n = t / (grid_cols * grid_rows);
      Index const ho0 = gy * tile.tile_rows;
      Index const wo0 = gx * tile.tile_cols;
      Index const tr = std::min(tile.tile_rows, out_shape.rows - ho0);
      Index const tc = std::min(tile.tile_cols, out_shape.cols - wo0);
      // The feature extent is padded logically to a multiple of fb; the
      // last block simply runs narrower.
      for (Index f0 = 0; f0 < features; f0 += fb) {
        Index const width = std::min(fb, features - f0);
        if (fast && tr == 2 && tc == 4 && width == 8) {
          tiled_kernel<2, 4, 8>(in_data, input, flt, params, pad, n, ho0, wo0,
                                f0, taps, out_data, out_shape);
        } else {
          tiled_generic(in_data, input, flt, params, pad, n, ho0, wo0, tr, tc,
                        f0, width, taps, acc, out_data, out_shape);
        }
      }
    }
  });
  return output;
}

namespace {

// Writes the (Ho*Wo) x (Kh*Kw*C) patch matrix of image `n` to `dst`.
void im2col_image(Tensor const& input, ConvParams const& params,
                  Shape4D const& out_shape, PadBefore pad, Index n,
                  float* dst) {
  Index const channels = params.input.channels;
  Index const row_len = params.window_rows * params.window_cols * channels;
  float const* in_data = input.data().data();
  parallel_for(out_shape.rows, [&](Index first, Index last) {
    for (Index ho = first; ho < last; ++ho) {
      for (Index wo = 0; wo < out_shape.cols; ++wo) {
        float* row = dst + (ho * out_shape.cols + wo) * row_len;
        for (Index kh = 0; kh < params.window_rows; ++kh) {
          Index const ih = ho * params.stride_rows + kh - pad.rows;
          for (Index kw = 0; kw < params.window_cols; ++kw) {
            Index const iw = wo * params.stride_cols + kw - pad.cols;
            float* patch = row + (kh * params.window_cols + kw) * channels;
            if (ih < 0 || ih >= params.input.rows || iw < 0 ||
                iw >= params.input.cols) {
              std::fill(patch, patch + channels, 0.f);
            } else {
              float const* src = in_data + input.index(n, ih, iw, 0);
              std::copy(src, src + channels, patch);
            }
          }
        }
      }
    }
  });
}

MatrixView<float const> filter_matrix(Filter const& filter) {
  return {filter.window_rows() * filter.window_cols() * filter.in_channels(),
          filter.features(), filter.data().data()};
}

}  // namespace

Matrix im2col(Tensor const& input, ConvParams const& params) {
  params.validate();
  if (!(input.shape() == params.input)) {
    throw ShapeMismatchError("input shape does not match convolution params");
  }
  Shape4D const out_shape = output_shape(params);
  PadBefore const pad = pad_before(params);
  Index const per_image = out_shape.rows * out_shape.cols;
  Index const row_len = checked_mul(
      params.window_rows * params.window_cols, params.input.channels);
  Matrix patches{checked_mul(out_shape.batch, per_image), row_len};
  for (Index n = 0; n < out_shape.batch; ++n) {
    im2col_image(input, params, out_shape, pad, n,
                 patches.data().data() + n * per_image * row_len);
  }
  return patches;
}

Tensor conv2d_im2col(Tensor const& input, Filter const& filter,
                     ConvParams const& params, GemmBlocking const& blocking) {
  check_operands(input, filter, params);
  Shape4D const out_shape = output_shape(params);
  PadBefore const pad = pad_before(params);
  Tensor output{out_shape};
  Index const per_image = out_shape.rows * out_shape.cols;
  Index const row_len = checked_mul(
      params.window_rows * params.window_cols, params.input.channels);
  std::vector<float> patches(
      static_cast<std::size_t>(checked_mul(per_image, row_len)));
  for (Index n = 0; n < out_shape.batch; ++n) {
    im2col_image(input, params, out_shape, pad, n, patches.data());
    MatrixView<float const> lhs{per_image, row_len, patches.data()};
    MatrixView<float> out{per_image, params.features,
                          output.data().data() + n * per_image *
                                                     params.features};
    gemm_blocked_into(lhs, filter_matrix(filter), out, blocking);
  }
  return output;
}

Tensor conv2d_matmul(Tensor const& input, Filter const& filter,
                     ConvParams const& params, GemmBlocking const& blocking) {
  check_operands(input, filter, params);
  require_support(Algorithm::Matmul, params);
  Shape4D const out_shape = output_shape(params);
  Tensor output{out_shape};
  Index const pixels =
      params.input.batch * params.input.rows * params.input.cols;
  MatrixView<float const> lhs{pixels, params.input.channels,
                              input.data().data()};
  MatrixView<float> out{pixels, params.features, output.data().data()};
  gemm_blocked_into(lhs, filter_matrix(filter), out, blocking);
  return output;
}

Tile4x4 winograd_transform_input(Tile4x4 const& d) {
  // t = B^T d, then t B.
  Tile4x4 t{};
  for (int j = 0; j < 4; ++j) {
    t[0][j] = d[0][j] - d[2][j];
    t[1][j] = d[1][j] + d[2][j];
    t[2][j] = d[2][j] - d[1][j];
    t[3][j] = d[1][j] - d[3][j];
  }
  Tile4x4 v{};
  for (int i = 0; i < 4; ++i) {
    v[i][0] = t[i][0] - t[i][2];
    v[i][1] = t[i][1] + t[i][2];
    v[i][2] = t[i][2] - t[i][1];
    v[i][3] = t[i][1] - t[i][3];
  }
  return v;
}

Tile4x4 winograd_transform_filter(Tile3x3 const& g, MultiplyCounter* counter) {
  // t = G g, then t G^T.
  std::array<std::array<double, 3>, 4> t{};
  for (int j = 0; j < 3; ++j) {
    t[0][j] = g[0][j];
    t[1][j] = 0.5 * (g[0][j] + g[1][j] + g[2][j]);
    t[2][j] = 0.5 * (g[0][j] - g[1][j] + g[2][j]);
    t[3][j] = g[2][j];
  }
  Tile4x4 u{};
  for (int i = 0; i < 4; ++i) {
    u[i][0] = t[i][0];
    u[i][1] = 0.5 * (t[i][0] + t[i][1] + t[i][2]);
    u[i][2] = 0.5 * (t[i][0] - t[i][1] + t[i][2]);
    u[i][3] = t[i][2];
  }
  if (counter != nullptr) counter->transforms += 14;
  return u;
}

Tile2x2 winograd_transform_output(Tile4x4 const& m) {
  // t = A^T m, then t A.
  std::array<std::array<double, 4>, 2> t{};
  for (int j = 0; j < 4; ++j) {
    t[0][j] = m[0][j] + m[1][j] + m[2][j];
    t[1][j] = m[1][j] - m[2][j] - m[3][j];
  }
  Tile2x2 y{};
  for (int i = 0; i < 2; ++i) {
    y[i][0] = t[i][0] + t[i][1] + t[i][2];
    y[i][1] = t[i][1] - t[i][2] - t[i][3];
  }
  return y;
}

namespace {

constexpr int kWinogradPoints = 16;

using DMatrix = BasicMatrix<double>;

// Element-wise stage through a plain loop that counts each multiply.
void counted_gemm(DMatrix const& a, DMatrix const& b, DMatrix& c,
                  MultiplyCounter& counter) {
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) {
      double acc = 0;
      for (Index p = 0; p < a.cols(); ++p) {
        acc += a.at(i, p) * b.at(p, j);
        ++counter.main_stage;
      }
      c.at(i, j) = acc;
    }
  }
}

}  // namespace

Tensor conv2d_winograd(Tensor const& input, Filter const& filter,
                       ConvParams const& params, GemmBlocking const& blocking,
                       MultiplyCounter* counter) {
  check_operands(input, filter, params);
  require_support(Algorithm::Winograd, params);
  Shape4D const out_shape = output_shape(params);
  PadBefore const pad = pad_before(params);
  Tensor output{out_shape};
  Index const channels = params.input.channels;
  Index const features = params.features;
  // Odd output extents round the tile grid up; surplus outputs are dropped.
  Index const tiles_y = (out_shape.rows + 1) / 2;
  Index const tiles_x = (out_shape.cols + 1) / 2;
  Index const tiles = tiles_y * tiles_x;

  std::vector<DMatrix> u(kWinogradPoints, DMatrix{channels, features});
  for (Index c = 0; c < channels; ++c) {
    for (Index f = 0; f < features; ++f) {
      Tile3x3 g{};
      for (int kh = 0; kh < 3; ++kh)
        for (int kw = 0; kw < 3; ++kw) g[kh][kw] = filter.at(kh, kw, c, f);
      Tile4x4 const ug = winograd_transform_filter(g, counter);
      for (int xi = 0; xi < kWinogradPoints; ++xi) {
        u[static_cast<std::size_t>(xi)].at(c, f) = ug[xi / 4][xi % 4];
      }
    }
  }

  std::vector<DMatrix> v(kWinogradPoints, DMatrix{tiles, channels});
  std::vector<DMatrix> m(kWinogradPoints, DMatrix{tiles, features});
  Shape4D const& in = params.input;

  for (Index n = 0; n < in.batch; ++n) {
    parallel_for(tiles, [&](Index first, Index last) {
      for (Index t = first; t < last; ++t) {
        Index const r0 = (t / tiles_x) * 2 - pad.rows;
        Index const c0 = (t % tiles_x) * 2 - pad.cols;
        for (Index c = 0; c < channels; ++c) {
          Tile4x4 d{};
          for (int i = 0; i < 4; ++i) {
            Index const ih = r0 + i;
            if (ih < 0 || ih >= in.rows) continue;
            for (int j = 0; j < 4; ++j) {
              Index const iw = c0 + j;
              if (iw < 0 || iw >= in.cols) continue;
              d[i][j] = input.at(n, ih, iw, c);
            }
          }
          Tile4x4 const vd = winograd_transform_input(d);
          for (int xi = 0; xi < kWinogradPoints; ++xi) {
            v[static_cast<std::size_t>(xi)].at(t, c) = vd[xi / 4][xi % 4];
          }
        }
      }
    });

    for (std::size_t xi = 0; xi < kWinogradPoints; ++xi) {
      if (counter != nullptr) {
        counted_gemm(v[xi], u[xi], m[xi], *counter);
      } else {
        gemm_blocked_into(view(std::as_const(v[xi])),
                          view(std::as_const(u[xi])), view(m[xi]), blocking);
      }
    }

    parallel_for(tiles, [&](Index first, Index last) {
      for (Index t = first; t < last; ++t) {
        Index const ho0 = (t / tiles_x) * 2;
        Index const wo0 = (t % tiles_x) * 2;
        for (Index f = 0; f < features; ++f) {
          Tile4x4 mt{};
          for (int xi = 0; xi < kWinogradPoints; ++xi) {
            mt[xi / 4][xi % 4] = m[static_cast<std::size_t>(xi)].at(t, f);
          }
          Tile2x2 const y = winograd_transform_output(mt);
          for (int i = 0; i < 2; ++i) {
            if (ho0 + i >= out_shape.rows) continue;
            for (int j = 0; j < 2; ++j) {
              if (wo0 + j >= out_shape.cols) continue;
              output.at(n, ho0 + i, wo0 + j, f) = static_cast<float>(y[i][j]);
            }
          }
        }
      }
    });
  }
  return output;
}

MultiplyBreakdown multiply_breakdown(Algorithm alg, ConvParams const& params) {
  require_support(alg, params);
  Shape4D const out = output_shape(params);
  Index const cf = checked_mul(params.input.channels, params.features);
  if (alg == Algorithm::Winograd) {
    Index const tiles =
        checked_mul(out.batch, ((out.rows + 1) / 2) * ((out.cols + 1) / 2));
    return {checked_mul(checked_mul(tiles, kWinogradPoints), cf),
            checked_mul(14, cf)};
  }
  return {flop_count(params) / 2, 0};
}

Index multiply_count(Algorithm alg, ConvParams const& params) {
  return multiply_breakdown(alg, params).main_stage;
}

Tensor convolve(Algorithm alg, Tensor const& input, Filter const& filter,
                ConvParams const& params) {
  require_support(alg, params);
  switch (alg) {
    case Algorithm::Direct:
      return conv2d_ref(input, filter, params);
    case Algorithm::NaiveVectorized:
      return conv2d_naive_vectorized(input, filter, params);
    case Algorithm::Tiled:
      return conv2d_tiled(input, filter, params);
    case Algorithm::Im2col:
      return conv2d_im2col(input, filter, params);
    case Algorithm::Matmul:
      return conv2d_matmul(input, filter, params);
    case Algorithm::Winograd:
      return conv2d_winograd(input, filter, params);
  }
  throw IncompatibleAlgorithmError("unknown algorithm");
}

}  // namespace portconv
