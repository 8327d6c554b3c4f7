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

#ifndef PORTCONV_CONV_ALGOS_H_
#define PORTCONV_CONV_ALGOS_H_

#include <array>

#include "portconv/algorithm.h"
#include "portconv/conv_ref.h"
#include "portconv/gemm.h"
#include "portconv/tensor.h"

namespace portconv {

/// Tiled direct convolution parameters: each task computes
/// tile_rows x tile_cols outputs, feature_block features at a time.
struct TileConfig {
  Index tile_rows = 2;
  Index tile_cols = 4;
  Index feature_block = 8;

  void validate() const;
};

/// Winograd F(2x2, 3x3) minimal filtering transforms.
struct WinogradTransforms {
  /// B^T, applied as B^T d B to a 4x4 input tile.
  static constexpr std::array<std::array<double, 4>, 4> input = {{
      {1, 0, -1, 0},
      {0, 1, 1, 0},
      {0, -1, 1, 0},
      {0, 1, 0, -1},
  }};
  /// G, applied as G g G^T to a 3x3 filter.
  static constexpr std::array<std::array<double, 3>, 4> filter = {{
      {1, 0, 0},
      {0.5, 0.5, 0.5},
      {0.5, -0.5, 0.5},
      {0, 0, 1},
  }};
  /// A^T, applied as A^T m A to a 4x4 product tile.
  static constexpr std::array<std::array<double, 4>, 2> output = {{
      {1, 1, 1, 0},
      {0, 1, -1, -1},
  }};
};

using Tile4x4 = std::array<std::array<double, 4>, 4>;
using Tile3x3 = std::array<std::array<double, 3>, 3>;
using Tile2x2 = std::array<std::array<double, 2>, 2>;

Tile4x4 winograd_transform_input(Tile4x4 const& d);
/// `counter` receives the multiplies by the 1/2 constants.
Tile4x4 winograd_transform_filter(Tile3x3 const& g,
                                  MultiplyCounter* counter = nullptr);
Tile2x2 winograd_transform_output(Tile4x4 const& m);

Tensor conv2d_tiled(Tensor const& input, Filter const& filter,
                    ConvParams const& params, TileConfig const& tile = {});

/// Patch matrix of shape (N*Ho*Wo) x (Kh*Kw*C); row r holds the receptive
/// field of output position r in (kh, kw, c) order, zero where padded.
Matrix im2col(Tensor const& input, ConvParams const& params);

Tensor conv2d_im2col(Tensor const& input, Filter const& filter,
                     ConvParams const& params,
                     GemmBlocking const& blocking = {});

/// 1x1 stride-1 fast path: the input viewed as (N*H*W) x C times the filter
/// viewed as C x F.
Tensor conv2d_matmul(Tensor const& input, Filter const& filter,
                     ConvParams const& params,
                     GemmBlocking const& blocking = {});

/// Winograd F(2x2, 3x3) for 3x3 stride-1 convolutions. When `counter` is set
/// the element-wise stage runs through a counting loop instead of the
/// blocked GEMM.
Tensor conv2d_winograd(Tensor const& input, Filter const& filter,
                       ConvParams const& params,
                       GemmBlocking const& blocking = {},
                       MultiplyCounter* counter = nullptr);

/// Analytic real multiplications of an algorithm's main stage and (Winograd
/// only) its filter transform.
struct MultiplyBreakdown {
  Index main_stage;
  Index transforms;
};

MultiplyBreakdown multiply_breakdown(Algorithm alg, ConvParams const& params);
Index multiply_count(Algorithm alg, ConvParams const& params);

/// Runs `alg` with its default tuning parameters. Throws
/// IncompatibleAlgorithmError when !supports(alg, params).
Tensor convolve(Algorithm alg, Tensor const& input, Filter const& filter,
                ConvParams const& params);

}  // namespace portconv

#endif  // PORTCONV_CONV_ALGOS_H_
