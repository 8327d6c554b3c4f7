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

#include <gtest/gtest.h>

#include <random>

#include "portconv/error.h"
#include "portconv/verify.h"

namespace portconv {
namespace {

struct Operands {
  Tensor input;
  Filter filter;
};

Operands random_operands(ConvParams const& p, std::uint64_t seed) {
  return {random_tensor(p.input, seed), random_filter(p, seed + 1)};
}

double error_vs_ref(Algorithm alg, ConvParams const& p, std::uint64_t seed) {
  auto const ops = random_operands(p, seed);
  return max_relative_error(convolve(alg, ops.input, ops.filter, p),
                            conv2d_ref(ops.input, ops.filter, p));
}

TEST(Tiled, PointwiseResnetShape) {
  auto const p = ConvParams::square(1, 1, 56, 56, 64, 256);
  EXPECT_LE(error_vs_ref(Algorithm::Tiled, p, 1), 1e-5);
}

TEST(Tiled, DegenerateTileMatchesNaiveForOneChannel) {
  auto const p = ConvParams::square(3, 1, 6, 7, 1, 1);
  auto const ops = random_operands(p, 2);
  EXPECT_EQ(conv2d_tiled(ops.input, ops.filter, p, {1, 1, 1}),
            conv2d_naive_vectorized(ops.input, ops.filter, p));
}

TEST(Tiled, EdgeTilesMatchOracle) {
  for (Index k : {1, 3, 5}) {
    for (Index s : {1, 2}) {
      auto const p = ConvParams::square(k, s, 7, 5, 6, 19, 2);
      auto const ops = random_operands(p, 3);
      auto const expected = conv2d_ref(ops.input, ops.filter, p);
      for (TileConfig tile : {TileConfig{}, TileConfig{3, 2, 5},
                              TileConfig{4, 4, 16}, TileConfig{1, 7, 3}}) {
        EXPECT_LE(max_relative_error(
                      conv2d_tiled(ops.input, ops.filter, p, tile), expected),
                  1e-5)
            << "k=" << k << " s=" << s;
      }
    }
  }
}

TEST(Tiled, RejectsUnsupportedParams) {
  auto const p = ConvParams::square(7, 2, 16, 16, 3, 8);
  EXPECT_THROW(conv2d_tiled(Tensor{p.input}, Filter{p}, p),
               IncompatibleAlgorithmError);
  auto const q = ConvParams::square(3, 1, 8, 8, 2, 2);
  EXPECT_THROW(conv2d_tiled(Tensor{q.input}, Filter{q}, q, {0, 1, 1}),
               InvalidParamsError);
}

TEST(Im2col, SinglePatchRowMajor) {
  auto const p = ConvParams::square(2, 1, 2, 2, 1, 1, 1, Padding::Valid);
  Tensor const in{p.input, {1.f, 2.f, 3.f, 4.f}};
  EXPECT_EQ(im2col(in, p), (Matrix{1, 4, {1.f, 2.f, 3.f, 4.f}}));
}

TEST(Im2col, PointwiseIsReshape) {
  auto const p = ConvParams::square(1, 1, 3, 4, 5, 2, 2);
  auto const in = random_tensor(p.input, 4);
  auto const m = im2col(in, p);
  EXPECT_EQ(m.rows(), 2 * 3 * 4);
  EXPECT_EQ(m.cols(), 5);
  EXPECT_TRUE(std::equal(m.data().begin(), m.data().end(), in.data().begin()));
}

TEST(Im2col, SameShapeAndZeroPadding) {
  auto const p = ConvParams::square(3, 1, 4, 4, 2, 1);
  auto const in = random_tensor(p.input, 5);
  auto const m = im2col(in, p);
  EXPECT_EQ(m.rows(), 16);
  EXPECT_EQ(m.cols(), 18);
  // Output (0, 0) reads rows/cols -1..1: its first (kh = 0) patch is padding.
  for (Index j = 0; j < 6; ++j) EXPECT_EQ(m.at(0, j), 0.f);
  // Centre tap (kh = 1, kw = 1) of output (0, 0) is input (0, 0).
  EXPECT_EQ(m.at(0, 8), in.at(0, 0, 0, 0));
  EXPECT_EQ(m.at(0, 9), in.at(0, 0, 0, 1));
}

TEST(Im2colConv, ReproducesReferenceExamples) {
  auto const ones = ConvParams::square(2, 1, 2, 2, 1, 1, 1, Padding::Valid);
  Tensor const in{ones.input, {1.f, 1.f, 1.f, 1.f}};
  Filter const flt{2, 2, 1, 1, {1.f, 1.f, 1.f, 1.f}};
  EXPECT_EQ(conv2d_im2col(in, flt, ones).data()[0], 4.f);

  auto const delta = ConvParams::square(1, 1, 5, 6, 1, 1, 2);
  auto const x = random_tensor(delta.input, 6);
  Filter id{delta};
  id.at(0, 0, 0, 0) = 1.f;
  EXPECT_EQ(conv2d_im2col(x, id, delta), x);

  auto const z = ConvParams::square(3, 2, 9, 9, 4, 6, 2);
  auto const zeros = conv2d_im2col(random_tensor(z.input, 7), Filter{z}, z);
  for (float v : zeros.data()) EXPECT_EQ(v, 0.f);
}

TEST(Im2colConv, RandomBatchTwo) {
  EXPECT_LE(error_vs_ref(Algorithm::Im2col,
                         ConvParams::square(3, 1, 14, 14, 64, 64, 2), 8),
            1e-5);
}

TEST(Im2colConv, ResnetConv1) {
  EXPECT_LE(error_vs_ref(Algorithm::Im2col,
                         ConvParams::square(7, 2, 224, 224, 3, 64), 9),
            1e-5);
}

TEST(Matmul, IdentityFilter) {
  auto const p = ConvParams::square(1, 1, 6, 5, 7, 7, 2);
  auto const in = random_tensor(p.input, 10);
  Filter eye{p};
  for (Index c = 0; c < 7; ++c) eye.at(0, 0, c, c) = 1.f;
  EXPECT_EQ(conv2d_matmul(in, eye, p), in);
}

TEST(Matmul, RandomMatchesOracle) {
  EXPECT_LE(error_vs_ref(Algorithm::Matmul,
                         ConvParams::square(1, 1, 28, 28, 128, 512), 11),
            1e-5);
}

TEST(Matmul, RejectsNonPointwise) {
  auto const p = ConvParams::square(3, 1, 8, 8, 2, 2);
  EXPECT_THROW(conv2d_matmul(Tensor{p.input}, Filter{p}, p),
               IncompatibleAlgorithmError);
  auto const q = ConvParams::square(1, 2, 8, 8, 2, 2);
  EXPECT_THROW(conv2d_matmul(Tensor{q.input}, Filter{q}, q),
               IncompatibleAlgorithmError);
}

Tile4x4 input_by_matrices(Tile4x4 const& d) {
  auto const& bt = WinogradTransforms::input;
  Tile4x4 t{}, v{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) t[i][j] += bt[i][k] * d[k][j];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) v[i][j] += t[i][k] * bt[j][k];
  return v;
}

Tile4x4 filter_by_matrices(Tile3x3 const& g) {
  auto const& gm = WinogradTransforms::filter;
  std::array<std::array<double, 3>, 4> t{};
  Tile4x4 u{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) t[i][j] += gm[i][k] * g[k][j];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 3; ++k) u[i][j] += t[i][k] * gm[j][k];
  return u;
}

Tile2x2 output_by_matrices(Tile4x4 const& m) {
  auto const& at = WinogradTransforms::output;
  std::array<std::array<double, 4>, 2> t{};
  Tile2x2 y{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) t[i][j] += at[i][k] * m[k][j];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 4; ++k) y[i][j] += t[i][k] * at[j][k];
  return y;
}

TEST(WinogradTransforms, ExplicitFormsMatchConstantMatrices) {
  std::mt19937 rng{12};
  std::uniform_real_distribution<double> dist{-1, 1};
  for (int trial = 0; trial < 20; ++trial) {
    Tile4x4 d{};
    Tile3x3 g{};
    for (auto& row : d) for (auto& v : row) v = dist(rng);
    for (auto& row : g) for (auto& v : row) v = dist(rng);
    auto const v1 = winograd_transform_input(d);
    auto const v2 = input_by_matrices(d);
    auto const u1 = winograd_transform_filter(g);
    auto const u2 = filter_by_matrices(g);
    auto const y1 = winograd_transform_output(d);
    auto const y2 = output_by_matrices(d);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        EXPECT_NEAR(v1[i][j], v2[i][j], 1e-12);
        EXPECT_NEAR(u1[i][j], u2[i][j], 1e-12);
      }
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_NEAR(y1[i][j], y2[i][j], 1e-12);
  }
}

TEST(WinogradTransforms, ZeroTileStaysZero) {
  for (auto const& row : winograd_transform_input(Tile4x4{}))
    for (double v : row) EXPECT_EQ(v, 0.0);
  for (auto const& row : winograd_transform_filter(Tile3x3{}))
    for (double v : row) EXPECT_EQ(v, 0.0);
}

TEST(WinogradTransforms, SingleTileEqualsDirectConvolution) {
  std::mt19937 rng{13};
  std::uniform_real_distribution<double> dist{-1, 1};
  for (int trial = 0; trial < 20; ++trial) {
    Tile4x4 d{};
    Tile3x3 g{};
    for (auto& row : d) for (auto& v : row) v = dist(rng);
    for (auto& row : g) for (auto& v : row) v = dist(rng);
    auto const v = winograd_transform_input(d);
    auto const u = winograd_transform_filter(g);
    Tile4x4 m{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m[i][j] = u[i][j] * v[i][j];
    auto const y = winograd_transform_output(m);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double direct = 0;
        for (int kh = 0; kh < 3; ++kh)
          for (int kw = 0; kw < 3; ++kw) direct += d[i + kh][j + kw] * g[kh][kw];
        EXPECT_LE(std::abs(y[i][j] - direct),
                  1e-4 * std::max(std::abs(direct), 1e-6));
      }
  }
}

TEST(Winograd, ZeroFilter) {
  auto const p = ConvParams::square(3, 1, 9, 7, 4, 5);
  auto const y = conv2d_winograd(random_tensor(p.input, 14), Filter{p}, p);
  for (float v : y.data()) EXPECT_EQ(v, 0.f);
}

TEST(Winograd, DeltaFilterIsIdentity) {
  auto const p = ConvParams::square(3, 1, 7, 6, 1, 1, 2);
  auto const in = random_tensor(p.input, 15);
  Filter delta{p};
  delta.at(1, 1, 0, 0) = 1.f;
  EXPECT_EQ(conv2d_winograd(in, delta, p), in);
}

TEST(Winograd, RandomMatchesOracle) {
  EXPECT_LE(error_vs_ref(Algorithm::Winograd,
                         ConvParams::square(3, 1, 28, 28, 64, 64), 16),
            1e-4);
}

TEST(Winograd, OddExtentsAndValidPadding) {
  for (auto pad : {Padding::Same, Padding::Valid}) {
    for (Index h : {3, 4, 5, 8, 11}) {
      auto const p = ConvParams::square(3, 1, h, 9, 3, 4, 2, pad);
      EXPECT_LE(error_vs_ref(Algorithm::Winograd, p, 17), 1e-4) << h;
    }
  }
}

TEST(Winograd, RejectsUnsupportedParams) {
  auto const p = ConvParams::square(7, 2, 16, 16, 3, 8);
  EXPECT_THROW(conv2d_winograd(Tensor{p.input}, Filter{p}, p),
               IncompatibleAlgorithmError);
  auto const q = ConvParams::square(3, 2, 16, 16, 3, 8);
  EXPECT_THROW(conv2d_winograd(Tensor{q.input}, Filter{q}, q),
               IncompatibleAlgorithmError);
}

TEST(MultiplyCount, DirectIsWindowAreaPerOutput) {
  auto const p = ConvParams::square(3, 1, 10, 12, 1, 1);
  EXPECT_EQ(multiply_count(Algorithm::Direct, p), 9 * 10 * 12);
}

TEST(MultiplyCount, MatmulIsChannelsPerOutputFeature) {
  auto const p = ConvParams::square(1, 1, 5, 6, 16, 4);
  EXPECT_EQ(multiply_count(Algorithm::Matmul, p), 5 * 6 * 4 * 16);
}

TEST(MultiplyCount, InstrumentedSingleTileRatio) {
  // One 4x4 Valid tile -> one 2x2 output tile per (c, f) pair.
  auto const p = ConvParams::square(3, 1, 4, 4, 1, 1, 1, Padding::Valid);
  auto const in = random_tensor(p.input, 18);
  auto const flt = random_filter(p, 19);
  MultiplyCounter direct;
  MultiplyCounter winograd;
  auto const expected = conv2d_ref(in, flt, p, &direct);
  auto const actual = conv2d_winograd(in, flt, p, {}, &winograd);
  EXPECT_EQ(direct.main_stage, 36u);
  EXPECT_EQ(winograd.main_stage, 16u);
  EXPECT_EQ(winograd.transforms, 14u);
  EXPECT_DOUBLE_EQ(static_cast<double>(direct.main_stage) /
                       static_cast<double>(winograd.main_stage),
                   2.25);
  EXPECT_LE(max_relative_error(actual, expected), 1e-4);
}

TEST(MultiplyCount, InstrumentedMatchesAnalytic) {
  for (auto const& p : {ConvParams::square(3, 1, 8, 6, 3, 5, 2),
                        ConvParams::square(3, 1, 7, 9, 2, 3),
                        ConvParams::square(3, 1, 10, 6, 2, 2, 1,
                                           Padding::Valid)}) {
    auto const in = random_tensor(p.input, 20);
    auto const flt = random_filter(p, 21);
    MultiplyCounter direct, winograd;
    conv2d_ref(in, flt, p, &direct);
    conv2d_winograd(in, flt, p, {}, &winograd);
    auto const analytic = multiply_breakdown(Algorithm::Winograd, p);
    EXPECT_EQ(static_cast<Index>(winograd.main_stage), analytic.main_stage);
    EXPECT_EQ(static_cast<Index>(winograd.transforms), analytic.transforms);
    EXPECT_EQ(static_cast<Index>(direct.main_stage),
              multiply_count(Algorithm::Direct, p));
  }
}

TEST(MultiplyCount, WinogradRatioForEvenOutputs) {
  for (Index h : {2, 4, 14, 28, 56}) {
    for (Index c : {1, 3, 64}) {
      auto const p = ConvParams::square(3, 1, h, h + 2, c, 2 * c, 2);
      EXPECT_EQ(multiply_count(Algorithm::Direct, p) * 16,
                multiply_count(Algorithm::Winograd, p) * 36);
    }
  }
}

TEST(MultiplyCount, IncompatibleRejected) {
  EXPECT_THROW(multiply_count(Algorithm::Winograd,
                              ConvParams::square(5, 1, 8, 8, 1, 1)),
               IncompatibleAlgorithmError);
}

TEST(Equivalence, SmallFuzzAllAlgorithms) {
  auto const configs = fuzz_configs(60, 99);
  ASSERT_EQ(configs.size(), 60u);
  auto const report = check_equivalence(configs, {}, 99);
  for (auto const& f : report.failures) {
    ADD_FAILURE() << to_string(f.algorithm) << " " << describe(f.params)
                  << " err=" << f.error;
  }
  for (auto const& p : configs) {
    EXPECT_EQ(conv2d_im2col(Tensor{p.input}, Filter{p}, p).shape(),
              output_shape(p));
  }
}

TEST(Equivalence, InjectedFaultIsCaught) {
  auto const configs = fuzz_configs(5, 1, {Algorithm::Winograd});
  auto const report =
      check_equivalence(configs, {Algorithm::Winograd}, 1, Algorithm::Winograd);
  EXPECT_FALSE(report.passed());
}

}  // namespace
}  // namespace portconv
