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

#ifndef PORTCONV_ALGORITHM_H_
#define PORTCONV_ALGORITHM_H_

#include <array>
#include <optional>
#include <string_view>

#include "portconv/tensor.h"

namespace portconv {

/// The interchangeable forward convolution implementations. The enumerator
/// order is the tie-break order used when rankings are otherwise equal.
enum class Algorithm {
  Direct,
  NaiveVectorized,
  Tiled,
  Im2col,
  Matmul,
  Winograd,
};

inline constexpr std::array<Algorithm, 6> kAllAlgorithms = {
    Algorithm::Direct, Algorithm::NaiveVectorized, Algorithm::Tiled,
    Algorithm::Im2col, Algorithm::Matmul,          Algorithm::Winograd};

/// Lower-case name used in files and on the command line, e.g. "im2col".
std::string_view to_string(Algorithm alg) noexcept;
std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept;

/// True when `alg` can compute `params`:
///   Matmul   window 1x1, stride 1x1
///   Winograd window 3x3, stride 1x1
///   Tiled    square window in {1, 3, 5}, square stride in {1, 2}
///   Direct, NaiveVectorized, Im2col always.
bool supports(Algorithm alg, ConvParams const& params);

}  // namespace portconv

#endif  // PORTCONV_ALGORITHM_H_
