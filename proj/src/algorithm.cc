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

#include "portconv/algorithm.h"

namespace portconv {

std::string_view to_string(Algorithm alg) noexcept {
  switch (alg) {
    case Algorithm::Direct:
      return "direct";
    case Algorithm::NaiveVectorized:
      return "naive_vectorized";
    case Algorithm::Tiled:
      return "tiled";
    case Algorithm::Im2col:
      return "im2col";
    case Algorithm::Matmul:
      return "matmul";
    case Algorithm::Winograd:
      return "winograd";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept {
  for (Algorithm alg : kAllAlgorithms) {
    if (to_string(alg) == name) return alg;
  }
  return std::nullopt;
}

bool supports(Algorithm alg, ConvParams const& params) {
  bool const square = params.window_rows == params.window_cols &&
                      params.stride_rows == params.stride_cols;
  Index const k = params.window_rows;
  Index const s = params.stride_rows;
  switch (alg) {
    case Algorithm::Direct:
    case Algorithm::NaiveVectorized:
    case Algorithm::Im2col:
      return true;
    case Algorithm::Matmul:
      return square && k == 1 && s == 1;
    case Algorithm::Winograd:
      return square && k == 3 && s == 1;
    case Algorithm::Tiled:
      return square && (k == 1 || k == 3 || k == 5) && (s == 1 || s == 2);
  }
  return false;
}

}  // namespace portconv
