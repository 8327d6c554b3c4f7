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

#ifndef PORTCONV_VERIFY_H_
#define PORTCONV_VERIFY_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "portconv/algorithm.h"
#include "portconv/tensor.h"

namespace portconv {

/// Largest max_relative_error against conv2d_ref an algorithm may show:
/// 1e-4 for Winograd, 1e-5 otherwise.
double tolerance_for(Algorithm alg) noexcept;

/// Bounds of the randomly sampled convolution space.
struct FuzzBounds {
  Index max_spatial = 20;
  Index max_channels = 32;
  Index max_batch = 3;
  std::vector<Index> windows = {1, 3, 5, 7};
  std::vector<Index> strides = {1, 2};
};

/// `count` valid configurations, each compatible with at least one of
/// `algorithms` (all algorithms when empty). Deterministic in `seed`.
std::vector<ConvParams> fuzz_configs(Index count, std::uint64_t seed,
                                     std::vector<Algorithm> const& algorithms =
                                         {},
                                     FuzzBounds const& bounds = {});

/// The built-in ResNet-50 suite at batch 1 with spatial extents clamped to
/// `max_spatial`.
std::vector<ConvParams> reduced_resnet50(Index max_spatial = 14);

struct EquivalenceFailure {
  ConvParams params;
  Algorithm algorithm;
  double error;
};

struct EquivalenceReport {
  Index configs_checked = 0;
  Index comparisons = 0;
  std::map<Algorithm, double> worst;
  std::vector<EquivalenceFailure> failures;

  bool passed() const noexcept { return failures.empty(); }
};

/// Runs every compatible algorithm from `algorithms` (all when empty) on
/// random operands and compares it with conv2d_ref. `inject_fault`
/// perturbs one output element of that algorithm by 1e-2 relative.
EquivalenceReport check_equivalence(
    std::vector<ConvParams> const& configs,
    std::vector<Algorithm> const& algorithms, std::uint64_t seed,
    std::optional<Algorithm> inject_fault = std::nullopt);

/// "K S HxW C->F batch N padding" description for diagnostics.
std::string describe(ConvParams const& params);

}  // namespace portconv

#endif  // PORTCONV_VERIFY_H_
