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

#include "portconv/verify.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "portconv/bench.h"
#include "portconv/conv_algos.h"
#include "portconv/conv_ref.h"

namespace portconv {

double tolerance_for(Algorithm alg) noexcept {
  return alg == Algorithm::Winograd ? 1e-4 : 1e-5;
}

namespace {

bool any_compatible(std::vector<Algorithm> const& algorithms,
                    ConvParams const& params) {
  if (algorithms.empty()) return true;
  return std::any_of(algorithms.begin(), algorithms.end(),
                     [&](Algorithm a) { return supports(a, params); });
}

}  // namespace

std::vector<ConvParams> fuzz_configs(Index count, std::uint64_t seed,
                                     std::vector<Algorithm> const& algorithms,
                                     FuzzBounds const& bounds) {
  std::mt19937_64 rng{seed};
  auto uniform = [&](Index lo, Index hi) {
    return std::uniform_int_distribution<Index>{lo, hi}(rng);
  };
  auto pick = [&](std::vector<Index> const& values) {
    return values[static_cast<std::size_t>(
        uniform(0, static_cast<Index>(values.size()) - 1))];
  };
  std::vector<ConvParams> configs;
  // Rejection sampling; a filter that no config can satisfy stops after a
  // bounded number of draws.
  Index attempts = 0;
  Index const max_attempts = std::max<Index>(count, 1) * 1000;
  while (static_cast<Index>(configs.size()) < count &&
         attempts++ < max_attempts) {
    Index const k = pick(bounds.windows);
    Index const s = pick(bounds.strides);
    ConvParams p = ConvParams::square(
        k, s, uniform(1, bounds.max_spatial), uniform(1, bounds.max_spatial),
        uniform(1, bounds.max_channels), uniform(1, bounds.max_channels),
        uniform(1, bounds.max_batch),
        uniform(0, 1) == 0 ? Padding::Same : Padding::Valid);
    if (p.padding == Padding::Valid &&
        (k > p.input.rows || k > p.input.cols)) {
      continue;
    }
    if (!any_compatible(algorithms, p)) continue;
    configs.push_back(p);
  }
  return configs;
}

std::vector<ConvParams> reduced_resnet50(Index max_spatial) {
  std::vector<ConvParams> out;
  for (auto const& config : resnet50_configs(1)) {
    ConvParams p = config.params;
    p.input.rows = std::min(p.input.rows, max_spatial);
    p.input.cols = std::min(p.input.cols, max_spatial);
    out.push_back(p);
  }
  return out;
}

EquivalenceReport check_equivalence(std::vector<ConvParams> const& configs,
                                    std::vector<Algorithm> const& algorithms,
                                    std::uint64_t seed,
                                    std::optional<Algorithm> inject_fault) {
  std::vector<Algorithm> const selected =
      algorithms.empty()
          ? std::vector<Algorithm>{kAllAlgorithms.begin(), kAllAlgorithms.end()}
          : algorithms;
  EquivalenceReport report;
  for (Algorithm alg : selected) report.worst[alg] = 0.0;

  std::uint64_t case_seed = seed;
  for (auto const& params : configs) {
    if (!any_compatible(selected, params)) continue;
    ++report.configs_checked;
    Tensor const input = random_tensor(params.input, case_seed++);
    Filter const filter = random_filter(params, case_seed++);
    Tensor const expected = conv2d_ref(input, filter, params);
    for (Algorithm alg : selected) {
      if (!supports(alg, params)) continue;
      Tensor actual = convolve(alg, input, filter, params);
      if (inject_fault && *inject_fault == alg) {
        float& v = actual.data()[0];
        v += 1e-2f * std::max(1.f, std::abs(v));
      }
      double const err = max_relative_error(expected, actual);
      ++report.comparisons;
      report.worst[alg] = std::max(report.worst[alg], err);
      if (!(err <= tolerance_for(alg))) {
        report.failures.push_back({params, alg, err});
      }
    }
  }
  return report;
}

std::string describe(ConvParams const& p) {
  return "K=" + std::to_string(p.window_rows) + "x" +
         std::to_string(p.window_cols) + " S=" + std::to_string(p.stride_rows) +
         "x" + std::to_string(p.stride_cols) + " " +
         std::to_string(p.input.rows) + "x" + std::to_string(p.input.cols) +
         " C=" + std::to_string(p.input.channels) +
         " F=" + std::to_string(p.features) +
         " N=" + std::to_string(p.input.batch) +
         (p.padding == Padding::Same ? " Same" : " Valid");
}

}  // namespace portconv
