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

#ifndef PORTCONV_SELECTOR_H_
#define PORTCONV_SELECTOR_H_

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "portconv/algorithm.h"
#include "portconv/tensor.h"

namespace portconv {

struct ConvConfig;
struct BenchResult;

/// Matches convolutions on the (window, stride, rows, cols, in_features,
/// out_features) tuple. An empty field matches anything. Window and stride
/// only match square windows and strides.
struct ParamKey {
  std::optional<Index> window;
  std::optional<Index> stride;
  std::optional<Index> rows;
  std::optional<Index> cols;
  std::optional<Index> in_features;
  std::optional<Index> out_features;

  /// Exact key for `params` (requires a square window and stride).
  static ParamKey exact(ConvParams const& params);
  bool matches(ConvParams const& params) const;

  friend bool operator==(ParamKey const&, ParamKey const&) = default;
};

using Ranking = std::vector<Algorithm>;

struct SelectorRule {
  ParamKey key;
  Ranking ranking;

  friend bool operator==(SelectorRule const&, SelectorRule const&) = default;
};

/// Ordered rules plus a default ranking. Immutable once built.
class SelectorTable {
 public:
  /// Throws InvalidParamsError if a ranking repeats an algorithm or the
  /// default ranking holds no universally compatible algorithm.
  SelectorTable(std::vector<SelectorRule> rules, Ranking default_ranking);

  std::vector<SelectorRule> const& rules() const noexcept { return rules_; }
  Ranking const& default_ranking() const noexcept { return default_; }

  friend bool operator==(SelectorTable const&, SelectorTable const&) =
      default;

 private:
  std::vector<SelectorRule> rules_;
  Ranking default_;
};

/// Scans the first rule whose key matches, then the default ranking, and
/// returns the first algorithm that supports `params`.
Algorithm select(SelectorTable const& table, ConvParams const& params);

/// Text format, one rule per line:
///   K S H W Cin Cout : alg1,alg2,...
///   default : alg1,...
/// `*` matches any value; `#` starts a comment.
void write_selector_table(SelectorTable const& table, std::ostream& os);
SelectorTable read_selector_table(std::istream& is);

/// Best observed time of one algorithm on one configuration.
struct Measurement {
  Index config_index;
  Algorithm algorithm;
  double best_time_ns;
};

/// Orders algorithms by ascending time, ties by enumerator order.
Ranking rank_by_time(std::vector<std::pair<Algorithm, double>> timings);

struct AutotuneResult {
  SelectorTable table;
  std::vector<Measurement> measurements;
  std::vector<std::string> warnings;
  std::map<Algorithm, int> win_counts;
};

/// Times one (config, algorithm) pair. Exceptions mark the measurement as
/// failed.
using MeasureFn =
    std::function<double(ConvConfig const&, Algorithm)>;

/// Measures every compatible algorithm (restricted to `candidates`) on every
/// config serially and emits one exact-match rule per config, plus a default
/// ranking of all algorithms ordered by win count.
AutotuneResult autotune(std::vector<ConvConfig> const& configs,
                        MeasureFn const& measure,
                        Ranking const& candidates = {});
/// Measures with run_bench(config, alg, reps, warmups, seed).
AutotuneResult autotune(std::vector<ConvConfig> const& configs, Index reps,
                        std::uint64_t seed, Index warmups = 2,
                        Ranking const& candidates = {});

}  // namespace portconv

#endif  // PORTCONV_SELECTOR_H_
