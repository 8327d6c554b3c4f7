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

#include "portconv/selector.h"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "portconv/bench.h"
#include "portconv/error.h"

namespace portconv {

ParamKey ParamKey::exact(ConvParams const& params) {
  if (params.window_rows != params.window_cols ||
      params.stride_rows != params.stride_cols) {
    throw InvalidParamsError(
        "selector keys require a square window and stride");
  }
  return {params.window_rows, params.stride_rows,   params.input.rows,
          params.input.cols,  params.input.channels, params.features};
}

bool ParamKey::matches(ConvParams const& params) const {
  auto ok = [](std::optional<Index> const& field, Index value) {
    return !field || *field == value;
  };
  if (window && params.window_rows != params.window_cols) return false;
  if (stride && params.stride_rows != params.stride_cols) return false;
  return ok(window, params.window_rows) && ok(stride, params.stride_rows) &&
         ok(rows, params.input.rows) && ok(cols, params.input.cols) &&
         ok(in_features, params.input.channels) &&
         ok(out_features, params.features);
}

namespace {

void check_ranking(Ranking const& ranking) {
  std::set<Algorithm> seen;
  for (Algorithm alg : ranking) {
    if (!seen.insert(alg).second) {
      throw InvalidParamsError("ranking lists " + std::string{to_string(alg)} +
                               " twice");
    }
  }
}

bool universally_compatible(Algorithm alg) {
  return alg == Algorithm::Direct || alg == Algorithm::NaiveVectorized ||
         alg == Algorithm::Im2col;
}

}  // namespace

SelectorTable::SelectorTable(std::vector<SelectorRule> rules,
                             Ranking default_ranking)
    : rules_{std::move(rules)}, default_{std::move(default_ranking)} {
  for (auto const& rule : rules_) check_ranking(rule.ranking);
  check_ranking(default_);
  if (std::none_of(default_.begin(), default_.end(), universally_compatible)) {
    throw InvalidParamsError(
        "default ranking must contain direct, naive_vectorized or im2col");
  }
}

Algorithm select(SelectorTable const& table, ConvParams const& params) {
  for (auto const& rule : table.rules()) {
    if (!rule.key.matches(params)) continue;
    for (Algorithm alg : rule.ranking) {
      if (supports(alg, params)) return alg;
    }
    break;
  }
  for (Algorithm alg : table.default_ranking()) {
    if (supports(alg, params)) return alg;
  }
  // Unreachable: the constructor guarantees a universal fallback.
  return Algorithm::Direct;
}

namespace {

void write_ranking(Ranking const& ranking, std::ostream& os) {
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (i != 0) os << ',';
    os << to_string(ranking[i]);
  }
}

void write_field(std::optional<Index> const& field, std::ostream& os) {
  if (field) {
    os << *field;
  } else {
    os << '*';
  }
}

std::string_view trim(std::string_view s) {
  auto const first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  auto const last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

Ranking parse_ranking(std::string_view text, std::size_t line) {
  Ranking ranking;
  text = trim(text);
  while (!text.empty()) {
    auto const comma = text.find(',');
    auto const name = trim(text.substr(0, comma));
    auto const alg = parse_algorithm(name);
    if (!alg) {
      throw ParseError(line, "unknown algorithm '" + std::string{name} + "'");
    }
    ranking.push_back(*alg);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  try {
    check_ranking(ranking);
  } catch (InvalidParamsError const& e) {
    throw ParseError(line, e.what());
  }
  return ranking;
}

std::optional<Index> parse_key_field(std::string const& token,
                                     std::size_t line) {
  if (token == "*") return std::nullopt;
  Index value = 0;
  auto const [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || value < 1) {
    throw ParseError(line, "expected a positive integer or '*', got '" +
                               token + "'");
  }
  return value;
}

}  // namespace

void write_selector_table(SelectorTable const& table, std::ostream& os) {
  os << "# K S H W Cin Cout : ranking\n";
  for (auto const& rule : table.rules()) {
    auto const& k = rule.key;
    for (auto const* field : {&k.window, &k.stride, &k.rows, &k.cols,
                              &k.in_features, &k.out_features}) {
      write_field(*field, os);
      os << ' ';
    }
    os << ": ";
    write_ranking(rule.ranking, os);
    os << '\n';
  }
  os << "default : ";
  write_ranking(table.default_ranking(), os);
  os << '\n';
}

SelectorTable read_selector_table(std::istream& is) {
  std::vector<SelectorRule> rules;
  std::optional<Ranking> default_ranking;
  std::size_t default_line = 0;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(is, raw)) {
    ++line;
    std::string_view text = raw;
    text = trim(text.substr(0, text.find('#')));
    if (text.empty()) continue;
    auto const colon = text.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError(line, "expected '<key> : <ranking>'");
    }
    auto const lhs = trim(text.substr(0, colon));
    Ranking ranking = parse_ranking(text.substr(colon + 1), line);
    if (lhs == "default") {
      if (default_ranking) throw ParseError(line, "duplicate default line");
      default_ranking = std::move(ranking);
      default_line = line;
      continue;
    }
    std::istringstream tokens{std::string{lhs}};
    std::vector<std::string> fields;
    for (std::string tok; tokens >> tok;) fields.push_back(tok);
    if (fields.size() != 6) {
      throw ParseError(line, "expected 6 key fields (K S H W Cin Cout), got " +
                                 std::to_string(fields.size()));
    }
    ParamKey key{parse_key_field(fields[0], line),
                 parse_key_field(fields[1], line),
                 parse_key_field(fields[2], line),
                 parse_key_field(fields[3], line),
                 parse_key_field(fields[4], line),
                 parse_key_field(fields[5], line)};
    rules.push_back({key, std::move(ranking)});
  }
  if (!default_ranking) throw ParseError(line, "missing 'default' line");
  try {
    return SelectorTable{std::move(rules), std::move(*default_ranking)};
  } catch (InvalidParamsError const& e) {
    throw ParseError(default_line, e.what());
  }
}

Ranking rank_by_time(std::vector<std::pair<Algorithm, double>> timings) {
  std::stable_sort(timings.begin(), timings.end(),
                   [](auto const& a, auto const& b) {
                     if (a.second != b.second) return a.second < b.second;
                     return a.first < b.first;
                   });
  Ranking ranking;
  ranking.reserve(timings.size());
  for (auto const& [alg, time] : timings) ranking.push_back(alg);
  return ranking;
}

AutotuneResult autotune(std::vector<ConvConfig> const& configs,
                        MeasureFn const& measure, Ranking const& candidates) {
  Ranking const pool =
      candidates.empty()
          ? Ranking{kAllAlgorithms.begin(), kAllAlgorithms.end()}
          : candidates;
  check_ranking(pool);

  std::vector<SelectorRule> rules;
  std::vector<Measurement> measurements;
  std::vector<std::string> warnings;
  std::map<Algorithm, int> wins;
  for (Algorithm alg : kAllAlgorithms) wins[alg] = 0;

  // Repeated configs reuse the first measurement so they rank identically.
  std::vector<std::pair<ConvParams, Ranking>> seen;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    auto const& config = configs[i];
    auto const prior =
        std::find_if(seen.begin(), seen.end(),
                     [&](auto const& s) { return s.first == config.params; });
    if (prior != seen.end()) {
      ++wins[prior->second.front()];
      rules.push_back({ParamKey::exact(config.params), prior->second});
      continue;
    }
    std::vector<std::pair<Algorithm, double>> timings;
    for (Algorithm alg : pool) {
      if (!supports(alg, config.params)) continue;
      try {
        double const t = measure(config, alg);
        timings.emplace_back(alg, t);
        measurements.push_back({static_cast<Index>(i), alg, t});
      } catch (std::exception const& e) {
        warnings.push_back(config.label + ": " + std::string{to_string(alg)} +
                           " failed: " + e.what());
      }
    }
    if (timings.empty()) {
      warnings.push_back(config.label +
                         ": no algorithm measured, rule omitted");
      continue;
    }
    Ranking ranking = rank_by_time(std::move(timings));
    ++wins[ranking.front()];
    seen.emplace_back(config.params, ranking);
    rules.push_back({ParamKey::exact(config.params), std::move(ranking)});
  }

  // Candidates by win count, then the rest in enumerator order so the
  // default always keeps a universal fallback.
  Ranking fallback = pool;
  std::stable_sort(fallback.begin(), fallback.end(),
                   [&](Algorithm a, Algorithm b) {
                     if (wins[a] != wins[b]) return wins[a] > wins[b];
                     return a < b;
                   });
  for (Algorithm alg : kAllAlgorithms) {
    if (std::find(fallback.begin(), fallback.end(), alg) == fallback.end()) {
      fallback.push_back(alg);
    }
  }
  return {SelectorTable{std::move(rules), std::move(fallback)},
          std::move(measurements), std::move(warnings), std::move(wins)};
}

AutotuneResult autotune(std::vector<ConvConfig> const& configs, Index reps,
                        std::uint64_t seed, Index warmups,
                        Ranking const& candidates) {
  if (reps < 1) throw InvalidParamsError("autotune needs reps >= 1");
  return autotune(
      configs,
      [&](ConvConfig const& config, Algorithm alg) {
        return run_bench(config, alg, reps, warmups, seed).best_time_ns;
      },
      candidates);
}

}  // namespace portconv
