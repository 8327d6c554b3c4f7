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

#include "portconv/bench.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <istream>
#include <map>
#include <new>
#include <ostream>
#include <sstream>

#include "portconv/conv_algos.h"
#include "portconv/error.h"

namespace portconv {

ConvConfig make_config(Index window, Index stride, Index rows, Index cols,
                       Index in_features, Index out_features, Index batch) {
  ConvConfig config;
  config.label = "conv_" + std::to_string(window) + "_" +
                 std::to_string(stride) + "_" + std::to_string(rows) + "_" +
                 std::to_string(cols) + "_" + std::to_string(in_features) +
                 "_" + std::to_string(out_features);
  config.params = ConvParams::square(window, stride, rows, cols, in_features,
                                     out_features, batch, Padding::Same);
  config.params.validate();
  return config;
}

namespace {

// Mirrors data/resnet50_convs.txt.
constexpr std::array<std::array<Index, 6>, 26> kResnet50 = {{
    {7, 2, 224, 224, 3, 64},
    {1, 1, 56, 56, 64, 64},
    {3, 1, 56, 56, 64, 64},
    {1, 1, 56, 56, 64, 256},
    {1, 1, 56, 56, 256, 64},
    {1, 2, 56, 56, 256, 128},
    {1, 1, 56, 56, 256, 128},
    {3, 2, 56, 56, 128, 128},
    {3, 1, 28, 28, 128, 128},
    {1, 1, 28, 28, 128, 512},
    {1, 2, 56, 56, 256, 512},
    {1, 1, 28, 28, 512, 128},
    {1, 2, 28, 28, 512, 256},
    {1, 1, 28, 28, 512, 256},
    {3, 2, 28, 28, 256, 256},
    {3, 1, 14, 14, 256, 256},
    {1, 1, 14, 14, 256, 1024},
    {1, 2, 28, 28, 512, 1024},
    {1, 1, 14, 14, 1024, 256},
    {1, 2, 14, 14, 1024, 512},
    {1, 1, 14, 14, 1024, 512},
    {3, 2, 14, 14, 512, 512},
    {3, 1, 7, 7, 512, 512},
    {1, 1, 7, 7, 512, 2048},
    {1, 2, 14, 14, 1024, 2048},
    {1, 1, 7, 7, 2048, 512},
}};

}  // namespace

std::vector<ConvConfig> resnet50_configs(Index batch) {
  if (batch < 1) throw InvalidParamsError("batch must be >= 1");
  std::vector<ConvConfig> configs;
  configs.reserve(kResnet50.size());
  for (auto const& t : kResnet50) {
    configs.push_back(make_config(t[0], t[1], t[2], t[3], t[4], t[5], batch));
  }
  return configs;
}

std::vector<ConvConfig> read_config_file(std::istream& is, Index batch) {
  if (batch < 1) throw InvalidParamsError("batch must be >= 1");
  std::vector<ConvConfig> configs;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(is, raw)) {
    ++line;
    auto const hash = raw.find('#');
    std::istringstream tokens{raw.substr(0, hash)};
    std::vector<std::string> fields;
    for (std::string tok; tokens >> tok;) fields.push_back(tok);
    if (fields.empty()) continue;
    if (fields.size() != 6) {
      throw ParseError(line, "expected 'K S H W Cin Cout', got " +
                                 std::to_string(fields.size()) + " fields");
    }
    std::array<Index, 6> v{};
    for (std::size_t i = 0; i < 6; ++i) {
      auto const& f = fields[i];
      auto const [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v[i]);
      if (ec != std::errc{} || ptr != f.data() + f.size() || v[i] < 1) {
        throw ParseError(line, "field " + std::to_string(i + 1) +
                                   " is not a positive integer: '" + f + "'");
      }
    }
    try {
      configs.push_back(make_config(v[0], v[1], v[2], v[3], v[4], v[5], batch));
    } catch (Error const& e) {
      throw ParseError(line, e.what());
    }
  }
  return configs;
}

void write_config_file(std::vector<ConvConfig> const& configs,
                       std::ostream& os) {
  os << "# K S H W Cin Cout\n";
  for (auto const& c : configs) {
    auto const& p = c.params;
    os << p.window_rows << ' ' << p.stride_rows << ' ' << p.input.rows << ' '
       << p.input.cols << ' ' << p.input.channels << ' ' << p.features
       << '\n';
  }
}

double gflops_from(Index flops, double time_ns) {
  // flops / (time_ns * 1e-9) / 1e9 == flops / time_ns
  return static_cast<double>(flops) / time_ns;
}

BenchInputs make_bench_inputs(ConvConfig const& config, std::uint64_t seed) {
  return {random_tensor(config.params.input, seed),
          random_filter(config.params, seed ^ 0x9e3779b97f4a7c15ULL)};
}

BenchResult run_bench(ConvConfig const& config, Algorithm alg, Index reps,
                      Index warmups, std::uint64_t seed) {
  if (reps < 1) throw InvalidParamsError("reps must be >= 1");
  if (warmups < 0) throw InvalidParamsError("warmups must be >= 0");
  if (!supports(alg, config.params)) {
    throw IncompatibleAlgorithmError(std::string{to_string(alg)} +
                                     " does not support " + config.label);
  }
  BenchResult result;
  result.config = config;
  result.algorithm = alg;
  result.reps = reps;
  result.warmups = warmups;
  result.flops = flop_count(config.params);
  try {
    BenchInputs const inputs = make_bench_inputs(config, seed);
    for (Index i = 0; i < warmups; ++i) {
      (void)convolve(alg, inputs.input, inputs.filter, config.params);
    }
    using Clock = std::chrono::steady_clock;
    double best = 0;
    double total = 0;
    for (Index i = 0; i < reps; ++i) {
      auto const start = Clock::now();
      Tensor const out =
          convolve(alg, inputs.input, inputs.filter, config.params);
      auto const stop = Clock::now();
      double const ns = std::max(
          1.0, std::chrono::duration<double, std::nano>(stop - start).count());
      best = i == 0 ? ns : std::min(best, ns);
      total += ns;
    }
    result.best_time_ns = best;
    result.mean_time_ns = std::max(best, total / static_cast<double>(reps));
  } catch (std::bad_alloc const&) {
    throw ResourceError("allocation failed while benchmarking " +
                        config.label + " with " + std::string{to_string(alg)});
  }
  result.gflops = gflops_from(result.flops, result.best_time_ns);
  return result;
}

ReportRow to_report_row(BenchResult const& r) {
  auto const& p = r.config.params;
  return {r.config.label, p.window_rows,   p.stride_rows, p.input.rows,
          p.input.cols,   p.input.channels, p.features,    p.input.batch,
          r.algorithm,    r.reps,           r.best_time_ns, r.mean_time_ns,
          r.flops,        r.gflops};
}

namespace {

std::string shortest(double v) {
  std::array<char, 64> buf{};
  auto const [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string fixed(double v, int precision) {
  std::array<char, 64> buf{};
  auto const [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                       std::chars_format::fixed, precision);
  return std::string(buf.data(), ptr);
}

std::string csv_field(std::string const& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + '"';
}

std::vector<std::string> row_cells(ReportRow const& r, bool markdown) {
  return {r.label,
          std::to_string(r.window),
          std::to_string(r.stride),
          std::to_string(r.rows),
          std::to_string(r.cols),
          std::to_string(r.cin),
          std::to_string(r.cout),
          std::to_string(r.batch),
          std::string{to_string(r.algorithm)},
          std::to_string(r.reps),
          markdown ? fixed(r.best_ns, 0) : shortest(r.best_ns),
          markdown ? fixed(r.mean_ns, 0) : shortest(r.mean_ns),
          std::to_string(r.flops),
          markdown ? fixed(r.gflops, 2) : shortest(r.gflops)};
}

std::vector<std::string> split_header() {
  std::vector<std::string> cols;
  std::string_view h = kCsvHeader;
  while (true) {
    auto const comma = h.find(',');
    cols.emplace_back(h.substr(0, comma));
    if (comma == std::string_view::npos) break;
    h.remove_prefix(comma + 1);
  }
  return cols;
}

void write_markdown(std::vector<std::string> const& header,
                    std::vector<std::vector<std::string>> const& body,
                    std::ostream& os) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = std::max<std::size_t>(header[c].size(), 3);
    for (auto const& row : body) width[c] = std::max(width[c], row[c].size());
  }
  auto emit = [&](std::vector<std::string> const& cells) {
    os << '|';
    for (std::size_t c = 0; c < cells.size(); ++c) {
      os << ' ' << cells[c] << std::string(width[c] - cells[c].size(), ' ')
         << " |";
    }
    os << '\n';
  };
  emit(header);
  os << '|';
  for (std::size_t c = 0; c < header.size(); ++c) {
    os << std::string(width[c] + 2, '-') << '|';
  }
  os << '\n';
  for (auto const& row : body) emit(row);
}

}  // namespace

void write_report_rows(std::vector<ReportRow> const& rows,
                       ReportFormat format, std::ostream& os) {
  if (format == ReportFormat::Csv) {
    os << kCsvHeader << '\n';
    for (auto const& r : rows) {
      auto const cells = row_cells(r, false);
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i != 0) os << ',';
        os << csv_field(cells[i]);
      }
      os << '\n';
    }
    return;
  }
  std::vector<std::vector<std::string>> body;
  body.reserve(rows.size());
  for (auto const& r : rows) body.push_back(row_cells(r, true));
  write_markdown(split_header(), body, os);
}

void write_report(std::vector<BenchResult> const& results,
                  ReportFormat format, std::ostream& os) {
  std::vector<ReportRow> rows;
  rows.reserve(results.size());
  for (auto const& r : results) rows.push_back(to_report_row(r));
  write_report_rows(rows, format, os);
}

namespace {

std::vector<std::string> split_csv_line(std::string const& line,
                                        std::size_t line_no) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char const ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  if (quoted) throw ParseError(line_no, "unterminated quoted field");
  cells.push_back(std::move(cell));
  return cells;
}

template <typename T>
T parse_number(std::string const& s, std::string const& column,
               std::size_t line) {
  T value{};
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(line, "column '" + column + "': bad number '" + s + "'");
  }
  return value;
}

}  // namespace

std::vector<ReportRow> read_report_csv(std::istream& is) {
  std::string raw;
  if (!std::getline(is, raw)) throw ParseError(1, "missing CSV header");
  auto const header = split_csv_line(raw, 1);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;
  for (auto const& col : split_header()) {
    if (!index.contains(col)) {
      throw ParseError(1, "missing column '" + col + "'");
    }
  }

  std::vector<ReportRow> rows;
  std::size_t line = 1;
  while (std::getline(is, raw)) {
    ++line;
    if (raw.empty() || raw == "\r") continue;
    auto const cells = split_csv_line(raw, line);
    if (cells.size() != header.size()) {
      throw ParseError(line, "expected " + std::to_string(header.size()) +
                                 " fields, got " +
                                 std::to_string(cells.size()));
    }
    auto cell = [&](std::string const& col) -> std::string const& {
      return cells[index.at(col)];
    };
    auto integer = [&](std::string const& col) {
      return parse_number<Index>(cell(col), col, line);
    };
    auto real = [&](std::string const& col) {
      return parse_number<double>(cell(col), col, line);
    };
    ReportRow r;
    r.label = cell("label");
    r.window = integer("window");
    r.stride = integer("stride");
    r.rows = integer("rows");
    r.cols = integer("cols");
    r.cin = integer("cin");
    r.cout = integer("cout");
    r.batch = integer("batch");
    auto const alg = parse_algorithm(cell("algorithm"));
    if (!alg) {
      throw ParseError(line, "unknown algorithm '" + cell("algorithm") + "'");
    }
    r.algorithm = *alg;
    r.reps = integer("reps");
    r.best_ns = real("best_ns");
    r.mean_ns = real("mean_ns");
    r.flops = integer("flops");
    r.gflops = real("gflops");
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_plot_data(std::vector<ReportRow> const& rows, std::ostream& os) {
  std::vector<std::string> labels;
  std::vector<Algorithm> algorithms;
  std::map<std::pair<std::string, Algorithm>, double> cells;
  for (auto const& r : rows) {
    if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) {
      labels.push_back(r.label);
    }
    if (std::find(algorithms.begin(), algorithms.end(), r.algorithm) ==
        algorithms.end()) {
      algorithms.push_back(r.algorithm);
    }
    cells[{r.label, r.algorithm}] = r.gflops;
  }
  std::sort(algorithms.begin(), algorithms.end());
  os << "label";
  for (Algorithm alg : algorithms) os << ',' << to_string(alg) << "_gflops";
  os << '\n';
  for (auto const& label : labels) {
    os << csv_field(label);
    for (Algorithm alg : algorithms) {
      os << ',';
      auto const it = cells.find({label, alg});
      if (it != cells.end()) os << shortest(it->second);
    }
    os << '\n';
  }
}

}  // namespace portconv
