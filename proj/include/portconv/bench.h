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

#ifndef PORTCONV_BENCH_H_
#define PORTCONV_BENCH_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "portconv/algorithm.h"
#include "portconv/conv_ref.h"
#include "portconv/tensor.h"

namespace portconv {

struct ConvConfig {
  std::string label;
  ConvParams params;

  friend bool operator==(ConvConfig const&, ConvConfig const&) = default;
};

/// Config from the (window, stride, rows, cols, in_features, out_features)
/// tuple with Same padding and a generated label such as
/// "conv_7_2_224_224_3_64".
ConvConfig make_config(Index window, Index stride, Index rows, Index cols,
                       Index in_features, Index out_features, Index batch);

/// The 26 distinct convolutions of ResNet-50, see data/resnet50_convs.txt.
std::vector<ConvConfig> resnet50_configs(Index batch);

/// Reads `K S H W Cin Cout` lines; `#` starts a comment. Throws ParseError
/// carrying the line number of the first malformed line.
std::vector<ConvConfig> read_config_file(std::istream& is, Index batch);
void write_config_file(std::vector<ConvConfig> const& configs,
                       std::ostream& os);

struct BenchResult {
  ConvConfig config;
  Algorithm algorithm = Algorithm::Direct;
  Index reps = 0;
  Index warmups = 0;
  double best_time_ns = 0;
  double mean_time_ns = 0;
  Index flops = 0;
  /// flops / best time in seconds / 1e9.
  double gflops = 0;
};

double gflops_from(Index flops, double time_ns);

struct BenchInputs {
  Tensor input;
  Filter filter;
};

/// Deterministic operands for a config; identical (config, seed) gives
/// bitwise-identical tensors.
BenchInputs make_bench_inputs(ConvConfig const& config, std::uint64_t seed);

/// Seeds inputs once, runs `warmups` untimed and `reps` timed executions on
/// a steady clock. Flops are the direct-convolution count for every
/// algorithm.
BenchResult run_bench(ConvConfig const& config, Algorithm alg, Index reps,
                      Index warmups, std::uint64_t seed);

/// One CSV row. Separate from BenchResult because the CSV drops padding and
/// warmups.
struct ReportRow {
  std::string label;
  Index window = 0;
  Index stride = 0;
  Index rows = 0;
  Index cols = 0;
  Index cin = 0;
  Index cout = 0;
  Index batch = 0;
  Algorithm algorithm = Algorithm::Direct;
  Index reps = 0;
  double best_ns = 0;
  double mean_ns = 0;
  Index flops = 0;
  double gflops = 0;

  friend bool operator==(ReportRow const&, ReportRow const&) = default;
};

ReportRow to_report_row(BenchResult const& result);

enum class ReportFormat { Csv, Markdown };

inline constexpr char kCsvHeader[] =
    "label,window,stride,rows,cols,cin,cout,batch,algorithm,reps,best_ns,"
    "mean_ns,flops,gflops";

void write_report(std::vector<BenchResult> const& results,
                  ReportFormat format, std::ostream& os);
void write_report_rows(std::vector<ReportRow> const& rows,
                       ReportFormat format, std::ostream& os);

/// Parses CSV emitted by write_report. Columns may appear in any order;
/// a missing column throws ParseError naming it.
std::vector<ReportRow> read_report_csv(std::istream& is);

/// Pivot for plotting: one row per label (first-seen order), one
/// `<algorithm>_gflops` column per algorithm present. Missing cells empty.
void write_plot_data(std::vector<ReportRow> const& rows, std::ostream& os);

}  // namespace portconv

#endif  // PORTCONV_BENCH_H_
