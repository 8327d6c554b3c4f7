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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "portconv/error.h"

namespace portconv {
namespace {

TEST(Resnet50, TwentySixDistinctConfigs) {
  auto const configs = resnet50_configs(1);
  ASSERT_EQ(configs.size(), 26u);
  std::set<std::string> labels;
  for (auto const& c : configs) labels.insert(c.label);
  EXPECT_EQ(labels.size(), 26u);
  auto const conv1 = std::find_if(configs.begin(), configs.end(), [](auto& c) {
    return c.label == "conv_7_2_224_224_3_64";
  });
  ASSERT_NE(conv1, configs.end());
  EXPECT_EQ(flop_count(conv1->params), 236027904);
}

TEST(Resnet50, BatchOnlyChangesBatch) {
  auto const one = resnet50_configs(1);
  auto const many = resnet50_configs(32);
  ASSERT_EQ(one.size(), many.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    auto adjusted = one[i];
    adjusted.params.input.batch = 32;
    EXPECT_EQ(adjusted, many[i]);
    EXPECT_EQ(flop_count(many[i].params), 32 * flop_count(one[i].params));
  }
}

TEST(ConfigFile, RoundTrip) {
  auto const configs = resnet50_configs(4);
  std::stringstream ss;
  write_config_file(configs, ss);
  EXPECT_EQ(read_config_file(ss, 4), configs);
}

TEST(ConfigFile, MalformedLineReportsNumber) {
  std::istringstream in{"# header\n1 1 7 7 8 8\n3 1 56 56 x 64\n"};
  try {
    read_config_file(in, 1);
    FAIL() << "expected ParseError";
  } catch (ParseError const& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Gflops, SpecExample) {
  EXPECT_DOUBLE_EQ(gflops_from(236027904, 10e6), 23.6027904);
}

TEST(RunBench, SingleRepBestEqualsMean) {
  auto const config = make_config(3, 1, 6, 6, 2, 3, 1);
  auto const r = run_bench(config, Algorithm::Im2col, 1, 0, 1);
  EXPECT_EQ(r.best_time_ns, r.mean_time_ns);
  EXPECT_GT(r.best_time_ns, 0);
  EXPECT_EQ(r.flops, flop_count(config.params));
  EXPECT_DOUBLE_EQ(r.gflops, r.flops / r.best_time_ns);
}

TEST(RunBench, BestNotAboveMean) {
  auto const config = make_config(3, 1, 8, 8, 4, 4, 2);
  for (auto alg : kAllAlgorithms) {
    if (!supports(alg, config.params)) continue;
    auto const r = run_bench(config, alg, 4, 1, 3);
    EXPECT_LE(r.best_time_ns, r.mean_time_ns);
    EXPECT_EQ(r.reps, 4);
  }
}

TEST(RunBench, IncompatibleAlgorithmThrows) {
  auto const config = make_config(7, 2, 16, 16, 3, 4, 1);
  EXPECT_THROW(run_bench(config, Algorithm::Winograd, 1, 0, 1),
               IncompatibleAlgorithmError);
}

TEST(BenchInputs, Deterministic) {
  auto const config = make_config(3, 1, 5, 5, 2, 2, 1);
  auto const a = make_bench_inputs(config, 9);
  auto const b = make_bench_inputs(config, 9);
  EXPECT_EQ(a.input, b.input);
  EXPECT_EQ(a.filter.tensor(), b.filter.tensor());
}

ReportRow sample_row(std::string label, Algorithm alg, double gflops) {
  ReportRow r;
  r.label = std::move(label);
  r.window = 3;
  r.stride = 1;
  r.rows = r.cols = 56;
  r.cin = r.cout = 64;
  r.batch = 1;
  r.algorithm = alg;
  r.reps = 3;
  r.best_ns = 1234567.125;
  r.mean_ns = 1300000.5;
  r.flops = 231211008;
  r.gflops = gflops;
  return r;
}

TEST(Report, CsvRoundTrip) {
  std::vector<ReportRow> const rows = {
      sample_row("conv_3_1_56_56_64_64", Algorithm::Winograd, 0.1 + 0.2),
      sample_row("a,\"quoted\" label", Algorithm::Tiled, 187.28)};
  std::stringstream ss;
  write_report_rows(rows, ReportFormat::Csv, ss);
  EXPECT_EQ(read_report_csv(ss), rows);
}

TEST(Report, HeaderOnlyWhenEmpty) {
  std::ostringstream os;
  write_report({}, ReportFormat::Csv, os);
  EXPECT_EQ(os.str(), std::string{kCsvHeader} + "\n");
  std::istringstream in{os.str()};
  EXPECT_TRUE(read_report_csv(in).empty());
}

TEST(Report, RowsKeepRunOrder) {
  auto const c1 = make_config(1, 1, 4, 4, 2, 2, 1);
  auto const c2 = make_config(3, 1, 4, 4, 2, 2, 1);
  std::vector<BenchResult> const results = {
      run_bench(c2, Algorithm::Direct, 1, 0, 1),
      run_bench(c1, Algorithm::Matmul, 1, 0, 1)};
  std::stringstream ss;
  write_report(results, ReportFormat::Csv, ss);
  auto const rows = read_report_csv(ss);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], to_report_row(results[0]));
  EXPECT_EQ(rows[1], to_report_row(results[1]));
}

TEST(Report, ColumnsInAnyOrder) {
  std::istringstream in{
      "gflops,flops,mean_ns,best_ns,reps,algorithm,batch,cout,cin,cols,rows,"
      "stride,window,label\n"
      "2.5,100,50,40,1,tiled,1,8,8,7,7,1,3,x\n"};
  auto const rows = read_report_csv(in);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].algorithm, Algorithm::Tiled);
  EXPECT_EQ(rows[0].gflops, 2.5);
  EXPECT_EQ(rows[0].label, "x");
}

TEST(Report, MissingColumnNamed) {
  std::istringstream in{"label,window\nx,3\n"};
  try {
    read_report_csv(in);
    FAIL() << "expected ParseError";
  } catch (ParseError const& e) {
    EXPECT_NE(std::string{e.what()}.find("stride"), std::string::npos);
  }
}

TEST(Report, MarkdownHasOneLinePerRow) {
  std::vector<ReportRow> const rows = {
      sample_row("a", Algorithm::Direct, 1.0),
      sample_row("b", Algorithm::Im2col, 2.0)};
  std::ostringstream os;
  write_report_rows(rows, ReportFormat::Markdown, os);
  auto const text = os.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
  EXPECT_NE(text.find("im2col"), std::string::npos);
}

TEST(PlotData, PivotsByLabel) {
  std::vector<ReportRow> const rows = {
      sample_row("a", Algorithm::Winograd, 3.0),
      sample_row("a", Algorithm::Direct, 1.0),
      sample_row("b", Algorithm::Direct, 2.0)};
  std::ostringstream os;
  write_plot_data(rows, os);
  EXPECT_EQ(os.str(),
            "label,direct_gflops,winograd_gflops\n"
            "a,1,3\n"
            "b,2,\n");
}

}  // namespace
}  // namespace portconv
