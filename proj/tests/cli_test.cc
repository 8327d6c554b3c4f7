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

#include "portconv/cli.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "portconv/bench.h"
#include "portconv/selector.h"

namespace portconv::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> const& args) {
  std::ostringstream out, err;
  int const code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("portconv_cli_" + std::to_string(::testing::UnitTest::GetInstance()
                                                 ->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(std::string const& name, std::string const& text) {
    auto const path = (dir_ / name).string();
    std::ofstream{path} << text;
    return path;
  }
  std::string path(std::string const& name) { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string const kSmallConfigs =
    "# window stride rows cols cin cout\n"
    "1 1 6 6 4 8\n"
    "3 1 6 6 4 4\n"
    "3 2 7 7 2 4\n";

TEST_F(CliTest, VerifyPasses) {
  auto const r = invoke({"verify", "--fuzz-cases", "10"});
  EXPECT_EQ(r.code, kExitOk) << r.out;
  EXPECT_NE(r.out.find("within tolerance"), std::string::npos);
}

TEST_F(CliTest, VerifyDetectsInjectedFault) {
  auto const r = invoke({"verify", "--fuzz-cases", "10", "--algorithms",
                         "im2col", "--inject-fault", "im2col"});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.out.find("FAIL im2col"), std::string::npos);
}

TEST_F(CliTest, VerifySingleAlgorithm) {
  auto const r =
      invoke({"verify", "--fuzz-cases", "5", "--algorithms", "winograd"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("winograd"), std::string::npos);
  EXPECT_EQ(r.out.find("tiled"), std::string::npos);
}

TEST_F(CliTest, BenchRestrictedToMatmul) {
  auto const configs = write("c.txt", kSmallConfigs);
  auto const r = invoke({"bench", "--configs", configs, "--algorithms",
                         "matmul", "--reps", "1", "--warmups", "0"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream in{r.out};
  auto const rows = read_report_csv(in);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].algorithm, Algorithm::Matmul);
  EXPECT_EQ(rows[0].window, 1);
  EXPECT_EQ(rows[0].stride, 1);
}

TEST_F(CliTest, BenchWritesOutputFile) {
  auto const configs = write("c.txt", kSmallConfigs);
  auto const out = path("r.csv");
  auto const r = invoke({"bench", "--configs", configs, "--reps", "1",
                         "--batch", "2", "--output", out});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in{out};
  auto const rows = read_report_csv(in);
  EXPECT_FALSE(rows.empty());
  for (auto const& row : rows) {
    EXPECT_EQ(row.batch, 2);
    EXPECT_EQ(row.reps, 1);
  }
}

TEST_F(CliTest, MalformedConfigNamesLine) {
  auto const configs = write("bad.txt", "1 1 7 7 8 8\n3 1 56 56 x 64\n");
  auto const r = invoke({"bench", "--configs", configs, "--reps", "1"});
  EXPECT_NE(r.code, kExitOk);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST_F(CliTest, MissingConfigFile) {
  auto const r = invoke({"bench", "--configs", path("nope.txt")});
  EXPECT_EQ(r.code, kExitUsage);
}

TEST_F(CliTest, TuneOutputParsesBack) {
  auto const configs = write("c.txt", kSmallConfigs);
  auto const r = invoke({"tune", "--configs", configs, "--reps", "1",
                         "--warmups", "0"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream in{r.out};
  auto const table = read_selector_table(in);
  EXPECT_EQ(table.rules().size(), 3u);
  std::ifstream cin{configs};
  for (auto const& c : read_config_file(cin, 1)) {
    EXPECT_TRUE(supports(select(table, c.params), c.params));
  }
}

TEST_F(CliTest, ReportHeaderOnly) {
  auto const csv = write("empty.csv", std::string{kCsvHeader} + "\n");
  auto const r = invoke({"report", csv});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "label\n");
}

TEST_F(CliTest, ReportPivotsTwoAlgorithms) {
  std::string const csv = std::string{kCsvHeader} +
                          "\n"
                          "x,3,1,7,7,8,8,1,winograd,3,10,12,100,10\n"
                          "x,3,1,7,7,8,8,1,im2col,3,20,22,100,5\n";
  auto const r = invoke({"report", write("r.csv", csv)});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "label,im2col_gflops,winograd_gflops\nx,5,10\n");
  auto const md = invoke({"report", path("r.csv"), "--format", "markdown"});
  EXPECT_EQ(md.code, kExitOk);
  EXPECT_NE(md.out.find("| x"), std::string::npos);
}

TEST_F(CliTest, ReportMissingColumn) {
  auto const csv = write("bad.csv",
                         "label,window,stride,rows,cols,cin,cout,batch,"
                         "algorithm,reps,best_ns,mean_ns,flops\n");
  auto const r = invoke({"report", csv});
  EXPECT_NE(r.code, kExitOk);
  EXPECT_NE(r.err.find("gflops"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({"bench", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(invoke({"bench", "--algorithms", "fft"}).code, kExitUsage);
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"report"}).code, kExitUsage);
}

}  // namespace
}  // namespace portconv::cli
