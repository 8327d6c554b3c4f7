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

#ifndef PORTCONV_CLI_H_
#define PORTCONV_CLI_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "portconv/algorithm.h"
#include "portconv/bench.h"

namespace portconv::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct CliConfig {
  std::string subcommand;
  Index batch = 1;
  Index reps = 10;
  Index warmups = 2;
  std::uint64_t seed = 0;
  std::vector<Algorithm> algorithms;  // empty: all
  std::optional<std::string> configs_path;
  std::optional<std::string> output_path;
  int threads = 0;  // 0: host logical cores
  ReportFormat format = ReportFormat::Csv;
  std::optional<std::string> input_path;  // report only
  Index fuzz_cases = 200;                  // verify only
  std::optional<Algorithm> inject_fault;   // verify test hook
};

int cmd_verify(CliConfig const& cli, std::ostream& out, std::ostream& err);
int cmd_bench(CliConfig const& cli, std::ostream& out, std::ostream& err);
int cmd_tune(CliConfig const& cli, std::ostream& out, std::ostream& err);
int cmd_report(CliConfig const& cli, std::ostream& out, std::ostream& err);

/// Parses argv (without the program name) and dispatches.
int run(std::vector<std::string> const& args, std::ostream& out,
        std::ostream& err);

}  // namespace portconv::cli

#endif  // PORTCONV_CLI_H_
