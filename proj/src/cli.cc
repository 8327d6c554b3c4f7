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

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "portconv/error.h"
#include "portconv/parallel.h"
#include "portconv/selector.h"
#include "portconv/verify.h"

namespace portconv::cli {
namespace {

std::vector<Algorithm> requested(CliConfig const& cli) {
  if (!cli.algorithms.empty()) return cli.algorithms;
  return {kAllAlgorithms.begin(), kAllAlgorithms.end()};
}

std::vector<ConvConfig> load_configs(CliConfig const& cli) {
  if (!cli.configs_path) return resnet50_configs(cli.batch);
  std::ifstream in{*cli.configs_path};
  if (!in) throw ParseError(0, "cannot open config file " + *cli.configs_path);
  try {
    return read_config_file(in, cli.batch);
  } catch (ParseError const& e) {
    throw ParseError(e.line(), *cli.configs_path + ": " + e.what());
  }
}

// Writes to --output when given, else to `out`.
template <typename Fn>
void with_output(CliConfig const& cli, std::ostream& out, Fn&& fn) {
  if (!cli.output_path) {
    fn(out);
    return;
  }
  std::ofstream file{*cli.output_path};
  if (!file) throw ParseError(0, "cannot write " + *cli.output_path);
  fn(file);
  if (!file) throw ParseError(0, "error writing " + *cli.output_path);
}

void print_worst(EquivalenceReport const& report, std::ostream& out) {
  for (auto const& [alg, err] : report.worst) {
    out << "  " << std::left << std::setw(17) << to_string(alg)
        << " worst relative error " << std::scientific << std::setprecision(3)
        << err << " (tolerance " << tolerance_for(alg) << ")\n"
        << std::defaultfloat;
  }
}

}  // namespace

int cmd_verify(CliConfig const& cli, std::ostream& out, std::ostream& err) {
  // Single-threaded so the checked outputs are bitwise reproducible.
  set_num_threads(1);
  auto const algorithms = requested(cli);
  bool ok = true;

  auto run_suite = [&](std::string const& name,
                       std::vector<ConvParams> const& configs) {
    auto const report =
        check_equivalence(configs, algorithms, cli.seed, cli.inject_fault);
    out << name << ": " << report.configs_checked << " configs, "
        << report.comparisons << " comparisons\n";
    print_worst(report, out);
    for (auto const& f : report.failures) {
      ok = false;
      out << "  FAIL " << to_string(f.algorithm) << " on "
          << describe(f.params) << ": relative error " << f.error << '\n';
    }
  };

  run_suite("fuzz", fuzz_configs(cli.fuzz_cases, cli.seed, algorithms));
  auto resnet = reduced_resnet50();
  run_suite("resnet50 (reduced)", resnet);
  out << (ok ? "verify: all algorithms within tolerance\n"
             : "verify: tolerance exceeded\n");
  (void)err;
  return ok ? kExitOk : kExitFailure;
}

int cmd_bench(CliConfig const& cli, std::ostream& out, std::ostream& err) {
  set_num_threads(cli.threads);
  auto const configs = load_configs(cli);
  auto const algorithms = requested(cli);
  std::vector<BenchResult> results;
  bool failed = false;
  for (auto const& config : configs) {
    for (Algorithm alg : algorithms) {
      if (!supports(alg, config.params)) continue;
      try {
        results.push_back(
            run_bench(config, alg, cli.reps, cli.warmups, cli.seed));
        auto const& r = results.back();
        err << config.label << ' ' << to_string(alg) << ' ' << std::fixed
            << std::setprecision(2) << r.gflops << " GFLOP/s\n"
            << std::defaultfloat;
      } catch (Error const& e) {
        failed = true;
        err << config.label << ' ' << to_string(alg) << " failed: " << e.what()
            << '\n';
      }
    }
  }
  with_output(cli, out,
              [&](std::ostream& os) { write_report(results, cli.format, os); });
  return failed ? kExitFailure : kExitOk;
}

int cmd_tune(CliConfig const& cli, std::ostream& out, std::ostream& err) {
  set_num_threads(cli.threads);
  auto const configs = load_configs(cli);
  auto const result =
      autotune(configs, cli.reps, cli.seed, cli.warmups, cli.algorithms);
  for (auto const& w : result.warnings) err << "warning: " << w << '\n';
  with_output(cli, out, [&](std::ostream& os) {
    write_selector_table(result.table, os);
  });
  std::ostream& log = cli.output_path ? out : err;
  log << "wins per algorithm:\n";
  for (auto const& [alg, wins] : result.win_counts) {
    log << "  " << std::left << std::setw(17) << to_string(alg) << wins
        << '\n';
  }
  return kExitOk;
}

int cmd_report(CliConfig const& cli, std::ostream& out, std::ostream& err) {
  (void)err;
  if (!cli.input_path) throw ParseError(0, "report needs an input CSV path");
  std::ifstream in{*cli.input_path};
  if (!in) throw ParseError(0, "cannot open " + *cli.input_path);
  auto const rows = read_report_csv(in);
  with_output(cli, out, [&](std::ostream& os) {
    if (cli.format == ReportFormat::Markdown) {
      write_report_rows(rows, ReportFormat::Markdown, os);
    } else {
      write_plot_data(rows, os);
    }
  });
  return kExitOk;
}

namespace {

void add_common(CLI::App* sub, CliConfig& cli, std::string& algorithms,
                std::string& format) {
  sub->add_option("--batch", cli.batch, "Batch size")
      ->check(CLI::PositiveNumber);
  sub->add_option("--reps", cli.reps, "Timed repetitions")
      ->check(CLI::PositiveNumber);
  sub->add_option("--warmups", cli.warmups, "Untimed warm-up runs")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", cli.seed, "Seed for generated operands");
  sub->add_option("--algorithms", algorithms,
                  "Comma-separated subset, e.g. im2col,winograd");
  sub->add_option("--configs", cli.configs_path,
                  "File of 'K S H W Cin Cout' lines");
  sub->add_option("--output", cli.output_path, "Output file (default stdout)");
  sub->add_option("--threads", cli.threads,
                  "Parallel degree, 0 for all logical cores")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--format", format, "csv or markdown")
      ->check(CLI::IsMember({"csv", "markdown"}));
}

std::vector<Algorithm> parse_algorithm_list(std::string const& text) {
  std::vector<Algorithm> out;
  std::stringstream ss{text};
  for (std::string name; std::getline(ss, name, ',');) {
    if (name.empty()) continue;
    auto const alg = parse_algorithm(name);
    if (!alg) throw CLI::ValidationError("--algorithms", "unknown algorithm '" + name + "'");
    if (std::find(out.begin(), out.end(), *alg) == out.end()) out.push_back(*alg);
  }
  return out;
}

}  // namespace

int run(std::vector<std::string> const& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Convolution algorithms, selection and benchmarking", "portconv"};
  app.require_subcommand(1);
  CliConfig cli;
  std::string algorithms;
  std::string format = "csv";
  std::string fault;

  auto* verify = app.add_subcommand(
      "verify", "Check every algorithm against the reference convolution");
  auto* bench = app.add_subcommand("bench", "Time algorithms on a config suite");
  auto* tune = app.add_subcommand("tune", "Autotune a selector table");
  auto* report = app.add_subcommand("report", "Convert a bench CSV");
  for (auto* sub : {verify, bench, tune, report}) {
    add_common(sub, cli, algorithms, format);
  }
  verify->add_option("--fuzz-cases", cli.fuzz_cases,
                     "Number of random configurations")
      ->check(CLI::PositiveNumber);
  // Test hook: corrupt one output element of the named algorithm.
  verify->add_option("--inject-fault", fault)->group("");
  report->add_option("input", cli.input_path, "CSV written by bench")
      ->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    cli.algorithms = parse_algorithm_list(algorithms);
    if (!fault.empty()) {
      auto const alg = parse_algorithm(fault);
      if (!alg) throw CLI::ValidationError("--inject-fault", "unknown algorithm");
      cli.inject_fault = alg;
    }
  } catch (CLI::CallForHelp const&) {
    out << app.help();
    return kExitOk;
  } catch (CLI::ParseError const& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  cli.format = format == "markdown" ? ReportFormat::Markdown : ReportFormat::Csv;
  cli.subcommand = app.get_subcommands().front()->get_name();

  try {
    if (cli.subcommand == "verify") return cmd_verify(cli, out, err);
    if (cli.subcommand == "bench") return cmd_bench(cli, out, err);
    if (cli.subcommand == "tune") return cmd_tune(cli, out, err);
    return cmd_report(cli, out, err);
  } catch (ParseError const& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (Error const& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace portconv::cli
