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

#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cctype>
#include <optional>
#include <sstream>

#include "portconv/algorithm.h"
#include "portconv/bench.h"
#include "portconv/conv_algos.h"
#include "portconv/conv_ref.h"
#include "portconv/error.h"
#include "portconv/gemm.h"
#include "portconv/parallel.h"
#include "portconv/pooling.h"
#include "portconv/selector.h"
#include "portconv/tensor.h"

namespace py = pybind11;
namespace pc = portconv;

namespace {

using FloatArray =
    py::array_t<float, py::array::c_style | py::array::forcecast>;

std::vector<float> copy_values(FloatArray const& a) {
  return {a.data(), a.data() + a.size()};
}

pc::Tensor to_tensor(FloatArray const& a) {
  if (a.ndim() != 4) throw pc::ShapeMismatchError("expected an NHWC array");
  return {{a.shape(0), a.shape(1), a.shape(2), a.shape(3)}, copy_values(a)};
}

pc::Filter to_filter(FloatArray const& a) {
  if (a.ndim() != 4) {
    throw pc::ShapeMismatchError("expected a (Kh, Kw, C, F) filter array");
  }
  return {a.shape(0), a.shape(1), a.shape(2), a.shape(3), copy_values(a)};
}

py::array_t<float> to_array(pc::Tensor const& t) {
  auto const& s = t.shape();
  py::array_t<float> out({s.batch, s.rows, s.cols, s.channels});
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

pc::Matrix to_matrix(FloatArray const& a) {
  if (a.ndim() != 2) throw pc::ShapeMismatchError("expected a 2-D array");
  return {a.shape(0), a.shape(1), copy_values(a)};
}

py::array_t<float> matrix_array(pc::Matrix const& m) {
  py::array_t<float> out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

pc::ConvParams params_for(FloatArray const& input, FloatArray const& filter,
                          pc::Index stride, pc::Padding padding) {
  if (input.ndim() != 4 || filter.ndim() != 4) {
    throw pc::ShapeMismatchError("expected 4-D input and filter arrays");
  }
  pc::ConvParams p;
  p.window_rows = filter.shape(0);
  p.window_cols = filter.shape(1);
  p.stride_rows = p.stride_cols = stride;
  p.padding = padding;
  p.input = {input.shape(0), input.shape(1), input.shape(2), input.shape(3)};
  p.features = filter.shape(3);
  return p;
}

}  // namespace

PYBIND11_MODULE(_portconv, m) {
  m.doc() = "NHWC convolution algorithms, selection and benchmarking";

  auto base = py::register_exception<pc::Error>(m, "Error");
  py::register_exception<pc::InvalidParamsError>(m, "InvalidParamsError",
                                                 base.ptr());
  py::register_exception<pc::ShapeMismatchError>(m, "ShapeMismatchError",
                                                 base.ptr());
  py::register_exception<pc::IncompatibleAlgorithmError>(
      m, "IncompatibleAlgorithmError", base.ptr());
  py::register_exception<pc::ParseError>(m, "ParseError", base.ptr());

  py::enum_<pc::Padding>(m, "Padding")
      .value("SAME", pc::Padding::Same)
      .value("VALID", pc::Padding::Valid);

  py::enum_<pc::Algorithm> alg(m, "Algorithm");
  for (auto a : pc::kAllAlgorithms) {
    std::string name{pc::to_string(a)};
    for (char& ch : name) ch = static_cast<char>(std::toupper(ch));
    alg.value(name.c_str(), a);
  }
  alg.def_property_readonly("label", [](pc::Algorithm a) {
    return std::string{pc::to_string(a)};
  });
  m.attr("ALL_ALGORITHMS") =
      std::vector<pc::Algorithm>{pc::kAllAlgorithms.begin(),
                                 pc::kAllAlgorithms.end()};

  py::class_<pc::Shape4D>(m, "Shape4D")
      .def(py::init<pc::Index, pc::Index, pc::Index, pc::Index>(),
           py::arg("batch"), py::arg("rows"), py::arg("cols"),
           py::arg("channels"))
      .def_readwrite("batch", &pc::Shape4D::batch)
      .def_readwrite("rows", &pc::Shape4D::rows)
      .def_readwrite("cols", &pc::Shape4D::cols)
      .def_readwrite("channels", &pc::Shape4D::channels)
      .def("as_tuple",
           [](pc::Shape4D const& s) {
             return py::make_tuple(s.batch, s.rows, s.cols, s.channels);
           })
      .def(py::self == py::self)
      .def("__repr__", [](pc::Shape4D const& s) {
        std::ostringstream os;
        os << "Shape4D(" << s.batch << ", " << s.rows << ", " << s.cols
           << ", " << s.channels << ")";
        return os.str();
      });

  py::class_<pc::ConvParams>(m, "ConvParams")
      .def(py::init(&pc::ConvParams::square), py::arg("window"),
           py::arg("stride"), py::arg("rows"), py::arg("cols"),
           py::arg("in_features"), py::arg("out_features"),
           py::arg("batch") = 1, py::arg("padding") = pc::Padding::Same)
      .def_readwrite("window_rows", &pc::ConvParams::window_rows)
      .def_readwrite("window_cols", &pc::ConvParams::window_cols)
      .def_readwrite("stride_rows", &pc::ConvParams::stride_rows)
      .def_readwrite("stride_cols", &pc::ConvParams::stride_cols)
      .def_readwrite("padding", &pc::ConvParams::padding)
      .def_readwrite("input", &pc::ConvParams::input)
      .def_readwrite("features", &pc::ConvParams::features)
      .def("validate", &pc::ConvParams::validate);

  m.def("output_shape", &pc::output_shape, py::arg("params"));
  m.def("flop_count", &pc::flop_count, py::arg("params"));
  m.def("supports", &pc::supports, py::arg("algorithm"), py::arg("params"));
  m.def("multiply_count", &pc::multiply_count, py::arg("algorithm"),
        py::arg("params"));
  m.def(
      "max_relative_error",
      [](FloatArray const& a, FloatArray const& b) {
        return pc::max_relative_error(
            std::span<float const>{a.data(), static_cast<std::size_t>(a.size())},
            std::span<float const>{b.data(), static_cast<std::size_t>(b.size())});
      },
      py::arg("actual"), py::arg("expected"));
  m.def(
      "random_tensor",
      [](pc::Shape4D shape, std::uint64_t seed) {
        return to_array(pc::random_tensor(shape, seed));
      },
      py::arg("shape"), py::arg("seed"));

  m.def(
      "conv2d",
      [](FloatArray const& input, FloatArray const& filter, pc::Index stride,
         pc::Padding padding, std::optional<pc::Algorithm> algorithm) {
        auto const p = params_for(input, filter, stride, padding);
        auto const x = to_tensor(input);
        auto const f = to_filter(filter);
        pc::Tensor const y = [&] {
          py::gil_scoped_release release;
          return algorithm ? pc::convolve(*algorithm, x, f, p)
                           : pc::conv2d_ref(x, f, p);
        }();
        return to_array(y);
      },
      py::arg("input"), py::arg("filter"), py::arg("stride") = 1,
      py::arg("padding") = pc::Padding::Same,
      py::arg("algorithm") = py::none(),
      "Convolves an NHWC input with a (Kh, Kw, C, F) filter. Without an "
      "algorithm the serial reference is used.");

  m.def(
      "max_pool2d",
      [](FloatArray const& input, pc::Index window, pc::Index stride,
         pc::Padding padding) {
        return to_array(pc::max_pool2d(to_tensor(input), {window, window},
                                       {stride, stride}, padding));
      },
      py::arg("input"), py::arg("window"), py::arg("stride"),
      py::arg("padding") = pc::Padding::Valid);
  m.def(
      "avg_pool2d",
      [](FloatArray const& input, pc::Index window, pc::Index stride,
         pc::Padding padding) {
        return to_array(pc::avg_pool2d(to_tensor(input), {window, window},
                                       {stride, stride}, padding));
      },
      py::arg("input"), py::arg("window"), py::arg("stride"),
      py::arg("padding") = pc::Padding::Valid);

  m.def(
      "gemm",
      [](FloatArray const& a, FloatArray const& b, bool blocked) {
        auto const ma = to_matrix(a);
        auto const mb = to_matrix(b);
        return matrix_array(blocked ? pc::gemm_blocked(ma, mb)
                                    : pc::gemm_naive(ma, mb));
      },
      py::arg("a"), py::arg("b"), py::arg("blocked") = true);

  py::class_<pc::ConvConfig>(m, "ConvConfig")
      .def_readonly("label", &pc::ConvConfig::label)
      .def_readonly("params", &pc::ConvConfig::params);
  m.def("make_config", &pc::make_config, py::arg("window"), py::arg("stride"),
        py::arg("rows"), py::arg("cols"), py::arg("in_features"),
        py::arg("out_features"), py::arg("batch") = 1);
  m.def("resnet50_configs", &pc::resnet50_configs, py::arg("batch") = 1);

  py::class_<pc::BenchResult>(m, "BenchResult")
      .def_readonly("config", &pc::BenchResult::config)
      .def_readonly("algorithm", &pc::BenchResult::algorithm)
      .def_readonly("reps", &pc::BenchResult::reps)
      .def_readonly("best_time_ns", &pc::BenchResult::best_time_ns)
      .def_readonly("mean_time_ns", &pc::BenchResult::mean_time_ns)
      .def_readonly("flops", &pc::BenchResult::flops)
      .def_readonly("gflops", &pc::BenchResult::gflops);
  m.def(
      "run_bench",
      [](pc::ConvConfig const& config, pc::Algorithm algorithm, pc::Index reps,
         pc::Index warmups, std::uint64_t seed) {
        py::gil_scoped_release release;
        return pc::run_bench(config, algorithm, reps, warmups, seed);
      },
      py::arg("config"), py::arg("algorithm"), py::arg("reps") = 10,
      py::arg("warmups") = 2, py::arg("seed") = 0);
  m.def(
      "report_csv",
      [](std::vector<pc::BenchResult> const& results, bool markdown) {
        std::ostringstream os;
        pc::write_report(results,
                         markdown ? pc::ReportFormat::Markdown
                                  : pc::ReportFormat::Csv,
                         os);
        return os.str();
      },
      py::arg("results"), py::arg("markdown") = false);

  m.def(
      "select",
      [](std::string const& table_text, pc::ConvParams const& params) {
        std::istringstream in{table_text};
        return pc::select(pc::read_selector_table(in), params);
      },
      py::arg("table"), py::arg("params"),
      "Parses a selector table in text form and picks an algorithm.");
  m.def(
      "autotune",
      [](std::vector<pc::ConvConfig> const& configs, pc::Index reps,
         std::uint64_t seed) {
        pc::AutotuneResult result = [&] {
          py::gil_scoped_release release;
          return pc::autotune(configs, reps, seed);
        }();
        std::ostringstream os;
        pc::write_selector_table(result.table, os);
        return py::make_tuple(os.str(), result.warnings);
      },
      py::arg("configs"), py::arg("reps") = 3, py::arg("seed") = 0,
      "Returns (table_text, warnings).");

  m.def("set_num_threads", &pc::set_num_threads, py::arg("count"));
  m.def("num_threads", &pc::num_threads);
}
