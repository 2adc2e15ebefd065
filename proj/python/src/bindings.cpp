#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "simplicity/runner.hpp"

namespace py = pybind11;
using namespace simplicity;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::memcpy(m.values().data(), a.data(), m.size() * sizeof(double));
  return m;
}

Array to_array(const Matrix& m) {
  Array a({m.rows(), m.cols()});
  std::memcpy(a.mutable_data(), m.values().data(), m.size() * sizeof(double));
  return a;
}

std::span<const std::uint8_t> byte_view(const py::bytes& b) {
  std::string_view v = b;
  return {reinterpret_cast<const std::uint8_t*>(v.data()), v.size()};
}

py::bytes to_bytes(const std::vector<std::uint8_t>& v) {
  return {reinterpret_cast<const char*>(v.data()), v.size()};
}

py::array_t<std::uint8_t> to_label_array(const std::vector<std::uint8_t>& v) {
  return py::array_t<std::uint8_t>(static_cast<py::ssize_t>(v.size()), v.data());
}

Dataset to_dataset(const Array& images, const std::vector<std::uint8_t>& labels) {
  Dataset d;
  d.images = to_matrix(images);
  d.labels = labels;
  if (d.images.rows() != d.labels.size()) {
    throw std::invalid_argument("images and labels disagree on sample count");
  }
  return d;
}

py::dict config_dict(const ExperimentConfig& c) {
  py::dict d;
  d["index"] = c.index;
  d["activation"] = to_string(c.activation);
  d["hidden"] = c.hidden;
  d["lr"] = c.lr;
  d["epochs"] = c.epochs;
  d["batch_size"] = c.batch_size;
  d["seed"] = c.seed;
  d["sensitivity_epsilon"] = c.sensitivity_epsilon;
  d["sensitivity_samples"] = c.sensitivity_samples;
  d["stream_mode"] = to_string(c.stream_mode);
  return d;
}

py::dict row_dict(const ExperimentOutcome& o) {
  py::dict d;
  d["index"] = o.row.index;
  d["final_test_accuracy"] = o.row.final_test_accuracy;
  d["lz76_phrases"] = o.row.lz76_phrases;
  d["lzss_bytes"] = o.row.lzss_bytes;
  d["sensitivity_mean_l2"] = o.row.sensitivity_mean_l2;
  d["wall_seconds"] = o.row.wall_seconds;
  d["error"] = o.error ? py::object(py::str(*o.error)) : py::object(py::none());
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "MLP training on MNIST with output-complexity and sensitivity probes";

  py::register_exception<IdxFormatError>(m, "IdxFormatError", PyExc_ValueError);
  py::register_exception<LzssDecodeError>(m, "LzssDecodeError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Prng>(m, "Prng")
      .def(py::init<std::uint64_t>(), py::arg("seed") = 0)
      .def("next", &Prng::next)
      .def("uniform", &Prng::uniform, py::arg("lo") = 0.0, py::arg("hi") = 1.0)
      .def("gaussian", &Prng::gaussian)
      .def("below", &Prng::below, py::arg("bound"))
      .def_property_readonly("state", &Prng::state);

  m.def("lz76_complexity", [](const py::bytes& s) { return lz76_complexity(byte_view(s)); });
  m.def("lzss_encode", [](const py::bytes& s) { return to_bytes(lzss_encode(byte_view(s))); });
  m.def("lzss_decode", [](const py::bytes& s) { return to_bytes(lzss_decode(byte_view(s))); });
  m.def("lzss_compress_len", [](const py::bytes& s) { return lzss_compress_len(byte_view(s)); });

  m.def("normalize", &normalize, py::arg("pixel"));
  m.def("parse_idx_images", [](const py::bytes& b) { return to_array(parse_idx_images(byte_view(b))); });
  m.def("parse_idx_labels",
        [](const py::bytes& b) { return to_label_array(parse_idx_labels(byte_view(b))); });

  py::class_<Mlp>(m, "Mlp")
      .def_property_readonly("activation", [](const Mlp& n) { return to_string(n.activation); })
      .def_property_readonly("parameter_count", &Mlp::parameter_count)
      .def_property_readonly("weights",
                             [](const Mlp& n) {
                               py::list out;
                               for (const auto& l : n.layers) out.append(to_array(l.weights));
                               return out;
                             })
      .def("forward", [](const Mlp& n, const Array& x) { return to_array(forward(n, to_matrix(x))); })
      .def("predict",
           [](const Mlp& n, const Array& x) { return to_label_array(predict(n, to_matrix(x))); })
      .def(
          "sensitivity",
          [](const Mlp& n, const Array& images, const std::vector<std::uint8_t>& labels,
             double epsilon, std::size_t n_samples, std::uint64_t seed) {
            Prng rng(seed);
            const auto r = sensitivity(n, to_dataset(images, labels), epsilon, n_samples, rng);
            return py::make_tuple(r.mean_l2, r.per_sample);
          },
          py::arg("images"), py::arg("labels"), py::arg("epsilon") = 1e-5,
          py::arg("n_samples") = 1000, py::arg("seed") = 0,
          "Returns (mean_l2, per_sample) for perturbations of the given inputs.");

  m.def(
      "build_mlp",
      [](const std::vector<std::size_t>& hidden, const std::string& activation,
         std::uint64_t seed, double leaky_slope) {
        Prng rng(seed);
        return build_mlp(hidden, parse_activation(activation, leaky_slope), rng);
      },
      py::arg("hidden"), py::arg("activation") = "relu", py::arg("seed") = 0,
      py::arg("leaky_slope") = 0.01);

  m.def("default_experiments", [] {
    py::list out;
    for (const auto& c : default_experiments()) out.append(config_dict(c));
    return out;
  });

  m.def(
      "run_suite",
      [](const std::string& data_dir, const std::vector<int>& only, std::size_t parallelism,
         std::uint64_t seed_offset, const std::optional<std::string>& out_dir,
         bool deterministic_output) {
        std::vector<ExperimentConfig> configs;
        for (auto c : default_experiments()) {
          if (!only.empty() && std::find(only.begin(), only.end(), c.index) == only.end()) {
            continue;
          }
          c.seed += seed_offset;
          configs.push_back(c);
        }
        SuiteOptions options;
        options.parallelism = parallelism;
        options.deterministic_output = deterministic_output;
        if (out_dir) options.out_dir = *out_dir;
        SuiteResult result;
        {
          py::gil_scoped_release release;
          result = run_suite(configs, DataPaths::in_directory(data_dir), options);
        }
        py::list rows;
        for (const auto& o : result.outcomes) rows.append(row_dict(o));
        return rows;
      },
      py::arg("data_dir"), py::arg("only") = std::vector<int>{}, py::arg("parallelism") = 1,
      py::arg("seed_offset") = 0, py::arg("out_dir") = py::none(),
      py::arg("deterministic_output") = false,
      "Trains the default experiments and returns one result dict per experiment.");

  m.def(
      "main",
      [](const std::vector<std::string>& argv) {
        std::vector<const char*> args = {"simplicity_probe"};
        for (const auto& a : argv) args.push_back(a.c_str());
        py::gil_scoped_release release;
        return cli_main(static_cast<int>(args.size()), args.data());
      },
      py::arg("argv"), "Runs the command-line interface; returns the exit code.");
}
