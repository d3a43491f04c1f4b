// Copyright 2026 The tcnae Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "tcnae/checkpoint.hpp"
#include "tcnae/detection.hpp"
#include "tcnae/entropy_coding.hpp"
#include "tcnae/errors.hpp"
#include "tcnae/experiment.hpp"
#include "tcnae/model.hpp"

namespace py = pybind11;
using namespace tcnae;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Votes = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(std::move(shape), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
  py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }
std::vector<std::uint8_t> to_votes(const Votes& a) { return {a.data(), a.data() + a.size()}; }

py::object parse_json(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json dump_json(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::dict counts_dict(const DetectionCounts& c) {
  py::dict d;
  d["tp"] = c.tp;
  d["fp"] = c.fp;
  d["fn"] = c.fn;
  d["tn"] = c.tn;
  return d;
}

// A model plus the normalization metadata it was trained with.
struct PyModel {
  TcnAutoencoder model;
  CheckpointMeta meta;
};

ExperimentConfig config_from(const py::object& config) {
  return ExperimentConfig::from_json(dump_json(config));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rate-distortion TCN autoencoder for time-series anomaly detection";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<NumericAbort>(m, "NumericAbort", PyExc_ArithmeticError);
  py::register_exception<DegenerateMetricError>(m, "DegenerateMetricError", PyExc_ArithmeticError);

  py::class_<PyModel>(m, "Model")
      .def(py::init([](const py::object& config, std::uint64_t seed) {
             return PyModel{TcnAutoencoder(tcn_config_from_json(dump_json(config)), seed), {}};
           }),
           py::arg("config"), py::arg("seed") = 0)
      .def_static("load", [](const std::filesystem::path& dir) {
        LoadedCheckpoint c = load_checkpoint(dir);
        return PyModel{std::move(c.model), std::move(c.meta)};
      })
      .def("save", [](const PyModel& self, const std::filesystem::path& dir) {
        save_checkpoint(self.model, self.meta, dir);
      })
      .def_property_readonly("config", [](const PyModel& self) {
        return parse_json(tcn_config_to_json(self.model.config()));
      })
      .def_property_readonly("omega", [](const PyModel& self) {
        return to_array(self.model.normalizer().omega);
      })
      .def_property_readonly("feature_names", [](const PyModel& self) { return self.meta.feature_names; })
      .def_property_readonly("parameter_count", [](const PyModel& self) {
        std::size_t n = 0;
        for (const Parameter& p : self.model.parameters()) n += p.tensor.numel();
        return n;
      })
      .def("encode", [](const PyModel& self, const Array& x) {
        NoGradGuard guard;
        return to_array(self.model.encode(to_tensor(x)));
      })
      .def("decode", [](const PyModel& self, const Array& z) {
        NoGradGuard guard;
        return to_array(self.model.decode(to_tensor(z)));
      })
      .def("reconstruct", [](const PyModel& self, const Array& x) {
        return to_array(self.model.forward_eval(to_tensor(x)));
      })
      .def("latent", [](const PyModel& self, const Array& x) {
        return to_array(self.model.latent_eval(to_tensor(x)));
      })
      .def("compress", [](const PyModel& self, const Array& x) {
        if (!self.model.entropy_tables()) throw ContractError("model has no entropy tables");
        const Tensor z = self.model.latent_eval(to_tensor(x));
        std::vector<std::int32_t> symbols;
        for (double v : z.data()) symbols.push_back(static_cast<std::int32_t>(v));
        const Bitstream bs = compress(symbols, *self.model.entropy_tables());
        return py::bytes(reinterpret_cast<const char*>(bs.bytes.data()), bs.bytes.size());
      })
      .def("decompress", [](const PyModel& self, const py::bytes& data) {
        if (!self.model.entropy_tables()) throw ContractError("model has no entropy tables");
        const std::string s = data;
        Bitstream bs{std::vector<std::uint8_t>(s.begin(), s.end())};
        const auto symbols = decompress(bs, *self.model.entropy_tables());
        std::vector<double> z(symbols.begin(), symbols.end());
        return to_array(Tensor({z.size()}, z));
      });

  m.def("scaled_abs_error", [](const Array& x, const Array& x_hat, const Array& omega) {
    return to_array(scaled_abs_error(to_tensor(x), to_tensor(x_hat), to_vector(omega)));
  });
  m.def("max_abs_error", [](const Array& ae) { return to_array(max_abs_error(to_tensor(ae))); });
  m.def("subset_means", [](const Array& mae, std::size_t subset) {
    return to_array(subset_means(to_vector(mae), subset));
  }, py::arg("mae"), py::arg("subset") = kSubsetSize);
  m.def("one_shot", [](const Array& means, double delta) {
    return to_array(one_shot(to_vector(means), delta));
  }, py::arg("means"), py::arg("delta") = kDefaultDelta);
  m.def("expand_votes", [](const Votes& d, std::size_t subset) {
    return to_array(expand_votes(to_votes(d), subset));
  }, py::arg("d"), py::arg("subset") = kSubsetSize);
  m.def("multi_shot", [](const Array& cs, double limit) {
    return to_array(multi_shot(to_vector(cs), limit));
  }, py::arg("cs"), py::arg("limit") = kDefaultConfidenceLimit);
  m.def("f1_score", [](const Votes& pred, const Votes& labels) {
    const F1Result r = f1_score(to_votes(pred), to_votes(labels));
    py::dict d = counts_dict(r.counts);
    d["f1"] = r.f1;
    return d;
  });

  py::class_<ConfidenceStream>(m, "ConfidenceStream")
      .def(py::init<std::size_t>(), py::arg("window_length") = 200)
      .def("push", [](ConfidenceStream& s, const Votes& v) { return s.push(to_votes(v)); })
      .def("flush", [](ConfidenceStream& s) { return to_array(s.flush()); })
      .def_property_readonly("pushed", &ConfidenceStream::pushed);

  m.def("synth_corpus", [](const py::object& config, std::uint64_t seed) {
    const nlohmann::json synth = dump_json(config);
    const nlohmann::json wrapped = {
        {"model", {{"input_channels", synth.value("channels", SynthConfig{}.channels)}}},
        {"data", {{"synth", synth}}}};
    const SynthConfig sc = ExperimentConfig::from_json(wrapped).data.synth;
    py::list out;
    for (const SynthSet& s : synth_corpus(sc, seed)) {
      py::dict d;
      d["id"] = s.series.id;
      d["kind"] = anomaly_kind_name(s.kind);
      d["features"] = s.series.feature_names;
      Array values({s.series.channels(), s.series.length()});
      std::copy(s.series.values.begin(), s.series.values.end(), values.mutable_data());
      d["values"] = values;
      d["labels"] = to_array(s.series.labels);
      out.append(d);
    }
    return out;
  }, py::arg("config") = py::dict(), py::arg("seed") = 0);

  m.def("canonical_config", [](const py::object& config) {
    return parse_json(config_from(config).to_json());
  }, py::arg("config") = py::dict());
  m.def("config_hash", [](const py::object& config) { return config_from(config).hash(); });

  m.def("train", [](const py::object& config) {
    const ExperimentConfig c = config_from(config);
    std::ostringstream log;
    const TrainOutcome t = run_train(c, log);
    py::list epochs;
    for (const EpochMetrics& e : t.report.epochs) {
      py::dict d;
      d["epoch"] = e.epoch;
      d["rate"] = e.rate;
      d["distortion"] = e.distortion;
      d["reconstruction"] = e.reconstruction;
      d["total"] = e.total;
      epochs.append(d);
    }
    py::dict out;
    out["checkpoint"] = t.checkpoint_dir;
    out["epochs"] = epochs;
    out["best_epoch"] = t.report.best_epoch;
    return out;
  });
  m.def("evaluate", [](const py::object& config, const std::filesystem::path& checkpoint) {
    std::ostringstream log;
    return parse_json(run_eval(config_from(config), checkpoint, log).to_json());
  });
  m.def("stream", [](const py::object& config, const std::filesystem::path& checkpoint,
                     std::optional<double> delta) {
    std::ostringstream log;
    const StreamSummary s = run_stream(config_from(config), checkpoint, std::nullopt, delta, log);
    py::dict d;
    d["delta"] = s.delta;
    d["multi_shot"] = counts_dict(s.multi_shot);
    d["one_shot"] = counts_dict(s.one_shot);
    return d;
  }, py::arg("config"), py::arg("checkpoint"), py::arg("delta") = py::none());
}
