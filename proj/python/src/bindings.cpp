#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <string>

#include "quadlearn/config.hpp"
#include "quadlearn/error.hpp"
#include "quadlearn/fuzzy.hpp"
#include "quadlearn/harness.hpp"
#include "quadlearn/learning.hpp"
#include "quadlearn/model_io.hpp"

namespace py = pybind11;
using namespace quadlearn;

namespace {

py::tuple vec(const Vec3& v) { return py::make_tuple(v.x, v.y, v.z); }

py::dict metrics_dict(const MetricsReport& m) {
  py::dict d;
  d["mae"] = m.mae;
  d["max_error"] = m.max_error;
  d["variance"] = m.variance;
  d["median_error"] = m.error_quartiles.median;
  d["mean_step_us"] = m.mean_step_us;
  d["max_step_us"] = m.max_step_us;
  d["samples"] = m.samples;
  return d;
}

// Column-wise view of a flight log; plain lists so numpy stays optional.
py::dict log_dict(const FlightLog& log) {
  py::list t, pos, ref, du, step_us;
  for (const auto& r : log.rows) {
    t.append(r.t);
    pos.append(vec(r.position));
    ref.append(vec(r.ref_position));
    du.append(vec(r.delta_u));
    step_us.append(r.step_us);
  }
  py::dict d;
  d["t"] = t;
  d["position"] = pos;
  d["ref_position"] = ref;
  d["delta_u"] = du;
  d["step_us"] = step_us;
  d["settle_time"] = log.settle_time;
  d["aborted"] = log.aborted;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quadrotor tracking with an online-trained neural outer loop";

  // Library errors surface as QuadlearnError with the error code in `.code`.
  static PyObject* error_type = py::exception<Error>(m, "QuadlearnError").release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error_type)(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type, inst.ptr());
    }
  });

  py::class_<ExperimentConfig>(m, "Config")
      .def(py::init(&ExperimentConfig::defaults))
      .def_static("from_json", &parse_config, py::arg("text"))
      .def_static("load", [](const std::filesystem::path& p) { return load_config(p); })
      .def("to_json", [](const ExperimentConfig& c) { return config_to_json(c); })
      .def_property_readonly("trajectory_names", [](const ExperimentConfig& c) {
        std::vector<std::string> names;
        for (const auto& [name, t] : c.trajectories) names.push_back(name);
        return names;
      });

  py::class_<ControllerModel, std::shared_ptr<ControllerModel>>(m, "Model")
      .def_static("load", [](const std::filesystem::path& p) {
        return std::make_shared<ControllerModel>(load_model(p));
      })
      .def("save", [](const ControllerModel& c, const std::filesystem::path& p) { save_model(c, p); })
      .def("to_json", &serialize_model)
      .def_static("from_json", [](const std::string& text) {
        return std::make_shared<ControllerModel>(deserialize_model(text));
      })
      .def("forward",
           [](const ControllerModel& c, std::size_t axis, const Features& f) {
             if (axis >= kAxes) throw Error(ErrorCode::OutOfRange, "axis must be 0, 1 or 2");
             return c.nets[axis].forward(f);
           },
           py::arg("axis"), py::arg("features"))
      .def(py::self == py::self);

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("rows_per_axis", &Dataset::rows_per_axis)
      .def("to_csv", [](const Dataset& d) { return dataset_to_csv(d); })
      .def_static("from_csv", [](const std::string& t) { return dataset_from_csv(t); });

  m.def("fuzzy_mapping",
        [](double e, double de, double alpha, double e_scale, double de_scale) {
          FuzzyParams p;
          p.e_scale = e_scale;
          p.de_scale = de_scale;
          return fuzzy_mapping(e, de, alpha, p);
        },
        py::arg("e"), py::arg("de"), py::arg("alpha"), py::arg("e_scale") = 1.0,
        py::arg("de_scale") = 1.0);
  m.def("mamdani_oracle",
        [](double e, double de, double alpha, double e_scale, double de_scale) {
          FuzzyParams p;
          p.e_scale = e_scale;
          p.de_scale = de_scale;
          return mamdani_oracle(e, de, alpha, p);
        },
        py::arg("e"), py::arg("de"), py::arg("alpha"), py::arg("e_scale") = 1.0,
        py::arg("de_scale") = 1.0);
  m.def("improvement_ratio", &improvement_ratio, py::arg("candidate"), py::arg("baseline"));

  m.def("collect",
        [](const ExperimentConfig& c, std::size_t samples, std::uint64_t seed) {
          py::gil_scoped_release release;
          return collect_offline(c.plant, c.collection.disturbance, c.pid,
                                 c.collection_trajectories(), samples, seed);
        },
        py::arg("config"), py::arg("samples"), py::arg("seed") = 1);

  m.def("pretrain",
        [](const ExperimentConfig& c, const Dataset& d) {
          PretrainResult r;
          {
            py::gil_scoped_release release;
            r = pretrain(d, c.network, c.trainer);
          }
          py::list reports;
          for (const auto& a : r.reports) {
            py::dict rep;
            rep["iterations"] = a.iterations;
            rep["status"] = std::string(to_string(a.status));
            rep["train_nse"] = a.train_nse;
            rep["heldout_nse"] = a.heldout_nse;
            rep["loss_history"] = a.loss_history;
            reports.append(rep);
          }
          return py::make_tuple(std::make_shared<ControllerModel>(std::move(r.model)), reports);
        },
        py::arg("config"), py::arg("dataset"));

  m.def("fly",
        [](const ExperimentConfig& c, const std::string& trajectory, const std::string& controller,
           std::shared_ptr<ControllerModel> model, std::uint64_t seed) {
          RunOutcome r;
          {
            py::gil_scoped_release release;
            r = run_experiment(
                make_experiment(c, trajectory, parse_controller_kind(controller), model), seed);
          }
          py::dict d;
          d["metrics"] = metrics_dict(r.metrics);
          d["log"] = log_dict(r.log);
          d["failed"] = r.failed;
          d["failure"] = r.failure;
          return d;
        },
        py::arg("config"), py::arg("trajectory"), py::arg("controller"),
        py::arg("model") = nullptr, py::arg("seed") = 100);
}
