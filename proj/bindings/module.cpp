#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "iotguard/errors.hpp"
#include "iotguard/harness.hpp"

namespace py = pybind11;
using namespace iotguard;

namespace {

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols())
      throw ParameterError("ragged rows cannot form a matrix");
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

std::vector<std::vector<double>> matrix_to_rows(const Matrix& m) {
  std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) rows[r][c] = m(r, c);
  return rows;
}

}  // namespace

PYBIND11_MODULE(_iotguard, m) {
  m.doc() = "IoTguard: semi-supervised IoT traffic classification";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<InternalError>(m, "InternalError", PyExc_RuntimeError);

  m.def("class_names", [] {
    std::vector<std::string> names;
    for (const auto cls : all_classes()) names.push_back(class_name(cls));
    return names;
  });
  m.def("class_code",
        [](const std::string& name) { return class_code(class_from_name(name)); });
  m.def("to_binary", [](const std::string& name) {
    return binary_name(to_binary(class_from_name(name)));
  });

  m.def("feature_names", [] {
    std::vector<std::pair<std::string, std::string>> schema;
    for (const auto& spec : feature_names())
      schema.emplace_back(spec.name,
                          spec.kind == FeatureKind::Discrete ? "discrete" : "continuous");
    return schema;
  });

  m.def(
      "generate_flow_log",
      [](const std::string& cls, int devices, int flows, std::uint64_t seed,
         const std::string& output) {
        ScenarioConfig cfg;
        cfg.cls = class_from_name(cls);
        cfg.device_count = devices;
        cfg.flows_per_device = flows;
        cfg.seed = seed;
        const auto log = generate(cfg);
        write_flow_log(output, log);
        return log.records.size();
      },
      py::arg("traffic_class"), py::arg("devices"), py::arg("flows"), py::arg("seed"),
      py::arg("output"));

  m.def(
      "extract_features",
      [](const std::string& flow_log, std::size_t window, const std::string& output) {
        const auto parsed = parse_flow_log(flow_log);
        const auto data = extract_all(parsed.log, window);
        write_feature_csv(output, data);
        return data.rows.size();
      },
      py::arg("flow_log"), py::arg("window"), py::arg("output"));

  py::class_<TriangularSet>(m, "TriangularSet")
      .def(py::init<double, double, double>(), py::arg("a"), py::arg("b"), py::arg("c"))
      .def_readonly("a", &TriangularSet::a)
      .def_readonly("b", &TriangularSet::b)
      .def_readonly("c", &TriangularSet::c);
  m.def("defuzzify", [](double a, double b, double c) { return defuzzify({a, b, c}); });

  py::class_<FcmConfig>(m, "FcmConfig")
      .def(py::init<>())
      .def_readwrite("m", &FcmConfig::m)
      .def_readwrite("max_iters", &FcmConfig::max_iters)
      .def_readwrite("tol", &FcmConfig::tol)
      .def_readwrite("restarts", &FcmConfig::restarts)
      .def_readwrite("seed", &FcmConfig::seed);

  py::class_<ClusterModel>(m, "ClusterModel")
      .def_readonly("c", &ClusterModel::c)
      .def_readonly("m", &ClusterModel::m)
      .def_readonly("objective", &ClusterModel::objective)
      .def_property_readonly("centers",
                             [](const ClusterModel& model) {
                               return matrix_to_rows(model.centers);
                             })
      .def_property_readonly("memberships",
                             [](const ClusterModel& model) {
                               return matrix_to_rows(model.memberships);
                             })
      .def_property_readonly("objective_trace",
                             [](const ClusterModel& model) { return model.objective_trace; })
      .def("hard_assignment", &ClusterModel::hard_assignment);

  m.def(
      "fcm_fit",
      [](const std::vector<std::vector<double>>& data, int c, const FcmConfig& config) {
        return fcm_fit(matrix_from_rows(data), c, config);
      },
      py::arg("data"), py::arg("c"), py::arg("config") = FcmConfig{});
  m.def("wcsd", [](const ClusterModel& model, const std::vector<std::vector<double>>& data) {
    return wcsd(model, matrix_from_rows(data));
  });
  m.def("fpc", &fpc);
  m.def("silhouette",
        [](const std::vector<std::vector<double>>& data, const std::vector<int>& labels) {
          const auto result = silhouette(matrix_from_rows(data), labels);
          return py::make_tuple(result.values, result.mean);
        });
  m.def(
      "select_c",
      [](const std::vector<std::vector<double>>& data, const std::vector<int>& candidates,
         const FcmConfig& config, int select_max_iters) {
        const auto selection = select_c(matrix_from_rows(data), candidates, config,
                                        select_max_iters);
        py::list table;
        for (const auto& row : selection.table) {
          py::dict entry;
          entry["c"] = row.c;
          entry["objective"] = row.objective;
          entry["wcsd"] = row.wcsd;
          entry["fpc"] = row.fpc;
          entry["mean_silhouette"] = row.mean_silhouette;
          table.append(entry);
        }
        return py::make_tuple(selection.best_c, table);
      },
      py::arg("data"), py::arg("candidates"), py::arg("config") = FcmConfig{},
      py::arg("select_max_iters") = 3000);

  m.def(
      "mds_project",
      [](const std::vector<std::vector<double>>& data, int dims) {
        return matrix_to_rows(mds_project(matrix_from_rows(data), dims));
      },
      py::arg("data"), py::arg("dims") = 2);

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_static("from_file", &PipelineConfig::from_file)
      .def("set", &PipelineConfig::set)
      .def_readwrite("seed", &PipelineConfig::seed)
      .def_readwrite("out_dir", &PipelineConfig::out_dir)
      .def_readwrite("devices_per_class", &PipelineConfig::devices_per_class)
      .def_readwrite("flows_per_class", &PipelineConfig::flows_per_class)
      .def_readwrite("window", &PipelineConfig::window)
      .def_readwrite("train_fraction", &PipelineConfig::train_fraction)
      .def_readwrite("c_min", &PipelineConfig::c_min)
      .def_readwrite("c_max", &PipelineConfig::c_max);

  m.def(
      "run_pipeline",
      [](const PipelineConfig& config) {
        const auto result = run_pipeline(config);
        py::dict out;
        out["out_dir"] = result.out_dir.string();
        out["selected_c"] = result.selected_c;
        out["kept_features"] = result.reduction.kept.size();
        if (result.evaluation.binary_metrics.binary_accuracy)
          out["binary_accuracy"] = *result.evaluation.binary_metrics.binary_accuracy;
        if (result.evaluation.binary_metrics.false_positive_rate)
          out["false_positive_rate"] =
              *result.evaluation.binary_metrics.false_positive_rate;
        out["median_latency_us"] = result.evaluation.latency.median_us;
        return out;
      },
      py::arg("config"));

  m.def(
      "classify_csv",
      [](const std::string& model_path, const std::string& input_csv,
         const std::string& output_csv) {
        const auto model = load_model(model_path);
        auto data = read_feature_csv(input_csv);
        if (data.feature_names != model.reduction.kept)
          data = apply_reduction(data, model.reduction);
        std::vector<PredictionRow> rows;
        for (const auto& fv : data.rows) {
          const auto inference = infer(fv.values, model.rules);
          const auto decision = classify_binary(inference);
          rows.push_back({fv.key, fv.label, inference.score, inference.predicted,
                          decision.label, decision.degree_of_maliciousness,
                          inference.class_confidence, 0.0});
        }
        write_predictions_csv(output_csv, rows);
        return rows.size();
      },
      py::arg("model"), py::arg("input_csv"), py::arg("output_csv"));

#ifdef IOTGUARD_VERSION
  m.attr("__version__") = IOTGUARD_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
