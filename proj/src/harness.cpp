#include "iotguard/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "iotguard/errors.hpp"
#include "iotguard/rng.hpp"

namespace iotguard {

using nlohmann::json;

long ConfusionMatrix::total() const {
  long sum = 0;
  for (const auto& row : counts)
    for (const long v : row) sum += v;
  return sum;
}

long ConfusionMatrix::row_sum(std::size_t i) const {
  return std::accumulate(counts[i].begin(), counts[i].end(), 0L);
}

long ConfusionMatrix::col_sum(std::size_t j) const {
  long sum = 0;
  for (const auto& row : counts) sum += row[j];
  return sum;
}

ConfusionMatrix confusion(const std::vector<int>& actual,
                          const std::vector<int>& predicted,
                          const std::vector<std::string>& classes) {
  if (actual.size() != predicted.size())
    throw DataError("actual/predicted length mismatch");
  ConfusionMatrix cm;
  cm.classes = classes;
  cm.counts.assign(classes.size(), std::vector<long>(classes.size(), 0));
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] < 0 || static_cast<std::size_t>(actual[i]) >= classes.size() ||
        predicted[i] < 0 || static_cast<std::size_t>(predicted[i]) >= classes.size())
      throw DataError("label index outside the class list");
    ++cm.counts[static_cast<std::size_t>(actual[i])][static_cast<std::size_t>(predicted[i])];
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  if (cm.classes.empty() || cm.total() == 0) throw DataError("empty confusion matrix");
  MetricsReport report;
  report.classes = cm.classes;
  const double total = static_cast<double>(cm.total());

  const auto ratio = [](double num, double den) -> std::optional<double> {
    if (den == 0.0) return std::nullopt;
    return num / den;
  };

  double acc_sum = 0, prec_sum = 0, spec_sum = 0, sens_sum = 0, f1_sum = 0;
  long acc_n = 0, prec_n = 0, spec_n = 0, sens_n = 0, f1_n = 0;
  for (std::size_t k = 0; k < cm.classes.size(); ++k) {
    const double tp = static_cast<double>(cm.counts[k][k]);
    const double fp = static_cast<double>(cm.col_sum(k)) - tp;
    const double fn = static_cast<double>(cm.row_sum(k)) - tp;
    const double tn = total - tp - fp - fn;
    ClassMetrics m;
    m.accuracy = ratio(tp + tn, total);
    m.precision = ratio(tp, tp + fp);
    m.sensitivity = ratio(tp, tp + fn);
    m.specificity = ratio(tn, tn + fp);
    m.f1 = ratio(2.0 * tp, 2.0 * tp + fp + fn);
    report.per_class.push_back(m);
    if (m.accuracy) { acc_sum += *m.accuracy; ++acc_n; }
    if (m.precision) { prec_sum += *m.precision; ++prec_n; }
    if (m.specificity) { spec_sum += *m.specificity; ++spec_n; }
    if (m.sensitivity) { sens_sum += *m.sensitivity; ++sens_n; }
    if (m.f1) { f1_sum += *m.f1; ++f1_n; }
  }
  if (acc_n) report.macro.accuracy = acc_sum / static_cast<double>(acc_n);
  if (prec_n) report.macro.precision = prec_sum / static_cast<double>(prec_n);
  if (spec_n) report.macro.specificity = spec_sum / static_cast<double>(spec_n);
  if (sens_n) report.macro.sensitivity = sens_sum / static_cast<double>(sens_n);
  if (f1_n) report.macro.f1 = f1_sum / static_cast<double>(f1_n);

  if (cm.classes.size() == 2) {
    // convention: index 0 benign (negative), index 1 malicious (positive)
    const double tn = static_cast<double>(cm.counts[0][0]);
    const double fp = static_cast<double>(cm.counts[0][1]);
    const double fn = static_cast<double>(cm.counts[1][0]);
    const double tp = static_cast<double>(cm.counts[1][1]);
    report.binary_accuracy = ratio(tp + tn, total);
    report.false_positive_rate = ratio(fp, fp + tn);
  }
  return report;
}

Matrix mds_project(const Matrix& data, int dims) {
  if (dims < 1) throw ParameterError("mds dims must be >= 1");
  const std::size_t n = data.rows();
  if (n < 3) throw ParameterError("mds needs at least 3 points");

  // double-centered squared-distance matrix: B = -1/2 * J D^2 J
  Matrix b(n, n);
  std::vector<double> row_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d2 = squared_euclidean(data.row(i), data.row(j));
      b(i, j) = d2;
      row_mean[i] += d2;
    }
    row_mean[i] /= static_cast<double>(n);
    grand += row_mean[i];
  }
  grand /= static_cast<double>(n);
  double magnitude = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      b(i, j) = -0.5 * (b(i, j) - row_mean[i] - row_mean[j] + grand);
      magnitude += std::abs(b(i, j));
    }
  }

  Matrix coords(n, static_cast<std::size_t>(dims));
  if (magnitude < 1e-24) {
    std::cerr << "warning: mds input is degenerate (all points identical); "
                 "returning a zero embedding\n";
    return coords;
  }

  // top eigenpairs by power iteration with deflation; B is PSD because the
  // distances are Euclidean
  std::vector<std::vector<double>> eigvecs;
  std::vector<double> eigvals;
  Rng rng(0x9e3779b97f4a7c15ULL);
  std::vector<double> v(n), next(n);
  for (int d = 0; d < dims; ++d) {
    for (auto& x : v) x = rng.uniform() - 0.5;
    double lambda = 0.0;
    for (int iter = 0; iter < 1000; ++iter) {
      // next = B v, with the previously found components deflated away
      for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += b(i, j) * v[j];
        next[i] = sum;
      }
      for (std::size_t e = 0; e < eigvecs.size(); ++e) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += eigvecs[e][j] * v[j];
        for (std::size_t j = 0; j < n; ++j) next[j] -= eigvals[e] * dot * eigvecs[e][j];
      }
      double norm = 0.0;
      for (const double x : next) norm += x * x;
      norm = std::sqrt(norm);
      if (norm == 0.0) break;
      for (std::size_t j = 0; j < n; ++j) next[j] /= norm;
      const double delta = [&] {
        double diff = 0.0;
        for (std::size_t j = 0; j < n; ++j) diff += (next[j] - v[j]) * (next[j] - v[j]);
        return diff;
      }();
      v = next;
      lambda = norm;
      if (iter > 2 && delta < 1e-30) break;
    }
    // Rayleigh quotient for the final eigenvalue estimate
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += b(i, j) * v[j];
      quad += v[i] * sum;
    }
    lambda = quad;
    eigvecs.push_back(v);
    eigvals.push_back(lambda);
    const double scale = std::sqrt(std::max(lambda, 0.0));
    for (std::size_t i = 0; i < n; ++i) coords(i, static_cast<std::size_t>(d)) = scale * v[i];
  }
  return coords;
}

Matrix feature_profile(const ClusterModel& model, const Matrix& data) {
  if (model.memberships.cols() != data.rows())
    throw ParameterError("model/data point count mismatch");
  const auto hard = model.hard_assignment();
  Matrix profile(static_cast<std::size_t>(model.c), data.cols());
  for (int i = 0; i < model.c; ++i) {
    const std::size_t ii = static_cast<std::size_t>(i);
    std::size_t members = 0;
    for (std::size_t j = 0; j < data.rows(); ++j) {
      if (hard[j] != i) continue;
      ++members;
      for (std::size_t k = 0; k < data.cols(); ++k) profile(ii, k) += data(j, k);
    }
    if (members > 0) {
      for (std::size_t k = 0; k < data.cols(); ++k)
        profile(ii, k) /= static_cast<double>(members);
    } else {
      // cluster without hard members: report its center
      for (std::size_t k = 0; k < data.cols(); ++k) profile(ii, k) = model.centers(ii, k);
    }
  }
  return profile;
}

SplitIndices stratified_split(const std::vector<FeatureVector>& rows,
                              double train_fraction, std::uint64_t seed) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw ParameterError("train_fraction must be in (0, 1)");
  std::array<std::vector<std::size_t>, kClassCount> by_class;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].label) throw DataError("stratified split needs labeled rows");
    by_class[static_cast<std::size_t>(class_code(*rows[r].label))].push_back(r);
  }
  SplitIndices split;
  for (int c = 0; c < kClassCount; ++c) {
    auto& indices = by_class[static_cast<std::size_t>(c)];
    if (indices.empty()) continue;
    Rng rng(Rng::derive(seed, 500 + static_cast<std::uint64_t>(c)));
    for (std::size_t i = indices.size() - 1; i > 0; --i)
      std::swap(indices[i], indices[rng.index(i + 1)]);
    std::size_t train_count = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(indices.size())));
    if (indices.size() >= 2)
      train_count = std::clamp<std::size_t>(train_count, 1, indices.size() - 1);
    else
      train_count = indices.size();
    for (std::size_t i = 0; i < indices.size(); ++i)
      (i < train_count ? split.train : split.test).push_back(indices[i]);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Evaluation evaluate_predictions(const std::vector<PredictionRow>& rows) {
  if (rows.empty()) throw DataError("no predictions to evaluate");
  std::vector<int> actual_bin, predicted_bin, actual_cls, predicted_cls;
  std::vector<double> latencies;
  actual_bin.reserve(rows.size());
  for (const auto& row : rows) {
    if (!row.actual) throw DataError("predictions lack actual labels; cannot evaluate");
    actual_bin.push_back(to_binary(*row.actual) == BinaryLabel::Benign ? 0 : 1);
    predicted_bin.push_back(row.binary == BinaryLabel::Benign ? 0 : 1);
    actual_cls.push_back(class_code(*row.actual));
    predicted_cls.push_back(class_code(row.predicted));
    latencies.push_back(row.latency_us);
  }
  Evaluation eval;
  eval.evaluated = rows.size();
  eval.binary_cm = confusion(actual_bin, predicted_bin,
                             {binary_name(BinaryLabel::Benign), binary_name(BinaryLabel::Malicious)});
  std::vector<std::string> class_names;
  for (const auto cls : all_classes()) class_names.push_back(class_name(cls));
  eval.multiclass_cm = confusion(actual_cls, predicted_cls, class_names);
  eval.binary_metrics = metrics(eval.binary_cm);
  eval.multiclass_metrics = metrics(eval.multiclass_cm);

  std::sort(latencies.begin(), latencies.end());
  const auto quantile = [&](double p) {
    const double h = p * static_cast<double>(latencies.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, latencies.size() - 1);
    return latencies[lo] + (h - std::floor(h)) * (latencies[hi] - latencies[lo]);
  };
  eval.latency.median_us = quantile(0.5);
  eval.latency.p95_us = quantile(0.95);
  eval.binary_metrics.latency = eval.latency;
  eval.multiclass_metrics.latency = eval.latency;
  return eval;
}

namespace {

json optional_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

json class_metrics_json(const ClassMetrics& m) {
  return json{{"accuracy", optional_json(m.accuracy)},
              {"precision", optional_json(m.precision)},
              {"specificity", optional_json(m.specificity)},
              {"sensitivity", optional_json(m.sensitivity)},
              {"f1", optional_json(m.f1)}};
}

}  // namespace

std::string metrics_json(const Evaluation& eval,
                         const std::map<std::string, long>& extra_counts) {
  json binary;
  binary["accuracy"] = optional_json(eval.binary_metrics.binary_accuracy);
  binary["false_positive_rate"] = optional_json(eval.binary_metrics.false_positive_rate);
  binary["malicious"] = class_metrics_json(eval.binary_metrics.per_class[1]);

  json per_class;
  double attack_f1_sum = 0.0;
  long attack_f1_n = 0;
  for (std::size_t k = 0; k < eval.multiclass_metrics.classes.size(); ++k) {
    per_class[eval.multiclass_metrics.classes[k]] =
        class_metrics_json(eval.multiclass_metrics.per_class[k]);
    if (k > 0 && eval.multiclass_metrics.per_class[k].f1) {
      attack_f1_sum += *eval.multiclass_metrics.per_class[k].f1;
      ++attack_f1_n;
    }
  }
  json multiclass;
  multiclass["per_class"] = per_class;
  multiclass["macro"] = class_metrics_json(eval.multiclass_metrics.macro);
  multiclass["attack_mean_f1"] =
      attack_f1_n == 6 ? json(attack_f1_sum / 6.0) : json(nullptr);

  json counts;
  counts["evaluated"] = static_cast<long>(eval.evaluated);
  for (const auto& [key, value] : extra_counts) counts[key] = value;

  json doc;
  doc["binary"] = binary;
  doc["multiclass"] = multiclass;
  doc["counts"] = counts;
  return doc.dump(2) + "\n";
}

void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& cm) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write confusion csv: " + path.string());
  out << "actual\\predicted";
  for (const auto& name : cm.classes) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < cm.classes.size(); ++i) {
    out << cm.classes[i];
    for (const long v : cm.counts[i]) out << ',' << v;
    out << '\n';
  }
}

PipelineConfig PipelineConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config: " + path.string());
  PipelineConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto begin = s.find_first_not_of(" \t\r");
      if (begin == std::string::npos) return std::string();
      const auto end = s.find_last_not_of(" \t\r");
      return s.substr(begin, end - begin + 1);
    };
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ParameterError(path.string() + ":" + std::to_string(line_no) +
                           ": expected key = value");
    config.set(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
  }
  return config;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  const auto as_int = [&] {
    try {
      return std::stoi(value);
    } catch (const std::exception&) {
      throw ParameterError("config key " + key + " needs an integer, got '" + value + "'");
    }
  };
  const auto as_double = [&] {
    try {
      return std::stod(value);
    } catch (const std::exception&) {
      throw ParameterError("config key " + key + " needs a number, got '" + value + "'");
    }
  };
  const auto as_u64 = [&] {
    try {
      return static_cast<std::uint64_t>(std::stoull(value));
    } catch (const std::exception&) {
      throw ParameterError("config key " + key + " needs an unsigned integer");
    }
  };

  if (key == "seed") seed = as_u64();
  else if (key == "out_dir") out_dir = value;
  else if (key == "devices_per_class") devices_per_class = as_int();
  else if (key == "flows_per_class") flows_per_class = as_int();
  else if (key == "window") window = static_cast<std::size_t>(as_int());
  else if (key == "train_fraction") train_fraction = as_double();
  else if (key == "variance_epsilon") reduce.variance_epsilon = as_double();
  else if (key == "pearson_threshold") reduce.pearson_threshold = as_double();
  else if (key == "deviation_min_support") reduce.deviation_min_support = as_double();
  else if (key == "ratio_benign") ratio_benign = as_int();
  else if (key == "ratio_malicious") ratio_malicious = as_int();
  else if (key == "smote_k") smote_k = as_int();
  else if (key == "fcm_m") fcm.m = as_double();
  else if (key == "fcm_tol") fcm.tol = as_double();
  else if (key == "fcm_max_iters") fcm.max_iters = as_int();
  else if (key == "fcm_restarts") fcm.restarts = as_int();
  else if (key == "select_max_iters") select_max_iters = as_int();
  else if (key == "c_min") c_min = as_int();
  else if (key == "c_max") c_max = as_int();
  else if (key == "rule_spread") rule_spread = as_double();
  else if (key == "port_range_lo") knobs.port_range_lo = as_int();
  else if (key == "port_range_hi") knobs.port_range_hi = as_int();
  else if (key == "scan_subset") knobs.scan_subset = as_int();
  else if (key == "botnet_fanout") knobs.botnet_fanout = as_int();
  else if (key == "auth_failure_rate") knobs.auth_failure_rate = as_double();
  else if (key == "worm_host_pool") knobs.worm_host_pool = as_int();
  else if (key == "normal_dst_pool") knobs.normal_dst_pool = as_int();
  else throw ParameterError("unknown config key: " + key);
}

namespace {

class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}

  template <typename F>
  auto run(const std::string& name, F&& f) {
    std::cout << "[run] " << name << "..." << std::flush;
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        finish(name, start);
      } else {
        auto result = f();
        finish(name, start);
        return result;
      }
    } catch (const ParameterError& e) {
      std::cout << " failed\n";
      throw ParameterError("stage '" + name + "' failed: " + e.what());
    } catch (const DataError& e) {
      std::cout << " failed\n";
      throw DataError("stage '" + name + "' failed: " + e.what());
    } catch (const InternalError& e) {
      std::cout << " failed\n";
      throw InternalError("stage '" + name + "' failed: " + e.what());
    } catch (const std::exception& e) {
      std::cout << " failed\n";
      throw InternalError("stage '" + name + "' failed: " + std::string(e.what()));
    }
  }

 private:
  void finish(const std::string& name, std::chrono::steady_clock::time_point start) {
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    sink_[name] = ms;
    std::cout << " done (" << static_cast<long>(ms) << " ms)\n";
  }

  std::map<std::string, double>& sink_;
};

Dataset subset_rows(const Dataset& data, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.feature_names = data.feature_names;
  out.rows.reserve(indices.size());
  for (const auto idx : indices) out.rows.push_back(data.rows[idx]);
  return out;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  if (config.c_min < 2 || config.c_max < config.c_min)
    throw ParameterError("cluster count range is invalid");

  std::filesystem::create_directories(config.out_dir);
  PipelineResult result;
  result.out_dir = config.out_dir;
  StageTimer timer(result.stage_ms);
  const auto artifact = [&](const char* name) { return config.out_dir / name; };

  // generate
  const int flows_per_device =
      std::max(1, config.flows_per_class / std::max(1, config.devices_per_class));
  FlowLog generated = timer.run("generate", [&] {
    auto mix = default_mix(config.devices_per_class, flows_per_device, config.seed,
                           config.knobs);
    auto log = generate_mixed(mix, Rng::derive(config.seed, 10));
    write_flow_log(artifact("flowlog.jsonl").string(), log);
    return log;
  });

  // ingest (round-trips the file we just wrote)
  ParseResult parsed = timer.run("ingest", [&] {
    auto res = parse_flow_log(artifact("flowlog.jsonl").string(), /*strict=*/true);
    if (res.log.records.size() != generated.records.size())
      throw InternalError("ingest record count does not match generated count");
    return res;
  });

  // extract
  Dataset features = timer.run("extract", [&] {
    auto data = extract_all(parsed.log, config.window);
    write_feature_csv(artifact("features.csv"), data);
    return data;
  });

  // split
  SplitIndices split = timer.run("split", [&] {
    return stratified_split(features.rows, config.train_fraction,
                            Rng::derive(config.seed, 20));
  });

  // reduce
  Dataset train_raw = subset_rows(features, split.train);
  Dataset test_raw = subset_rows(features, split.test);
  Dataset train_reduced, test_reduced;
  timer.run("reduce", [&] {
    result.reduction = fit_reduction(train_raw, config.reduce);
    save_reduction_report(artifact("report.json"), result.reduction);
    train_reduced = apply_reduction(train_raw, result.reduction);
    test_reduced = apply_reduction(test_raw, result.reduction);
    write_feature_csv(artifact("reduced_train.csv"), train_reduced);
    write_feature_csv(artifact("reduced_test.csv"), test_reduced);
  });

  // balance
  Dataset balanced = timer.run("balance", [&] {
    BalanceConfig bc;
    bc.benign_parts = config.ratio_benign;
    bc.malicious_parts = config.ratio_malicious;
    bc.k_neighbors = config.smote_k;
    bc.seed = Rng::derive(config.seed, 30);
    auto out = rebalance(train_reduced, bc);
    write_feature_csv(artifact("balanced.csv"), out);
    return out;
  });

  // train
  ModelBundle model;
  model.reduction = result.reduction;
  const Matrix train_matrix = dataset_matrix(balanced);
  timer.run("train", [&] {
    std::vector<int> candidates;
    const int c_hi = std::min<int>(config.c_max,
                                   static_cast<int>(train_matrix.rows()) - 1);
    for (int c = config.c_min; c <= c_hi; ++c) candidates.push_back(c);
    FcmConfig fcm_config = config.fcm;
    fcm_config.seed = Rng::derive(config.seed, 40);
    auto selection = select_c(train_matrix, candidates, fcm_config,
                              config.select_max_iters);
    result.selected_c = selection.best_c;
    model.clusters = std::move(selection.best_model);

    std::vector<TrafficClass> labels;
    labels.reserve(balanced.rows.size());
    for (const auto& row : balanced.rows) labels.push_back(*row.label);
    label_clusters(model.clusters, labels);
    model.clusters.quality.wcsd = wcsd(model.clusters, train_matrix);
    model.clusters.quality.fpc = fpc(model.clusters);
    model.clusters.quality.mean_silhouette =
        silhouette(train_matrix, model.clusters.hard_assignment()).mean;
    model.rules = rules_from_clusters(model.clusters, train_matrix,
                                      balanced.feature_names, config.rule_spread);
    save_model(artifact("model.json"), model);
  });

  // predict
  std::vector<PredictionRow> predictions = timer.run("predict", [&] {
    std::vector<PredictionRow> rows;
    rows.reserve(test_reduced.rows.size());
    for (const auto& fv : test_reduced.rows) {
      const auto start = std::chrono::steady_clock::now();
      const auto inference = infer(fv.values, model.rules);
      const auto decision = classify_binary(inference);
      const double us = std::chrono::duration<double, std::micro>(
                            std::chrono::steady_clock::now() - start)
                            .count();
      PredictionRow row;
      row.key = fv.key;
      row.actual = fv.label;
      row.o_star = inference.score;
      row.predicted = inference.predicted;
      row.binary = decision.label;
      row.degree_of_maliciousness = decision.degree_of_maliciousness;
      row.class_confidence = inference.class_confidence;
      row.latency_us = us;
      rows.push_back(std::move(row));
    }
    write_predictions_csv(artifact("predictions.csv"), rows);
    return rows;
  });

  // evaluate
  timer.run("evaluate", [&] {
    result.evaluation = evaluate_predictions(predictions);
    std::map<std::string, long> extra;
    extra["kept_features"] = static_cast<long>(result.reduction.kept.size());
    extra["selected_c"] = result.selected_c;
    std::ofstream metrics_out(artifact("metrics.json"));
    if (!metrics_out) throw DataError("cannot write metrics.json");
    metrics_out << metrics_json(result.evaluation, extra);
    write_confusion_csv(artifact("confusion_binary.csv"), result.evaluation.binary_cm);
    write_confusion_csv(artifact("confusion_multiclass.csv"),
                        result.evaluation.multiclass_cm);
  });

  // plot-ready artifacts
  timer.run("artifacts", [&] {
    const Matrix embedding = mds_project(train_matrix, 2);
    const auto hard = model.clusters.hard_assignment();
    {
      std::ofstream out(artifact("mds.csv"));
      if (!out) throw DataError("cannot write mds.csv");
      out << "x,y,label,cluster\n";
      for (std::size_t i = 0; i < embedding.rows(); ++i) {
        out << embedding(i, 0) << ',' << embedding(i, 1) << ','
            << class_name(*balanced.rows[i].label) << ',' << hard[i] << '\n';
      }
    }
    {
      const Matrix profile = feature_profile(model.clusters, train_matrix);
      std::ofstream out(artifact("feature_profile.csv"));
      if (!out) throw DataError("cannot write feature_profile.csv");
      out << "cluster,label";
      for (const auto& name : balanced.feature_names) out << ',' << name;
      out << '\n';
      for (std::size_t i = 0; i < profile.rows(); ++i) {
        out << i << ',' << class_name(model.clusters.labels[i]);
        for (std::size_t k = 0; k < profile.cols(); ++k) out << ',' << profile(i, k);
        out << '\n';
      }
    }
  });

  // manifest: seeds, versions, timings, latency; everything run-dependent
  {
    json manifest;
    manifest["version"] = "0.1.0";
    manifest["seed"] = config.seed;
    manifest["window"] = config.window;
    manifest["devices_per_class"] = config.devices_per_class;
    manifest["flows_per_class"] = config.flows_per_class;
    manifest["train_fraction"] = config.train_fraction;
    manifest["selected_c"] = result.selected_c;
    manifest["kept_features"] = result.reduction.kept.size();
    manifest["counts"] = json{{"records", generated.records.size()},
                              {"train_rows", split.train.size()},
                              {"test_rows", split.test.size()},
                              {"balanced_rows", balanced.rows.size()}};
    manifest["latency_us"] = json{{"median", result.evaluation.latency.median_us},
                                  {"p95", result.evaluation.latency.p95_us}};
    json timings;
    for (const auto& [stage, ms] : result.stage_ms) timings[stage] = ms;
    manifest["stage_ms"] = timings;
    std::ofstream out(artifact("manifest.json"));
    if (!out) throw DataError("cannot write manifest.json");
    out << manifest.dump(2) << '\n';
  }

  return result;
}

}  // namespace iotguard
