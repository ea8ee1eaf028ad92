#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iotguard/balance.hpp"
#include "iotguard/fcm.hpp"
#include "iotguard/fis.hpp"
#include "iotguard/io.hpp"
#include "iotguard/matrix.hpp"
#include "iotguard/reduce.hpp"
#include "iotguard/scenario.hpp"
#include "iotguard/types.hpp"

namespace iotguard {

/// Square confusion matrix; rows are actual classes, columns predicted.
struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<long>> counts;

  long total() const;
  long row_sum(std::size_t i) const;
  long col_sum(std::size_t j) const;
};

/// Builds the matrix over `classes` from parallel index sequences
/// (values index into `classes`). Length mismatch is a DataError.
ConfusionMatrix confusion(const std::vector<int>& actual,
                          const std::vector<int>& predicted,
                          const std::vector<std::string>& classes);

/// One-vs-rest metrics; a missing value means the denominator was zero and
/// the metric is undefined (reported as such, never as 0).
struct ClassMetrics {
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> specificity;
  std::optional<double> sensitivity;
  std::optional<double> f1;
};

struct LatencyStats {
  double median_us = 0.0;
  double p95_us = 0.0;
};

struct MetricsReport {
  std::vector<std::string> classes;
  std::vector<ClassMetrics> per_class;
  ClassMetrics macro;  // mean over classes where defined
  // Binary summary, present when the matrix is 2x2 (benign, malicious).
  std::optional<double> binary_accuracy;
  std::optional<double> false_positive_rate;
  std::optional<LatencyStats> latency;  // reported via manifest, not metrics.json
};

MetricsReport metrics(const ConfusionMatrix& cm);

/// Classical (Torgerson) MDS: double-centered squared-distance matrix, top
/// `dims` eigenpairs by power iteration with deflation. All-identical inputs
/// yield the all-zero embedding with a warning on stderr.
Matrix mds_project(const Matrix& data, int dims = 2);

/// Per-cluster mean of every kept feature over the cluster's hard members
/// (rows: clusters, in cluster order).
Matrix feature_profile(const ClusterModel& model, const Matrix& data);

/// Stratified train/test split: per class, a seeded shuffle, then the first
/// floor(train_fraction * k) indices train. Returned vectors index `rows`.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
SplitIndices stratified_split(const std::vector<FeatureVector>& rows,
                              double train_fraction, std::uint64_t seed);

/// Every knob of the pipeline in one place; parsed from a plain key = value
/// config file (see PipelineConfig::from_file and README).
struct PipelineConfig {
  std::uint64_t seed = 7;
  std::filesystem::path out_dir = "runs/out";
  // scenario generation
  int devices_per_class = 2;
  int flows_per_class = 1000;
  ScenarioKnobs knobs;
  // feature extraction
  std::size_t window = 100;
  // split
  double train_fraction = 0.8;
  // reduction
  ReduceParams reduce;
  // balancing
  int ratio_benign = 7;
  int ratio_malicious = 3;
  int smote_k = 5;
  // clustering
  FcmConfig fcm;
  int select_max_iters = 3000;
  int c_min = 2;
  int c_max = 12;
  // rule base
  double rule_spread = 3.0;

  static PipelineConfig from_file(const std::filesystem::path& path);
  /// Applies one key = value assignment; unknown keys are a ParameterError.
  void set(const std::string& key, const std::string& value);
};

/// Metrics and confusion matrices derived from a prediction set. Rows must
/// carry actual labels.
struct Evaluation {
  ConfusionMatrix binary_cm;
  ConfusionMatrix multiclass_cm;
  MetricsReport binary_metrics;
  MetricsReport multiclass_metrics;
  LatencyStats latency;
  std::size_t evaluated = 0;
};

Evaluation evaluate_predictions(const std::vector<PredictionRow>& rows);

/// Deterministic metrics document (latency is deliberately excluded; it goes
/// to the run manifest). `extra_counts` lets callers add context such as the
/// kept-feature count.
std::string metrics_json(const Evaluation& eval,
                         const std::map<std::string, long>& extra_counts = {});

void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& cm);

struct PipelineResult {
  std::filesystem::path out_dir;
  ReductionReport reduction;
  int selected_c = 0;
  Evaluation evaluation;
  std::map<std::string, double> stage_ms;
};

/// Runs generate -> ingest -> extract -> split -> reduce -> balance ->
/// train -> predict -> evaluate and writes every artifact (flow log,
/// feature/reduced/balanced CSVs, model.json, predictions.csv,
/// metrics.json, confusion CSVs, mds.csv, feature_profile.csv,
/// manifest.json) under config.out_dir. A stage failure is rethrown with
/// the stage name prefixed.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace iotguard
