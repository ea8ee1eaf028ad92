#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "iotguard/fcm.hpp"
#include "iotguard/fis.hpp"
#include "iotguard/reduce.hpp"
#include "iotguard/types.hpp"

namespace iotguard {

/// Feature CSV: key columns (src_ip, dst_ip, timestamp), one column per
/// feature, and a trailing optional label column. Reals are written with 17
/// significant digits so round-trips are exact.
void write_feature_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_feature_csv(const std::filesystem::path& path);

/// The serialized prediction model: reduction report + cluster model +
/// fuzzy rule base, one JSON document.
struct ModelBundle {
  ReductionReport reduction;
  ClusterModel clusters;
  FuzzyRuleBase rules;
};

void save_model(const std::filesystem::path& path, const ModelBundle& model);
ModelBundle load_model(const std::filesystem::path& path);

std::string reduction_report_json(const ReductionReport& report);
void save_reduction_report(const std::filesystem::path& path, const ReductionReport& report);
ReductionReport parse_reduction_report_json(const std::string& text);

/// One prediction row as written to predictions.csv.
struct PredictionRow {
  FlowKey key;
  std::optional<TrafficClass> actual;  // copied from input when labeled
  double o_star = 0.0;
  TrafficClass predicted = TrafficClass::Normal;
  BinaryLabel binary = BinaryLabel::Benign;
  double degree_of_maliciousness = 0.0;
  std::array<double, kClassCount> class_confidence{};
  double latency_us = 0.0;
};

void write_predictions_csv(const std::filesystem::path& path,
                           const std::vector<PredictionRow>& rows);
std::vector<PredictionRow> read_predictions_csv(const std::filesystem::path& path);

}  // namespace iotguard
