#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "iotguard/features.hpp"
#include "iotguard/matrix.hpp"
#include "iotguard/types.hpp"

namespace iotguard {

struct ScalerRange {
  double min = 0.0;
  double max = 0.0;
};

enum class DropReason { LowVariance, Correlated, OverlappingDeviation };

struct DroppedFeature {
  std::string name;
  DropReason reason = DropReason::LowVariance;
  std::string correlated_with;  // set only for Correlated

  // "low_variance", "correlated_with:<name>", "overlapping_deviation"
  std::string reason_string() const;
};

/// Outcome of fitting the reduction pipeline on training data: surviving
/// feature names in schema order, dropped features with reasons, and the
/// frozen min-max scaler per kept feature.
struct ReductionReport {
  std::vector<std::string> kept;
  std::vector<DroppedFeature> dropped;
  std::vector<ScalerRange> scalers;  // parallel to kept
};

struct ReduceParams {
  double variance_epsilon = 1e-6;
  double pearson_threshold = 0.99;
  double deviation_min_support = 0.2;
  bool run_deviation = true;  // requires labels covering all 7 classes
};

/// Unbiased (n-1) sample variance of each column, two-pass.
std::vector<double> column_variances(const Matrix& m);

/// Names of columns whose sample variance is below epsilon. Needs >= 2 rows.
std::vector<std::string> variance_filter(const Matrix& m,
                                         const std::vector<std::string>& names,
                                         double epsilon);

/// Pearson |R| pruning on the post-variance matrix (raw values). For every
/// pair with |R| >= threshold the feature later in schema order is dropped;
/// the greedy scan over ordered pairs makes the result deterministic.
/// A zero-variance column here is an InternalError: variance_filter must
/// have run first.
std::vector<DroppedFeature> pearson_prune(const Matrix& m,
                                          const std::vector<std::string>& names,
                                          double threshold);

double pearson_r(const Matrix& m, std::size_t col_a, std::size_t col_b);

/// Deviation method. Per class and feature the "frequent-value range" is the
/// [q10, q90] interquantile interval for continuous features and the set of
/// values with empirical frequency >= min_support for discrete ones. A
/// feature is dropped when the ranges of every pair of classes overlap.
/// All 7 classes must appear in `labels`.
std::vector<std::string> deviation_prune(const Matrix& m,
                                         const std::vector<std::string>& names,
                                         const std::vector<FeatureKind>& kinds,
                                         const std::vector<TrafficClass>& labels,
                                         double min_support);

/// Linear-interpolation quantile (type 7) of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double p);

/// Per-column (min, max). A column with max == min should have been removed
/// by the variance filter and raises InternalError.
std::vector<ScalerRange> fit_normalizer(const Matrix& m);

/// Affine map min->0, max->1, clamped to [0, 1] for out-of-range values.
double apply_scaler(double v, const ScalerRange& s);

/// Fits the full pipeline in the fixed order variance -> Pearson ->
/// deviation -> normalizer on training data. Deviation runs only when
/// params.run_deviation is set and every row is labeled.
ReductionReport fit_reduction(const Dataset& train, const ReduceParams& params);

/// Projects a raw feature row onto the kept features and normalizes it.
std::vector<double> reduce_row(const FeatureVector& row,
                               const std::vector<std::string>& row_names,
                               const ReductionReport& report);

Dataset apply_reduction(const Dataset& data, const ReductionReport& report);

Matrix dataset_matrix(const Dataset& data);

}  // namespace iotguard
