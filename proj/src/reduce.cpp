#include "iotguard/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "iotguard/errors.hpp"

namespace iotguard {

std::string DroppedFeature::reason_string() const {
  switch (reason) {
    case DropReason::LowVariance:
      return "low_variance";
    case DropReason::Correlated:
      return "correlated_with:" + correlated_with;
    case DropReason::OverlappingDeviation:
      return "overlapping_deviation";
  }
  throw InternalError("unhandled drop reason");
}

std::vector<double> column_variances(const Matrix& m) {
  if (m.rows() < 2) throw DataError("variance needs at least 2 samples");
  std::vector<double> means(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) means[c] += m(r, c);
  for (auto& v : means) v /= static_cast<double>(m.rows());
  std::vector<double> variances(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double d = m(r, c) - means[c];
      variances[c] += d * d;
    }
  }
  for (auto& v : variances) v /= static_cast<double>(m.rows() - 1);
  return variances;
}

std::vector<std::string> variance_filter(const Matrix& m,
                                         const std::vector<std::string>& names,
                                         double epsilon) {
  if (m.rows() == 0 || m.cols() == 0) throw DataError("empty feature matrix");
  if (m.cols() != names.size()) throw ParameterError("names/column count mismatch");
  const auto variances = column_variances(m);
  std::vector<std::string> dropped;
  for (std::size_t c = 0; c < m.cols(); ++c)
    if (variances[c] < epsilon) dropped.push_back(names[c]);
  return dropped;
}

double pearson_r(const Matrix& m, std::size_t col_a, std::size_t col_b) {
  const double n = static_cast<double>(m.rows());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    mean_a += m(r, col_a);
    mean_b += m(r, col_b);
  }
  mean_a /= n;
  mean_b /= n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double da = m(r, col_a) - mean_a;
    const double db = m(r, col_b) - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0)
    throw InternalError("zero-variance column reached Pearson pruning; run the variance filter first");
  return cov / std::sqrt(var_a * var_b);
}

std::vector<DroppedFeature> pearson_prune(const Matrix& m,
                                          const std::vector<std::string>& names,
                                          double threshold) {
  if (threshold <= 0.0 || threshold > 1.0)
    throw ParameterError("pearson threshold must be in (0, 1]");
  if (m.cols() != names.size()) throw ParameterError("names/column count mismatch");
  std::vector<bool> dropped(m.cols(), false);
  std::vector<DroppedFeature> out;
  for (std::size_t i = 0; i < m.cols(); ++i) {
    if (dropped[i]) continue;
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      if (dropped[j]) continue;
      if (std::abs(pearson_r(m, i, j)) >= threshold) {
        dropped[j] = true;
        out.push_back({names[j], DropReason::Correlated, names[i]});
      }
    }
  }
  return out;
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DataError("quantile of empty sample");
  if (sorted.size() == 1) return sorted.front();
  const double h = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - std::floor(h);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

struct ValueRange {
  // continuous: [lo, hi]; discrete: explicit value set
  bool discrete = false;
  double lo = 0.0;
  double hi = 0.0;
  std::set<double> values;
};

bool ranges_overlap(const ValueRange& a, const ValueRange& b) {
  if (a.discrete) {
    for (const double v : a.values)
      if (b.values.count(v) > 0) return true;
    return false;
  }
  return a.lo <= b.hi && b.lo <= a.hi;
}

}  // namespace

std::vector<std::string> deviation_prune(const Matrix& m,
                                         const std::vector<std::string>& names,
                                         const std::vector<FeatureKind>& kinds,
                                         const std::vector<TrafficClass>& labels,
                                         double min_support) {
  if (m.cols() != names.size() || names.size() != kinds.size())
    throw ParameterError("names/kinds/column count mismatch");
  if (labels.size() != m.rows()) throw ParameterError("labels/row count mismatch");

  std::map<TrafficClass, std::vector<std::size_t>> by_class;
  for (std::size_t r = 0; r < labels.size(); ++r) by_class[labels[r]].push_back(r);
  for (const auto cls : all_classes()) {
    if (by_class.find(cls) == by_class.end())
      throw DataError("deviation method needs samples of every class; missing " +
                      class_name(cls));
  }

  std::vector<std::string> dropped;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    std::vector<ValueRange> ranges;
    ranges.reserve(kClassCount);
    for (const auto& [cls, rows] : by_class) {
      ValueRange range;
      if (kinds[c] == FeatureKind::Discrete) {
        range.discrete = true;
        std::map<double, std::size_t> freq;
        for (const auto r : rows) ++freq[m(r, c)];
        for (const auto& [value, count] : freq) {
          if (static_cast<double>(count) >= min_support * static_cast<double>(rows.size()))
            range.values.insert(value);
        }
        // nothing frequent: fall back to the full observed set so the class
        // still participates in the overlap check
        if (range.values.empty())
          for (const auto& [value, count] : freq) range.values.insert(value);
      } else {
        std::vector<double> sample;
        sample.reserve(rows.size());
        for (const auto r : rows) sample.push_back(m(r, c));
        std::sort(sample.begin(), sample.end());
        range.lo = quantile_sorted(sample, 0.10);
        range.hi = quantile_sorted(sample, 0.90);
      }
      ranges.push_back(std::move(range));
    }
    bool all_pairs_overlap = true;
    for (std::size_t a = 0; a < ranges.size() && all_pairs_overlap; ++a)
      for (std::size_t b = a + 1; b < ranges.size(); ++b)
        if (!ranges_overlap(ranges[a], ranges[b])) {
          all_pairs_overlap = false;
          break;
        }
    if (all_pairs_overlap) dropped.push_back(names[c]);
  }
  return dropped;
}

std::vector<ScalerRange> fit_normalizer(const Matrix& m) {
  if (m.rows() == 0) throw DataError("cannot fit normalizer on empty matrix");
  std::vector<ScalerRange> scalers(m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double lo = m(0, c), hi = m(0, c);
    for (std::size_t r = 1; r < m.rows(); ++r) {
      lo = std::min(lo, m(r, c));
      hi = std::max(hi, m(r, c));
    }
    if (lo == hi)
      throw InternalError("constant column reached the normalizer; run the variance filter first");
    scalers[c] = {lo, hi};
  }
  return scalers;
}

double apply_scaler(double v, const ScalerRange& s) {
  const double scaled = (v - s.min) / (s.max - s.min);
  return std::clamp(scaled, 0.0, 1.0);
}

Matrix dataset_matrix(const Dataset& data) {
  Matrix m(data.rows.size(), data.feature_names.size());
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    if (data.rows[r].values.size() != data.feature_names.size())
      throw DataError("row width does not match feature names");
    for (std::size_t c = 0; c < data.feature_names.size(); ++c)
      m(r, c) = data.rows[r].values[c];
  }
  return m;
}

ReductionReport fit_reduction(const Dataset& train, const ReduceParams& params) {
  if (train.rows.empty()) throw DataError("cannot fit reduction on an empty dataset");
  const Matrix full = dataset_matrix(train);
  const auto& names = train.feature_names;

  ReductionReport report;
  std::vector<bool> alive(names.size(), true);
  const auto kill = [&](const std::string& name, DroppedFeature df) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) alive[i] = false;
    report.dropped.push_back(std::move(df));
  };

  for (const auto& name : variance_filter(full, names, params.variance_epsilon))
    kill(name, {name, DropReason::LowVariance, {}});

  const auto surviving = [&] {
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < names.size(); ++i)
      if (alive[i]) cols.push_back(i);
    return cols;
  };

  {
    const auto cols = surviving();
    Matrix sub(full.rows(), cols.size());
    std::vector<std::string> sub_names;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      sub_names.push_back(names[cols[j]]);
      for (std::size_t r = 0; r < full.rows(); ++r) sub(r, j) = full(r, cols[j]);
    }
    for (auto& df : pearson_prune(sub, sub_names, params.pearson_threshold))
      kill(df.name, df);
  }

  const bool fully_labeled =
      std::all_of(train.rows.begin(), train.rows.end(),
                  [](const FeatureVector& row) { return row.label.has_value(); });
  if (params.run_deviation && fully_labeled) {
    const auto cols = surviving();
    Matrix sub(full.rows(), cols.size());
    std::vector<std::string> sub_names;
    std::vector<FeatureKind> sub_kinds;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      sub_names.push_back(names[cols[j]]);
      sub_kinds.push_back(feature_kind(names[cols[j]]));
      for (std::size_t r = 0; r < full.rows(); ++r) sub(r, j) = full(r, cols[j]);
    }
    std::vector<TrafficClass> labels;
    labels.reserve(train.rows.size());
    for (const auto& row : train.rows) labels.push_back(*row.label);
    for (const auto& name :
         deviation_prune(sub, sub_names, sub_kinds, labels, params.deviation_min_support))
      kill(name, {name, DropReason::OverlappingDeviation, {}});
  }

  const auto cols = surviving();
  if (cols.empty()) throw DataError("reduction dropped every feature");
  Matrix kept_matrix(full.rows(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    report.kept.push_back(names[cols[j]]);
    for (std::size_t r = 0; r < full.rows(); ++r) kept_matrix(r, j) = full(r, cols[j]);
  }
  report.scalers = fit_normalizer(kept_matrix);
  return report;
}

std::vector<double> reduce_row(const FeatureVector& row,
                               const std::vector<std::string>& row_names,
                               const ReductionReport& report) {
  std::vector<double> out(report.kept.size());
  for (std::size_t k = 0; k < report.kept.size(); ++k) {
    const auto it = std::find(row_names.begin(), row_names.end(), report.kept[k]);
    if (it == row_names.end())
      throw DataError("input row is missing feature " + report.kept[k]);
    const auto idx = static_cast<std::size_t>(it - row_names.begin());
    out[k] = apply_scaler(row.values[idx], report.scalers[k]);
  }
  return out;
}

Dataset apply_reduction(const Dataset& data, const ReductionReport& report) {
  // resolve kept-name -> source column once
  std::vector<std::size_t> source_col(report.kept.size());
  for (std::size_t k = 0; k < report.kept.size(); ++k) {
    const auto it =
        std::find(data.feature_names.begin(), data.feature_names.end(), report.kept[k]);
    if (it == data.feature_names.end())
      throw DataError("input data is missing feature " + report.kept[k]);
    source_col[k] = static_cast<std::size_t>(it - data.feature_names.begin());
  }
  Dataset out;
  out.feature_names = report.kept;
  out.rows.reserve(data.rows.size());
  for (const auto& row : data.rows) {
    FeatureVector fv;
    fv.key = row.key;
    fv.label = row.label;
    fv.values.resize(report.kept.size());
    for (std::size_t k = 0; k < report.kept.size(); ++k)
      fv.values[k] = apply_scaler(row.values[source_col[k]], report.scalers[k]);
    out.rows.push_back(std::move(fv));
  }
  return out;
}

}  // namespace iotguard
