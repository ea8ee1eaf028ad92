#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "iotguard/fcm.hpp"
#include "iotguard/matrix.hpp"
#include "iotguard/types.hpp"

namespace iotguard {

/// Triangular fuzzy set with left foot a, apex b, right foot c (a <= b <= c).
struct TriangularSet {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  bool operator==(const TriangularSet&) const = default;
};

/// Centroid-style defuzzification for triangles: (a + 2b + c) / 4.
double defuzzify(const TriangularSet& t);

struct FuzzyRule {
  std::vector<TriangularSet> antecedents;  // one per kept feature
  TriangularSet consequent;
  TrafficClass cls = TrafficClass::Normal;
  std::vector<double> defuzzified_antecedent;  // r_i, cached
};

/// One rule per cluster; the serialized prediction model.
struct FuzzyRuleBase {
  std::vector<FuzzyRule> rules;
  std::vector<std::string> feature_names;
  double spread = 3.0;
};

/// Builds the rule base from a labeled cluster model. Antecedent apexes sit
/// at the cluster center; feet extend by `spread` membership-weighted
/// standard deviations, clipped to [0, 1]. The consequent is the unit-width
/// triangle centered on the cluster's class code.
FuzzyRuleBase rules_from_clusters(const ClusterModel& model, const Matrix& data,
                                  const std::vector<std::string>& feature_names,
                                  double spread = 3.0);

/// Interpolation weights: W_i proportional to 1 / ||r* - r_i||^2,
/// normalized to sum to 1. An observation coinciding with rule centers
/// splits all weight equally among those rules.
std::vector<double> rule_weights(std::span<const double> observation,
                                 const FuzzyRuleBase& base);

struct Inference {
  double score = 0.0;  // O*, the weighted defuzzified consequent
  TrafficClass predicted = TrafficClass::Normal;
  std::array<double, kClassCount> class_confidence{};  // summed rule weights
};

/// Weighted-consequent inference. The predicted class is the class code
/// nearest to O* (ties: lower code); per-class confidence sums the weights
/// of that class's rules.
Inference infer(std::span<const double> observation, const FuzzyRuleBase& base);

struct BinaryDecision {
  BinaryLabel label = BinaryLabel::Benign;
  double degree_of_maliciousness = 0.0;  // summed weight of attack rules
};

/// Benign iff the summed confidence of Normal rules exceeds 0.5.
BinaryDecision classify_binary(const Inference& inference);
BinaryDecision classify_binary(std::span<const double> observation,
                               const FuzzyRuleBase& base);

}  // namespace iotguard
