#include "iotguard/fis.hpp"

#include <algorithm>
#include <cmath>

#include "iotguard/errors.hpp"

namespace iotguard {

double defuzzify(const TriangularSet& t) { return (t.a + 2.0 * t.b + t.c) / 4.0; }

FuzzyRuleBase rules_from_clusters(const ClusterModel& model, const Matrix& data,
                                  const std::vector<std::string>& feature_names,
                                  double spread) {
  if (model.labels.size() != static_cast<std::size_t>(model.c))
    throw ParameterError("cluster model must be labeled before rule generation");
  if (feature_names.size() != model.centers.cols())
    throw ParameterError("feature name count does not match cluster dimensionality");
  if (model.memberships.cols() != data.rows())
    throw ParameterError("model/data point count mismatch");
  if (spread < 0.0) throw ParameterError("spread multiplier must be >= 0");

  const std::size_t h = model.centers.cols();
  FuzzyRuleBase base;
  base.feature_names = feature_names;
  base.spread = spread;
  base.rules.reserve(static_cast<std::size_t>(model.c));

  for (int i = 0; i < model.c; ++i) {
    const std::size_t ii = static_cast<std::size_t>(i);
    double weight_total = 0.0;
    for (std::size_t j = 0; j < data.rows(); ++j) weight_total += model.memberships(ii, j);
    if (weight_total <= 0.0)
      throw InternalError("cluster with zero total membership weight");

    FuzzyRule rule;
    rule.cls = model.labels[ii];
    rule.antecedents.resize(h);
    rule.defuzzified_antecedent.resize(h);
    for (std::size_t k = 0; k < h; ++k) {
      const double center = model.centers(ii, k);
      double wvar = 0.0;
      for (std::size_t j = 0; j < data.rows(); ++j) {
        const double d = data(j, k) - center;
        wvar += model.memberships(ii, j) * d * d;
      }
      const double sigma = std::sqrt(wvar / weight_total);
      TriangularSet& t = rule.antecedents[k];
      t.b = center;
      t.a = std::max(0.0, center - sigma * spread);
      t.c = std::min(1.0, center + sigma * spread);
      rule.defuzzified_antecedent[k] = defuzzify(t);
    }
    const double code = static_cast<double>(class_code(rule.cls));
    rule.consequent = {code - 0.5, code, code + 0.5};
    base.rules.push_back(std::move(rule));
  }
  return base;
}

std::vector<double> rule_weights(std::span<const double> observation,
                                 const FuzzyRuleBase& base) {
  if (base.rules.empty()) throw DataError("empty rule base");
  const std::size_t q = base.rules.size();
  std::vector<double> weights(q, 0.0);
  std::vector<double> dist2(q);
  std::size_t coincident = 0;
  for (std::size_t i = 0; i < q; ++i) {
    if (observation.size() != base.rules[i].defuzzified_antecedent.size())
      throw ParameterError("observation has wrong dimensionality");
    dist2[i] = squared_euclidean(observation, base.rules[i].defuzzified_antecedent);
    if (dist2[i] == 0.0) ++coincident;
  }
  if (coincident > 0) {
    // Eq. 5 is singular on a rule point; split the weight over the
    // coinciding rules
    const double share = 1.0 / static_cast<double>(coincident);
    for (std::size_t i = 0; i < q; ++i) weights[i] = dist2[i] == 0.0 ? share : 0.0;
    return weights;
  }
  double inv_sum = 0.0;
  for (std::size_t i = 0; i < q; ++i) inv_sum += 1.0 / dist2[i];
  for (std::size_t i = 0; i < q; ++i) weights[i] = (1.0 / dist2[i]) / inv_sum;
  return weights;
}

Inference infer(std::span<const double> observation, const FuzzyRuleBase& base) {
  const auto weights = rule_weights(observation, base);
  Inference result;
  for (std::size_t i = 0; i < base.rules.size(); ++i) {
    result.score += weights[i] * defuzzify(base.rules[i].consequent);
    result.class_confidence[static_cast<std::size_t>(class_code(base.rules[i].cls))] +=
        weights[i];
  }
  // nearest class code; ties go to the lower code
  int best = 0;
  double best_dist = std::abs(result.score - 0.0);
  for (int code = 1; code < kClassCount; ++code) {
    const double d = std::abs(result.score - static_cast<double>(code));
    if (d < best_dist) {
      best_dist = d;
      best = code;
    }
  }
  result.predicted = class_from_code(best);
  return result;
}

BinaryDecision classify_binary(const Inference& inference) {
  BinaryDecision decision;
  const double benign_confidence = inference.class_confidence[0];
  decision.degree_of_maliciousness = 1.0 - benign_confidence;
  decision.label = benign_confidence > 0.5 ? BinaryLabel::Benign : BinaryLabel::Malicious;
  return decision;
}

BinaryDecision classify_binary(std::span<const double> observation,
                               const FuzzyRuleBase& base) {
  return classify_binary(infer(observation, base));
}

}  // namespace iotguard
