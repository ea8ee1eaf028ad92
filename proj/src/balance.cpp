#include "iotguard/balance.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "iotguard/errors.hpp"
#include "iotguard/matrix.hpp"
#include "iotguard/rng.hpp"

namespace iotguard {

namespace {

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  // partial Fisher-Yates: the first k entries become the sample
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.index(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

std::vector<FeatureVector> undersample(const std::vector<FeatureVector>& samples,
                                       std::size_t target, std::uint64_t seed) {
  if (target > samples.size())
    throw ParameterError("undersample target exceeds available samples");
  if (target == samples.size()) return samples;
  Rng rng(seed);
  const auto keep = sample_without_replacement(samples.size(), target, rng);
  std::vector<FeatureVector> out;
  out.reserve(target);
  for (const auto idx : keep) out.push_back(samples[idx]);
  return out;
}

std::vector<FeatureVector> smote(const std::vector<FeatureVector>& one_class,
                                 std::size_t target, int k_neighbors,
                                 std::uint64_t seed) {
  if (target < one_class.size())
    throw ParameterError("smote target is below the current class size");
  if (target == one_class.size()) return one_class;
  if (one_class.size() < 2)
    throw DataError("smote needs at least 2 samples to interpolate");
  if (k_neighbors < 1) throw ParameterError("k_neighbors must be >= 1");

  const std::size_t n = one_class.size();
  std::size_t k = static_cast<std::size_t>(k_neighbors);
  if (k >= n) {
    k = n - 1;
    std::cerr << "warning: smote k_neighbors clamped to " << k
              << " (class has " << n << " samples)\n";
  }

  // k nearest same-class neighbours per sample, by Euclidean distance with
  // index tie-break
  std::vector<std::vector<std::size_t>> neighbors(n);
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dist.emplace_back(squared_euclidean(one_class[i].values, one_class[j].values), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                      dist.end());
    neighbors[i].reserve(k);
    for (std::size_t t = 0; t < k; ++t) neighbors[i].push_back(dist[t].second);
  }

  std::vector<FeatureVector> out = one_class;
  out.reserve(target);
  Rng rng(seed);
  std::size_t synth_index = 0;
  while (out.size() < target) {
    const std::size_t base = rng.index(n);
    const std::size_t pick = neighbors[base][rng.index(neighbors[base].size())];
    const double lambda = rng.uniform();
    FeatureVector synth;
    synth.label = one_class[base].label;
    synth.key.src_ip = "smote:" +
                       (synth.label ? class_name(*synth.label) : std::string("unlabeled")) +
                       ":" + std::to_string(synth_index++);
    synth.key.dst_ip = "synthetic";
    synth.key.timestamp = 0.0;
    synth.values.resize(one_class[base].values.size());
    for (std::size_t d = 0; d < synth.values.size(); ++d) {
      const double x = one_class[base].values[d];
      const double y = one_class[pick].values[d];
      synth.values[d] = x + lambda * (y - x);
    }
    out.push_back(std::move(synth));
  }
  return out;
}

Dataset rebalance(const Dataset& data, const BalanceConfig& config) {
  if (config.benign_parts <= 0 || config.malicious_parts <= 0)
    throw ParameterError("ratio parts must be positive");
  if (config.k_neighbors < 1) throw ParameterError("k_neighbors must be >= 1");

  std::array<std::vector<std::size_t>, kClassCount> by_class;
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    if (!data.rows[r].label) throw DataError("rebalance needs labeled rows");
    by_class[static_cast<std::size_t>(class_code(*data.rows[r].label))].push_back(r);
  }
  for (const auto cls : all_classes()) {
    const auto& rows = by_class[static_cast<std::size_t>(class_code(cls))];
    if (rows.empty())
      throw DataError("rebalance needs every class present; missing " + class_name(cls));
    if (cls != TrafficClass::Normal && rows.size() < 2)
      throw DataError("attack subclass " + class_name(cls) + " has fewer than 2 samples");
  }

  const double benign_count = static_cast<double>(by_class[0].size());
  double malicious_count = 0.0;
  for (int c = 1; c < kClassCount; ++c)
    malicious_count += static_cast<double>(by_class[static_cast<std::size_t>(c)].size());

  const double bp = static_cast<double>(config.benign_parts);
  const double mp = static_cast<double>(config.malicious_parts);

  // Keep the benign side intact and move the malicious side to
  // malicious_parts/benign_parts of it, unless that would mean synthesizing
  // more malicious points than exist; in that extreme case keep the
  // malicious total and undersample benign instead.
  std::size_t benign_target;
  std::size_t malicious_target;
  const double malicious_for_benign = std::round(benign_count * mp / bp);
  if (malicious_for_benign <= 2.0 * malicious_count) {
    benign_target = static_cast<std::size_t>(benign_count);
    malicious_target = static_cast<std::size_t>(malicious_for_benign);
  } else {
    malicious_target = static_cast<std::size_t>(malicious_count);
    benign_target = static_cast<std::size_t>(std::round(malicious_count * bp / mp));
  }
  malicious_target = std::max<std::size_t>(malicious_target, 6);

  // per-subclass targets, equal within +-1; the remainder goes to the
  // lowest class codes
  const std::size_t base = malicious_target / 6;
  const std::size_t remainder = malicious_target % 6;

  std::vector<bool> keep(data.rows.size(), false);
  std::vector<FeatureVector> synthetic;

  const auto resize_class = [&](TrafficClass cls, std::size_t target) {
    const auto& rows = by_class[static_cast<std::size_t>(class_code(cls))];
    const std::uint64_t class_seed =
        Rng::derive(config.seed, static_cast<std::uint64_t>(class_code(cls)));
    if (target <= rows.size()) {
      // same selection as undersample() under the same seed
      Rng rng(class_seed);
      for (const auto idx : sample_without_replacement(rows.size(), target, rng))
        keep[rows[idx]] = true;
    } else {
      for (const auto r : rows) keep[r] = true;
      std::vector<FeatureVector> members;
      members.reserve(rows.size());
      for (const auto r : rows) members.push_back(data.rows[r]);
      auto grown = smote(members, target, config.k_neighbors, class_seed);
      for (std::size_t i = members.size(); i < grown.size(); ++i)
        synthetic.push_back(std::move(grown[i]));
    }
  };

  resize_class(TrafficClass::Normal, benign_target);
  for (int c = 1; c < kClassCount; ++c) {
    const std::size_t target = base + (static_cast<std::size_t>(c - 1) < remainder ? 1 : 0);
    resize_class(static_cast<TrafficClass>(c), target);
  }

  Dataset out;
  out.feature_names = data.feature_names;
  for (std::size_t r = 0; r < data.rows.size(); ++r)
    if (keep[r]) out.rows.push_back(data.rows[r]);
  for (auto& fv : synthetic) out.rows.push_back(std::move(fv));
  return out;
}

}  // namespace iotguard
