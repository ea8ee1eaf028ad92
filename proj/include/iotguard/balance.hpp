#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "iotguard/types.hpp"

namespace iotguard {

struct BalanceConfig {
  int benign_parts = 7;
  int malicious_parts = 3;
  int k_neighbors = 5;
  std::uint64_t seed = 0;
};

/// Uniform random subset without replacement, order-preserving and
/// seed-deterministic. target == size returns the input unchanged;
/// target > size is a ParameterError.
std::vector<FeatureVector> undersample(const std::vector<FeatureVector>& samples,
                                       std::size_t target, std::uint64_t seed);

/// SMOTE. Grows one class to `target` samples by interpolating x + u*(y - x)
/// with u ~ U[0,1) and y drawn from the k nearest same-class neighbours of a
/// random base point x (Euclidean). Originals are returned first, synthetic
/// points appended. Class size < 2 is a DataError; k >= class size clamps to
/// size - 1 with a warning on stderr.
std::vector<FeatureVector> smote(const std::vector<FeatureVector>& one_class,
                                 std::size_t target, int k_neighbors,
                                 std::uint64_t seed);

/// Rebalances a labeled dataset to benign_parts : malicious_parts with the
/// six attack subclasses equal within one sample. Benign rows are never
/// synthesized; the malicious side is resized per subclass (undersample or
/// SMOTE) toward the ratio target. Selected originals keep their input
/// order; synthetic rows are appended per class code. All 7 classes must be
/// present and every attack subclass needs at least 2 samples.
Dataset rebalance(const Dataset& data, const BalanceConfig& config);

}  // namespace iotguard
