#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iotguard/ingest.hpp"
#include "iotguard/types.hpp"

namespace iotguard {

enum class FeatureKind { Discrete, Continuous };

struct FeatureSpec {
  std::string name;
  FeatureKind kind;
};

inline constexpr std::size_t kFeatureCount = 39;

/// The fixed 39-entry feature schema: 18 discrete protocol/option indicators
/// followed by 21 continuous window aggregates. Order is a repo contract.
const std::vector<FeatureSpec>& feature_names();

std::size_t feature_index(std::string_view name);  // DataError if unknown
FeatureKind feature_kind(std::string_view name);

/// Computes one 39-entry FeatureVector per record. Aggregates run over the
/// record itself plus up to `window - 1` preceding records from the same
/// source (connection-count window; timestamps never enter the features).
/// `records` must belong to a single source, ordered by time.
std::vector<FeatureVector> extract(std::span<const ConnectionRecord> records,
                                   std::size_t window);

/// Partitions the log by source and extracts every partition. Output rows
/// follow (src_ip, timestamp) order.
Dataset extract_all(const FlowLog& log, std::size_t window);

}  // namespace iotguard
