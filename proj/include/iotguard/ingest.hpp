#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "iotguard/types.hpp"

namespace iotguard {

/// A loaded flow log. Records are sorted by (src_ip, timestamp); ties keep
/// file order so aggregation windows are reproducible.
struct FlowLog {
  std::vector<ConnectionRecord> records;
  std::string source_path;
};

struct ParseIssue {
  std::size_t line_number = 0;  // 1-based
  std::string message;
};

struct ParseReport {
  std::size_t total_lines = 0;
  std::size_t parsed = 0;
  std::vector<ParseIssue> issues;
};

struct ParseResult {
  FlowLog log;
  ParseReport report;
};

/// Parses one JSON-lines flow log. Required keys per line: src_ip, dst_ip,
/// timestamp, src_port, dst_port, l4; everything else defaults (counters 0,
/// booleans false). In lenient mode malformed lines are collected in the
/// report and parsing continues; in strict mode the first bad line throws
/// DataError. A missing file throws DataError.
ParseResult parse_flow_log(const std::string& path, bool strict = false);

/// Parses records from an in-memory JSON-lines buffer (used by tests and the
/// file-based entry point alike).
ParseResult parse_flow_log_text(const std::string& text, bool strict = false,
                                const std::string& origin = "<memory>");

/// Parses a single JSON object line into a record. Throws DataError with a
/// field-level message on any violation.
ConnectionRecord parse_record_json(const std::string& line);

/// Serializes one record to its canonical JSON line (keys sorted).
std::string record_to_json(const ConnectionRecord& rec);

void write_flow_log(const std::string& path, const FlowLog& log);

/// Splits a log by source address. Map order (lexicographic src_ip) makes
/// downstream iteration deterministic; per-partition order is timestamp
/// ascending as inherited from the log.
std::map<std::string, std::vector<ConnectionRecord>> partition_by_source(const FlowLog& log);

}  // namespace iotguard
