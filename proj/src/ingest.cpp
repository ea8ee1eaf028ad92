#include "iotguard/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "iotguard/errors.hpp"

namespace iotguard {

using nlohmann::json;

namespace {

double require_number(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw DataError(std::string("missing required key: ") + key);
  if (!it->is_number()) throw DataError(std::string(key) + " must be a number");
  return it->get<double>();
}

std::string require_string(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw DataError(std::string("missing required key: ") + key);
  if (!it->is_string()) throw DataError(std::string(key) + " must be a string");
  return it->get<std::string>();
}

int as_port(const json& obj, const char* key) {
  const double v = require_number(obj, key);
  if (v < 0 || v > 65535 || v != std::floor(v))
    throw DataError(std::string(key) + " out of range");
  return static_cast<int>(v);
}

std::uint64_t opt_count(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) return 0;
  if (!it->is_number() || it->get<double>() < 0 ||
      it->get<double>() != std::floor(it->get<double>()))
    throw DataError(std::string(key) + " must be a non-negative integer");
  return it->get<std::uint64_t>();
}

bool opt_bool(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) return false;
  if (!it->is_boolean()) throw DataError(std::string(key) + " must be a boolean");
  return it->get<bool>();
}

}  // namespace

ConnectionRecord parse_record_json(const std::string& line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw DataError("line is not a JSON object");

  ConnectionRecord rec;
  rec.key.src_ip = require_string(obj, "src_ip");
  rec.key.dst_ip = require_string(obj, "dst_ip");
  rec.key.timestamp = require_number(obj, "timestamp");
  rec.src_port = as_port(obj, "src_port");
  rec.dst_port = as_port(obj, "dst_port");
  rec.l4 = l4_from_name(require_string(obj, "l4"));

  if (obj.contains("l2")) rec.l2 = l2_from_name(obj.at("l2").get<std::string>());
  if (obj.contains("l3")) rec.l3 = l3_from_name(obj.at("l3").get<std::string>());
  if (obj.contains("l5")) rec.l5 = l5_from_name(obj.at("l5").get<std::string>());
  if (obj.contains("ip_options")) {
    const auto& opts = obj.at("ip_options");
    if (!opts.is_array()) throw DataError("ip_options must be an array");
    for (const auto& o : opts) {
      const std::string name = o.get<std::string>();
      if (name == "padding") {
        rec.ip_options.padding = true;
      } else if (name == "router_alert") {
        rec.ip_options.router_alert = true;
      } else {
        throw DataError("unknown ip option: " + name);
      }
    }
  }
  if (obj.contains("duration")) rec.duration = obj.at("duration").get<double>();
  rec.bytes_src_to_dst = opt_count(obj, "bytes_src_to_dst");
  rec.bytes_dst_to_src = opt_count(obj, "bytes_dst_to_src");
  if (obj.contains("packet_sizes")) {
    const auto& sizes = obj.at("packet_sizes");
    if (!sizes.is_array()) throw DataError("packet_sizes must be an array");
    for (const auto& s : sizes) rec.packet_sizes.push_back(s.get<std::uint32_t>());
  }
  rec.syn_count = static_cast<std::uint32_t>(opt_count(obj, "syn_count"));
  rec.syn_error_count = static_cast<std::uint32_t>(opt_count(obj, "syn_error_count"));
  rec.rej_error_count = static_cast<std::uint32_t>(opt_count(obj, "rej_error_count"));
  rec.urg_count = static_cast<std::uint32_t>(opt_count(obj, "urg_count"));
  rec.login_attempt = opt_bool(obj, "login_attempt");
  rec.ssh_connection = opt_bool(obj, "ssh_connection");
  rec.default_credential_used = opt_bool(obj, "default_credential_used");
  rec.login_failed = opt_bool(obj, "login_failed");
  rec.payload_signature_hit = opt_bool(obj, "payload_signature_hit");
  if (obj.contains("label")) rec.label = class_from_name(obj.at("label").get<std::string>());

  std::string why;
  if (!validate_record(rec, &why)) throw DataError(why);
  return rec;
}

std::string record_to_json(const ConnectionRecord& rec) {
  json obj;
  obj["src_ip"] = rec.key.src_ip;
  obj["dst_ip"] = rec.key.dst_ip;
  obj["timestamp"] = rec.key.timestamp;
  obj["src_port"] = rec.src_port;
  obj["dst_port"] = rec.dst_port;
  obj["l2"] = proto_name(rec.l2);
  obj["l3"] = proto_name(rec.l3);
  obj["l4"] = proto_name(rec.l4);
  obj["l5"] = proto_name(rec.l5);
  json opts = json::array();
  if (rec.ip_options.padding) opts.push_back("padding");
  if (rec.ip_options.router_alert) opts.push_back("router_alert");
  obj["ip_options"] = opts;
  obj["duration"] = rec.duration;
  obj["bytes_src_to_dst"] = rec.bytes_src_to_dst;
  obj["bytes_dst_to_src"] = rec.bytes_dst_to_src;
  obj["packet_sizes"] = rec.packet_sizes;
  obj["syn_count"] = rec.syn_count;
  obj["syn_error_count"] = rec.syn_error_count;
  obj["rej_error_count"] = rec.rej_error_count;
  obj["urg_count"] = rec.urg_count;
  obj["login_attempt"] = rec.login_attempt;
  obj["ssh_connection"] = rec.ssh_connection;
  obj["default_credential_used"] = rec.default_credential_used;
  obj["login_failed"] = rec.login_failed;
  obj["payload_signature_hit"] = rec.payload_signature_hit;
  if (rec.label) obj["label"] = class_name(*rec.label);
  return obj.dump();
}

ParseResult parse_flow_log_text(const std::string& text, bool strict,
                                const std::string& origin) {
  ParseResult result;
  result.log.source_path = origin;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++result.report.total_lines;
    try {
      result.log.records.push_back(parse_record_json(line));
      ++result.report.parsed;
    } catch (const DataError& e) {
      if (strict)
        throw DataError(origin + ":" + std::to_string(line_no) + ": " + e.what());
      result.report.issues.push_back({line_no, e.what()});
    }
  }
  std::stable_sort(result.log.records.begin(), result.log.records.end(),
                   [](const ConnectionRecord& a, const ConnectionRecord& b) {
                     if (a.key.src_ip != b.key.src_ip) return a.key.src_ip < b.key.src_ip;
                     return a.key.timestamp < b.key.timestamp;
                   });
  return result;
}

ParseResult parse_flow_log(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open flow log: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_flow_log_text(buf.str(), strict, path);
}

void write_flow_log(const std::string& path, const FlowLog& log) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write flow log: " + path);
  for (const auto& rec : log.records) out << record_to_json(rec) << '\n';
}

std::map<std::string, std::vector<ConnectionRecord>> partition_by_source(const FlowLog& log) {
  std::map<std::string, std::vector<ConnectionRecord>> parts;
  for (const auto& rec : log.records) parts[rec.key.src_ip].push_back(rec);
  return parts;
}

}  // namespace iotguard
