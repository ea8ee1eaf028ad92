#include "iotguard/features.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "iotguard/errors.hpp"

namespace iotguard {

namespace {

std::vector<FeatureSpec> build_schema() {
  const auto d = FeatureKind::Discrete;
  const auto c = FeatureKind::Continuous;
  return {
      // protocol and IP-option indicators of the current record
      {"proto_arp", d},
      {"proto_llc", d},
      {"proto_ip", d},
      {"proto_icmp", d},
      {"proto_icmpv6", d},
      {"proto_eapol", d},
      {"proto_tcp", d},
      {"proto_udp", d},
      {"proto_http", d},
      {"proto_https", d},
      {"proto_dhcp", d},
      {"proto_bootp", d},
      {"proto_ssdp", d},
      {"proto_dns", d},
      {"proto_mdns", d},
      {"proto_ntp", d},
      {"ipopt_padding", d},
      {"ipopt_router_alert", d},
      // window aggregates over the source's last-n connections
      {"unique_dst_ips", c},
      {"unique_src_ports", c},
      {"unique_dst_ports", c},
      {"total_connections", c},
      {"conns_to_current_dst", c},
      {"conns_from_current_src_service", c},
      {"mean_connection_duration", c},
      {"max_connection_duration", c},
      {"syn_count", c},
      {"syn_error_count", c},
      {"rej_error_count", c},
      {"urg_count", c},
      {"total_bytes", c},
      {"bytes_src_to_dst", c},
      {"bytes_dst_to_src", c},
      {"mean_packet_size", c},
      {"max_packet_size", c},
      {"payload_signature_hits", c},
      {"login_attempts", c},
      {"ssh_connections", c},
      {"failed_login_attempts", c},
  };
}

}  // namespace

const std::vector<FeatureSpec>& feature_names() {
  static const std::vector<FeatureSpec> schema = build_schema();
  return schema;
}

std::size_t feature_index(std::string_view name) {
  static const std::unordered_map<std::string_view, std::size_t> index = [] {
    std::unordered_map<std::string_view, std::size_t> m;
    const auto& schema = feature_names();
    for (std::size_t i = 0; i < schema.size(); ++i) m.emplace(schema[i].name, i);
    return m;
  }();
  const auto it = index.find(name);
  if (it == index.end()) throw DataError("unknown feature name: " + std::string(name));
  return it->second;
}

FeatureKind feature_kind(std::string_view name) {
  return feature_names()[feature_index(name)].kind;
}

std::vector<FeatureVector> extract(std::span<const ConnectionRecord> records,
                                   std::size_t window) {
  if (window == 0) throw ParameterError("aggregation window must be >= 1");

  std::vector<FeatureVector> out;
  out.reserve(records.size());

  for (std::size_t i = 0; i < records.size(); ++i) {
    const ConnectionRecord& cur = records[i];
    const std::size_t start = i + 1 >= window ? i + 1 - window : 0;
    const std::size_t count = i - start + 1;

    std::unordered_set<std::string_view> dst_ips;
    std::unordered_set<int> src_ports;
    std::unordered_set<int> dst_ports;
    std::size_t to_current_dst = 0;
    std::size_t same_service = 0;  // same (dst_port, l4) as the current record
    double duration_sum = 0.0;
    double duration_max = 0.0;
    double syn = 0.0, syn_err = 0.0, rej_err = 0.0, urg = 0.0;
    double bytes_fwd = 0.0, bytes_rev = 0.0;
    double pkt_sum = 0.0, pkt_max = 0.0;
    std::size_t pkt_count = 0;
    double payload_hits = 0.0, logins = 0.0, ssh = 0.0, failed_logins = 0.0;

    for (std::size_t j = start; j <= i; ++j) {
      const ConnectionRecord& r = records[j];
      dst_ips.insert(r.key.dst_ip);
      src_ports.insert(r.src_port);
      dst_ports.insert(r.dst_port);
      if (r.key.dst_ip == cur.key.dst_ip) ++to_current_dst;
      if (r.dst_port == cur.dst_port && r.l4 == cur.l4) ++same_service;
      duration_sum += r.duration;
      duration_max = std::max(duration_max, r.duration);
      syn += r.syn_count;
      syn_err += r.syn_error_count;
      rej_err += r.rej_error_count;
      urg += r.urg_count;
      bytes_fwd += static_cast<double>(r.bytes_src_to_dst);
      bytes_rev += static_cast<double>(r.bytes_dst_to_src);
      for (const auto s : r.packet_sizes) {
        pkt_sum += s;
        pkt_max = std::max(pkt_max, static_cast<double>(s));
        ++pkt_count;
      }
      if (r.payload_signature_hit) payload_hits += 1.0;
      if (r.login_attempt) logins += 1.0;
      if (r.ssh_connection) ssh += 1.0;
      // default-credential attempts fold into failed logins with weight 1
      if (r.login_failed) failed_logins += 1.0;
      if (r.default_credential_used) failed_logins += 1.0;
    }

    FeatureVector fv;
    fv.key = cur.key;
    fv.label = cur.label;
    fv.values = {
        cur.l2 == L2Proto::Arp ? 1.0 : 0.0,
        cur.l2 == L2Proto::Llc ? 1.0 : 0.0,
        cur.l3 == L3Proto::Ip ? 1.0 : 0.0,
        cur.l3 == L3Proto::Icmp ? 1.0 : 0.0,
        cur.l3 == L3Proto::Icmpv6 ? 1.0 : 0.0,
        cur.l3 == L3Proto::Eapol ? 1.0 : 0.0,
        cur.l4 == L4Proto::Tcp ? 1.0 : 0.0,
        cur.l4 == L4Proto::Udp ? 1.0 : 0.0,
        cur.l5 == L5Proto::Http ? 1.0 : 0.0,
        cur.l5 == L5Proto::Https ? 1.0 : 0.0,
        cur.l5 == L5Proto::Dhcp ? 1.0 : 0.0,
        cur.l5 == L5Proto::Bootp ? 1.0 : 0.0,
        cur.l5 == L5Proto::Ssdp ? 1.0 : 0.0,
        cur.l5 == L5Proto::Dns ? 1.0 : 0.0,
        cur.l5 == L5Proto::Mdns ? 1.0 : 0.0,
        cur.l5 == L5Proto::Ntp ? 1.0 : 0.0,
        cur.ip_options.padding ? 1.0 : 0.0,
        cur.ip_options.router_alert ? 1.0 : 0.0,
        static_cast<double>(dst_ips.size()),
        static_cast<double>(src_ports.size()),
        static_cast<double>(dst_ports.size()),
        static_cast<double>(count),
        static_cast<double>(to_current_dst),
        static_cast<double>(same_service),
        duration_sum / static_cast<double>(count),
        duration_max,
        syn,
        syn_err,
        rej_err,
        urg,
        bytes_fwd + bytes_rev,
        bytes_fwd,
        bytes_rev,
        pkt_count > 0 ? pkt_sum / static_cast<double>(pkt_count) : 0.0,
        pkt_max,
        payload_hits,
        logins,
        ssh,
        failed_logins,
    };
    out.push_back(std::move(fv));
  }
  return out;
}

Dataset extract_all(const FlowLog& log, std::size_t window) {
  Dataset data;
  data.feature_names.reserve(kFeatureCount);
  for (const auto& spec : feature_names()) data.feature_names.push_back(spec.name);
  for (const auto& [src, records] : partition_by_source(log)) {
    auto vectors = extract(records, window);
    data.rows.insert(data.rows.end(), std::make_move_iterator(vectors.begin()),
                     std::make_move_iterator(vectors.end()));
  }
  return data;
}

}  // namespace iotguard
