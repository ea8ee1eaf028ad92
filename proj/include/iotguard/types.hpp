#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iotguard {

/// The seven traffic classes. Codes are a serialization contract:
/// Normal = 0, then the six attack classes in alphabetical order.
enum class TrafficClass : int {
  Normal = 0,
  AuthAttack = 1,
  Botnet = 2,
  PortSweep = 3,
  PortScan = 4,
  Spying = 5,
  Worm = 6,
};

inline constexpr int kClassCount = 7;

enum class BinaryLabel { Benign, Malicious };

const std::array<TrafficClass, kClassCount>& all_classes();

int class_code(TrafficClass c);
const std::string& class_name(TrafficClass c);
TrafficClass class_from_code(int code);
/// Case-insensitive lookup; throws DataError for unknown names.
TrafficClass class_from_name(std::string_view name);
/// Normal maps to Benign, every attack class to Malicious.
BinaryLabel to_binary(TrafficClass c);
const std::string& binary_name(BinaryLabel b);

enum class L2Proto { Ethernet, Arp, Llc };
enum class L3Proto { None, Ip, Icmp, Icmpv6, Eapol };
enum class L4Proto { None, Tcp, Udp };
enum class L5Proto { None, Http, Https, Dhcp, Bootp, Ssdp, Dns, Mdns, Ntp };

const std::string& proto_name(L2Proto p);
const std::string& proto_name(L3Proto p);
const std::string& proto_name(L4Proto p);
const std::string& proto_name(L5Proto p);
L2Proto l2_from_name(std::string_view name);
L3Proto l3_from_name(std::string_view name);
L4Proto l4_from_name(std::string_view name);
L5Proto l5_from_name(std::string_view name);

struct IpOptions {
  bool padding = false;
  bool router_alert = false;
  bool operator==(const IpOptions&) const = default;
};

/// 3-tuple flow identifier: endpoints plus the connection timestamp.
struct FlowKey {
  std::string src_ip;
  std::string dst_ip;
  double timestamp = 0.0;  // seconds since epoch
  bool operator==(const FlowKey&) const = default;
};

/// One reconstructed network connection as it appears in a flow log.
struct ConnectionRecord {
  FlowKey key;
  int src_port = 0;
  int dst_port = 0;
  L2Proto l2 = L2Proto::Ethernet;
  L3Proto l3 = L3Proto::None;
  L4Proto l4 = L4Proto::None;
  L5Proto l5 = L5Proto::None;
  IpOptions ip_options;
  double duration = 0.0;  // seconds
  std::uint64_t bytes_src_to_dst = 0;
  std::uint64_t bytes_dst_to_src = 0;
  std::vector<std::uint32_t> packet_sizes;
  std::uint32_t syn_count = 0;
  std::uint32_t syn_error_count = 0;
  std::uint32_t rej_error_count = 0;
  std::uint32_t urg_count = 0;
  bool login_attempt = false;
  bool ssh_connection = false;
  bool default_credential_used = false;
  bool login_failed = false;
  bool payload_signature_hit = false;
  std::optional<TrafficClass> label;

  bool operator==(const ConnectionRecord&) const = default;
};

/// Checks the record invariants (ranges, TCP-only counters). Returns false
/// and fills `why` when a constraint is violated.
bool validate_record(const ConnectionRecord& rec, std::string* why = nullptr);

/// One aggregation window's feature values, keyed by the 3-tuple of the
/// newest connection in the window.
struct FeatureVector {
  FlowKey key;
  std::vector<double> values;
  std::optional<TrafficClass> label;
};

/// A named feature matrix: `feature_names` describes the columns of every
/// row's `values` vector.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<FeatureVector> rows;
};

}  // namespace iotguard
