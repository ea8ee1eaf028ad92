#include "iotguard/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "iotguard/errors.hpp"

namespace iotguard {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

const std::array<std::string, kClassCount> kClassNames = {
    "Normal", "AuthAttack", "Botnet", "PortSweep", "PortScan", "Spying", "Worm"};

}  // namespace

const std::array<TrafficClass, kClassCount>& all_classes() {
  static const std::array<TrafficClass, kClassCount> classes = {
      TrafficClass::Normal,    TrafficClass::AuthAttack, TrafficClass::Botnet,
      TrafficClass::PortSweep, TrafficClass::PortScan,   TrafficClass::Spying,
      TrafficClass::Worm};
  return classes;
}

int class_code(TrafficClass c) { return static_cast<int>(c); }

const std::string& class_name(TrafficClass c) {
  return kClassNames[static_cast<std::size_t>(class_code(c))];
}

TrafficClass class_from_code(int code) {
  if (code < 0 || code >= kClassCount)
    throw DataError("unknown traffic class code: " + std::to_string(code));
  return static_cast<TrafficClass>(code);
}

TrafficClass class_from_name(std::string_view name) {
  const std::string needle = lower(name);
  for (int i = 0; i < kClassCount; ++i) {
    if (lower(kClassNames[static_cast<std::size_t>(i)]) == needle)
      return static_cast<TrafficClass>(i);
  }
  throw DataError("unknown traffic class name: " + std::string(name));
}

BinaryLabel to_binary(TrafficClass c) {
  return c == TrafficClass::Normal ? BinaryLabel::Benign : BinaryLabel::Malicious;
}

const std::string& binary_name(BinaryLabel b) {
  static const std::string benign = "benign";
  static const std::string malicious = "malicious";
  return b == BinaryLabel::Benign ? benign : malicious;
}

namespace {

const std::array<std::string, 3> kL2Names = {"ethernet", "arp", "llc"};
const std::array<std::string, 5> kL3Names = {"none", "ip", "icmp", "icmpv6", "eapol"};
const std::array<std::string, 3> kL4Names = {"none", "tcp", "udp"};
const std::array<std::string, 9> kL5Names = {"none", "http", "https", "dhcp", "bootp",
                                             "ssdp", "dns",  "mdns",  "ntp"};

template <typename Enum, std::size_t N>
Enum enum_from_name(const std::array<std::string, N>& table, std::string_view name,
                    const char* what) {
  const std::string needle = lower(name);
  for (std::size_t i = 0; i < N; ++i) {
    if (table[i] == needle) return static_cast<Enum>(i);
  }
  throw DataError(std::string("unknown ") + what + " protocol: " + std::string(name));
}

}  // namespace

const std::string& proto_name(L2Proto p) { return kL2Names[static_cast<std::size_t>(p)]; }
const std::string& proto_name(L3Proto p) { return kL3Names[static_cast<std::size_t>(p)]; }
const std::string& proto_name(L4Proto p) { return kL4Names[static_cast<std::size_t>(p)]; }
const std::string& proto_name(L5Proto p) { return kL5Names[static_cast<std::size_t>(p)]; }

L2Proto l2_from_name(std::string_view name) { return enum_from_name<L2Proto>(kL2Names, name, "L2"); }
L3Proto l3_from_name(std::string_view name) { return enum_from_name<L3Proto>(kL3Names, name, "L3"); }
L4Proto l4_from_name(std::string_view name) { return enum_from_name<L4Proto>(kL4Names, name, "L4"); }
L5Proto l5_from_name(std::string_view name) { return enum_from_name<L5Proto>(kL5Names, name, "L5"); }

bool validate_record(const ConnectionRecord& rec, std::string* why) {
  const auto fail = [&](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  if (rec.key.src_ip.empty()) return fail("src_ip is empty");
  if (rec.key.dst_ip.empty()) return fail("dst_ip is empty");
  if (!std::isfinite(rec.key.timestamp) || rec.key.timestamp < 0.0)
    return fail("timestamp must be finite and >= 0");
  if (rec.src_port < 0 || rec.src_port > 65535) return fail("src_port out of range");
  if (rec.dst_port < 0 || rec.dst_port > 65535) return fail("dst_port out of range");
  if (!std::isfinite(rec.duration) || rec.duration < 0.0)
    return fail("duration must be finite and >= 0");
  const bool tcp_counters = rec.syn_count > 0 || rec.syn_error_count > 0 ||
                            rec.rej_error_count > 0 || rec.urg_count > 0;
  if (tcp_counters && rec.l4 != L4Proto::Tcp)
    return fail("syn/rej/urg counters require l4 = tcp");
  return true;
}

}  // namespace iotguard
