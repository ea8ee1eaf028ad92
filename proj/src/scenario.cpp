#include "iotguard/scenario.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "iotguard/errors.hpp"
#include "iotguard/rng.hpp"

namespace iotguard {

namespace {

std::string device_ip(TrafficClass cls, int device) {
  return "10.7." + std::to_string(class_code(cls)) + "." + std::to_string(device + 1);
}

int ephemeral_port(Rng& rng) { return rng.uniform_int(49152, 65535); }

std::vector<std::uint32_t> sample_packets(Rng& rng, int count, int lo, int hi) {
  std::vector<std::uint32_t> sizes;
  sizes.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    sizes.push_back(static_cast<std::uint32_t>(rng.uniform_int(lo, hi)));
  return sizes;
}

struct L5Service {
  L5Proto proto;
  L4Proto l4;
  int port;
  double weight;
};

// Typical client chatter: web traffic plus periodic discovery/time protocols.
const std::vector<L5Service>& normal_services() {
  static const std::vector<L5Service> services = {
      {L5Proto::Https, L4Proto::Tcp, 443, 0.35}, {L5Proto::Http, L4Proto::Tcp, 80, 0.20},
      {L5Proto::Dns, L4Proto::Udp, 53, 0.20},    {L5Proto::Ntp, L4Proto::Udp, 123, 0.08},
      {L5Proto::Ssdp, L4Proto::Udp, 1900, 0.07}, {L5Proto::Mdns, L4Proto::Udp, 5353, 0.06},
      {L5Proto::Dhcp, L4Proto::Udp, 67, 0.04},
  };
  return services;
}

const L5Service& pick_service(Rng& rng) {
  const auto& services = normal_services();
  double total = 0.0;
  for (const auto& s : services) total += s.weight;
  double roll = rng.uniform() * total;
  for (const auto& s : services) {
    roll -= s.weight;
    if (roll <= 0.0) return s;
  }
  return services.back();
}

ConnectionRecord base_record(const std::string& src, const std::string& dst, double ts,
                             TrafficClass cls) {
  ConnectionRecord rec;
  rec.key.src_ip = src;
  rec.key.dst_ip = dst;
  rec.key.timestamp = ts;
  rec.l3 = L3Proto::Ip;
  rec.label = cls;
  return rec;
}

void generate_normal(std::vector<ConnectionRecord>& out, const ScenarioConfig& cfg,
                     int device, Rng& rng) {
  const std::string src = device_ip(cfg.cls, device);
  std::vector<std::string> pool;
  for (int i = 0; i < cfg.knobs.normal_dst_pool; ++i)
    pool.push_back("93." + std::to_string(rng.uniform_int(10, 250)) + "." +
                   std::to_string(rng.uniform_int(1, 250)) + "." +
                   std::to_string(rng.uniform_int(1, 250)));
  pool.push_back("10.7.0.254");  // local gateway chatter
  const std::string favourite = pool[rng.index(pool.size())];

  double ts = rng.uniform(0.0, 1.0);
  for (int f = 0; f < cfg.flows_per_device; ++f) {
    ts += rng.exponential(2.0);
    const auto& service = pick_service(rng);
    const std::string& dst =
        rng.bernoulli(0.5) ? favourite : pool[rng.index(pool.size())];
    auto rec = base_record(src, dst, ts, cfg.cls);
    rec.l4 = service.l4;
    rec.l5 = service.proto;
    rec.dst_port = service.port;
    rec.src_port = ephemeral_port(rng);
    if (service.l4 == L4Proto::Tcp) rec.syn_count = 1;
    switch (service.proto) {
      case L5Proto::Https:
      case L5Proto::Http:
        rec.duration = rng.uniform(0.2, 20.0);
        rec.bytes_src_to_dst = static_cast<std::uint64_t>(rng.uniform(500.0, 5000.0));
        rec.bytes_dst_to_src = static_cast<std::uint64_t>(rng.uniform(5000.0, 200000.0));
        rec.packet_sizes = sample_packets(rng, 4, 200, 1460);
        break;
      case L5Proto::Dns:
      case L5Proto::Mdns:
        rec.duration = rng.uniform(0.005, 0.2);
        rec.bytes_src_to_dst = static_cast<std::uint64_t>(rng.uniform(50.0, 200.0));
        rec.bytes_dst_to_src = static_cast<std::uint64_t>(rng.uniform(80.0, 400.0));
        rec.packet_sizes = sample_packets(rng, 2, 60, 300);
        break;
      default:
        rec.duration = rng.uniform(0.02, 0.6);
        rec.bytes_src_to_dst = static_cast<std::uint64_t>(rng.uniform(100.0, 600.0));
        rec.bytes_dst_to_src = static_cast<std::uint64_t>(rng.uniform(100.0, 800.0));
        rec.packet_sizes = sample_packets(rng, 2, 80, 600);
        break;
    }
    // multicast discovery carries the router-alert option
    if (service.proto == L5Proto::Mdns || service.proto == L5Proto::Ssdp)
      rec.ip_options.router_alert = rng.bernoulli(0.8);
    if (rng.bernoulli(0.01)) {
      rec.login_attempt = true;  // occasional legitimate ssh admin session
      rec.ssh_connection = true;
      rec.login_failed = rng.bernoulli(0.1);
      rec.dst_port = 22;
      rec.l4 = L4Proto::Tcp;
      rec.l5 = L5Proto::None;
      rec.syn_count = 1;
    }
    out.push_back(std::move(rec));
  }
}

void generate_auth_attack(std::vector<ConnectionRecord>& out, const ScenarioConfig& cfg,
                          int device, Rng& rng) {
  const std::string src = device_ip(cfg.cls, device);
  std::vector<std::string> victims = {"10.7.200." + std::to_string(device + 1)};
  if (rng.bernoulli(0.5))
    victims.push_back("10.7.200." + std::to_string(device + 101));
  double ts = rng.uniform(0.0, 1.0);
  for (int f = 0; f < cfg.flows_per_device; ++f) {
    ts += rng.uniform(0.1, 0.5);
    auto rec = base_record(src, victims[rng.index(victims.size())], ts, cfg.cls);
    rec.l4 = L4Proto::Tcp;
    rec.dst_port = 22;
    rec.src_port = ephemeral_port(rng);
    rec.syn_count = 1;
    rec.login_attempt = true;
    rec.ssh_connection = true;
    rec.login_failed = rng.bernoulli(cfg.knobs.auth_failure_rate);
    rec.default_credential_used = rng.bernoulli(0.35);
    rec.duration = rng.uniform(0.2, 2.0);
    rec.bytes_src_to_dst = static_cast<std::uint64_t>(rng.uniform(200.0, 800.0));
    rec.bytes_dst_to_src = static_cast<std::uint64_t>(rng.uniform(100.0, 400.0));
    rec.packet_sizes = sample_packets(rng, 3, 60, 400);
    if (rng.bernoulli(0.05)) rec.rej_error_count = 1;
    out.push_back(std::move(rec));
  }
}

void generate_botnet(std::vector<ConnectionRecord>& out, const ScenarioConfig& cfg,
                     int device, Rng& rng) {
  const std::string src = device_ip(cfg.cls, device);
  std::vector<std::string> c2;
  for (int i = 0; i < std::max(1, cfg.knobs.botnet_fanout); ++i)
    c2.push_back("185.45." + std::to_string(rng.uniform_int(1, 250)) + "." +
                 std::to_string(rng.uniform_int(1, 250)));
  const int port = rng.bernoulli(0.5) ? 6667 : 8080;
  double ts = rng.uniform(0.0, 1.0);
  for (int f = 0; f < cfg.flows_per_device; ++f) {
    ts += rng.uniform(0.02, 0.2);
    auto rec = base_record(src, c2[rng.index(c2.size())], ts, cfg.cls);
    rec.l4 = L4Proto::Tcp;
    rec.dst_port = port;
    rec.src_port = ephemeral_port(rng);
    rec.syn_count = 1;
    rec.duration = rng.uniform(0.01, 0.3);
    rec.bytes_src_to_dst = static_cast<std::uint64_t>(rng.uniform(100.0, 600.0));
    rec.bytes_dst_to_src = static_cast<std::uint64_t>(rng.uniform(50.0, 300.0));
    rec.packet_sizes = sample_packets(rng, 2, 60, 400);
    out.push_back(std::move(rec));
  }
}

void generate_scan_like(std::vector<ConnectionRecord>& out, const ScenarioConfig& cfg,
                        int device, Rng& rng, bool sweep) {
  const int range_lo = cfg.knobs.port_range_lo;
  const int range_hi = cfg.knobs.port_range_hi;
  if (range_lo < 0 || range_hi > 65535 || range_lo > range_hi)
    throw ParameterError("scan port range is invalid");
  const int range_size = range_hi - range_lo + 1;
  if (!sweep && cfg.knobs.scan_subset >= range_size)
    throw ParameterError("scan subset must be smaller than the full port range");

  // sweep probes a permutation of the whole range; scan cycles over a random
  // subset of it
  std::vector<int> ports(static_cast<std::size_t>(range_size));
  std::iota(ports.begin(), ports.end(), range_lo);
  for (std::size_t i = ports.size() - 1; i > 0; --i)
    std::swap(ports[i], ports[rng.index(i + 1)]);
  if (!sweep) ports.resize(static_cast<std::size_t>(cfg.knobs.scan_subset));

  const std::string src = device_ip(cfg.cls, device);
  const std::string victim = "10.7.100." + std::to_string(device + 1);
  double ts = rng.uniform(0.0, 1.0);
  for (int f = 0; f < cfg.flows_per_device; ++f) {
    ts += sweep ? rng.uniform(0.001, 0.05) : rng.uniform(0.05, 0.5);
    auto rec = base_record(src, victim, ts, cfg.cls);
    rec.l4 = L4Proto::Tcp;
    rec.dst_port = ports[static_cast<std::size_t>(f) % ports.size()];
    rec.src_port = ephemeral_port(rng);
    rec.syn_count = 1;
    const bool closed = rng.bernoulli(0.92);
    if (closed) {
      if (rng.bernoulli(0.7))
        rec.rej_error_count = 1;
      else
        rec.syn_error_count = 1;
      rec.duration = rng.uniform(0.0005, 0.005);
      rec.bytes_dst_to_src = static_cast<std::uint64_t>(rng.uniform(0.0, 60.0));
    } else {
      rec.duration = rng.uniform(0.01, 0.1);
      rec.bytes_dst_to_src = static_cast<std::uint64_t>(rng.uniform(40.0, 120.0));
    }
    rec.bytes_src_to_dst = static_cast<std::uint64_t>(rng.uniform(40.0, 60.0));
    rec.packet_sizes = sample_packets(rng, 1, 40, 64);
    if (rng.bernoulli(0.05)) rec.urg_count = 1;  // xmas-style probes
    out.push_back(std::move(rec));
  }
}

void generate_spying(std::vector<ConnectionRecord>& out, const ScenarioConfig& cfg,
                     int device, Rng& rng) {
  const std::string src = device_ip(cfg.cls, device);
  const std::string sink = "185.99." + std::to_string(rng.uniform_int(1, 250)) + "." +
                           std::to_string(rng.uniform_int(1, 250));
  double ts = rng.uniform(0.0, 1.0);
  for (int f = 0; f < cfg.flows_per_device; ++f) {
    ts += rng.uniform(1.0, 10.0);
    auto rec = base_record(src, sink, ts, cfg.cls);
    rec.l4 = L4Proto::Tcp;
    rec.l5 = L5Proto::Https;
    rec.dst_port = 443;
    rec.src_port = ephemeral_port(rng);
    rec.syn_count = 1;
    rec.duration = rng.uniform(5.0, 60.0);
    rec.bytes_src_to_dst = static_cast<std::uint64_t>(rng.uniform(50000.0, 400000.0));
    rec.bytes_dst_to_src = static_cast<std::uint64_t>(rng.uniform(200.0, 2000.0));
    rec.packet_sizes = sample_packets(rng, 4, 1200, 1460);
    out.push_back(std::move(rec));
  }
}

void generate_worm(std::vector<ConnectionRecord>& out, const ScenarioConfig& cfg,
                   int device, Rng& rng) {
  const std::string src = device_ip(cfg.cls, device);
  const int pool = std::max(2, cfg.knobs.worm_host_pool);
  double ts = rng.uniform(0.0, 1.0);
  for (int f = 0; f < cfg.flows_per_device; ++f) {
    ts += rng.uniform(0.05, 0.3);
    const int victim = f % pool;
    auto rec = base_record(src, "10.7.150." + std::to_string(victim + 1), ts, cfg.cls);
    rec.l4 = L4Proto::Tcp;
    rec.dst_port = rng.bernoulli(0.6) ? 445 : 22;
    rec.src_port = ephemeral_port(rng);
    rec.syn_count = 1;
    const bool reachable = !rng.bernoulli(0.25);
    if (!reachable) {
      rec.rej_error_count = 1;
      rec.duration = rng.uniform(0.001, 0.01);
    } else {
      rec.login_attempt = rng.bernoulli(0.7);
      rec.ssh_connection = rec.login_attempt && rec.dst_port == 22;
      rec.login_failed = rec.login_attempt && rng.bernoulli(0.6);
      rec.default_credential_used = rec.login_attempt && rng.bernoulli(0.4);
      const bool copied = rec.login_attempt && !rec.login_failed;
      rec.payload_signature_hit = copied;
      rec.duration = rng.uniform(0.05, 1.0);
      rec.bytes_src_to_dst =
          static_cast<std::uint64_t>(copied ? rng.uniform(5000.0, 50000.0)
                                            : rng.uniform(100.0, 1000.0));
      rec.bytes_dst_to_src = static_cast<std::uint64_t>(rng.uniform(50.0, 500.0));
      rec.packet_sizes = sample_packets(rng, 3, 100, 1200);
    }
    out.push_back(std::move(rec));
  }
}

}  // namespace

FlowLog generate(const ScenarioConfig& cfg) {
  if (cfg.device_count < 1) throw ParameterError("device_count must be >= 1");
  if (cfg.flows_per_device < 1) throw ParameterError("flows_per_device must be >= 1");

  FlowLog log;
  log.source_path = "generated:" + class_name(cfg.cls);
  for (int device = 0; device < cfg.device_count; ++device) {
    Rng rng(Rng::derive(cfg.seed, static_cast<std::uint64_t>(device)));
    switch (cfg.cls) {
      case TrafficClass::Normal:
        generate_normal(log.records, cfg, device, rng);
        break;
      case TrafficClass::AuthAttack:
        generate_auth_attack(log.records, cfg, device, rng);
        break;
      case TrafficClass::Botnet:
        generate_botnet(log.records, cfg, device, rng);
        break;
      case TrafficClass::PortSweep:
        generate_scan_like(log.records, cfg, device, rng, /*sweep=*/true);
        break;
      case TrafficClass::PortScan:
        generate_scan_like(log.records, cfg, device, rng, /*sweep=*/false);
        break;
      case TrafficClass::Spying:
        generate_spying(log.records, cfg, device, rng);
        break;
      case TrafficClass::Worm:
        generate_worm(log.records, cfg, device, rng);
        break;
    }
  }
  std::stable_sort(log.records.begin(), log.records.end(),
                   [](const ConnectionRecord& a, const ConnectionRecord& b) {
                     return a.key.timestamp < b.key.timestamp;
                   });
  return log;
}

FlowLog generate_mixed(const std::vector<ScenarioConfig>& configs,
                       std::uint64_t interleave_seed) {
  if (configs.empty()) throw ParameterError("generate_mixed needs at least one config");
  (void)interleave_seed;  // reserved; the merge itself is a deterministic sort
  FlowLog merged;
  merged.source_path = "generated:mixed";
  for (const auto& cfg : configs) {
    auto log = generate(cfg);
    merged.records.insert(merged.records.end(),
                          std::make_move_iterator(log.records.begin()),
                          std::make_move_iterator(log.records.end()));
  }
  std::stable_sort(merged.records.begin(), merged.records.end(),
                   [](const ConnectionRecord& a, const ConnectionRecord& b) {
                     return a.key.timestamp < b.key.timestamp;
                   });
  return merged;
}

std::vector<ScenarioConfig> default_mix(int device_count, int flows_per_device,
                                        std::uint64_t seed, const ScenarioKnobs& knobs) {
  std::vector<ScenarioConfig> configs;
  configs.reserve(kClassCount);
  for (const auto cls : all_classes()) {
    ScenarioConfig cfg;
    cfg.cls = cls;
    cfg.device_count = device_count;
    cfg.flows_per_device = flows_per_device;
    cfg.seed = Rng::derive(seed, 100 + static_cast<std::uint64_t>(class_code(cls)));
    cfg.knobs = knobs;
    configs.push_back(cfg);
  }
  return configs;
}

}  // namespace iotguard
