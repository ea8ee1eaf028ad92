#pragma once

#include <cstdint>
#include <vector>

#include "iotguard/ingest.hpp"
#include "iotguard/types.hpp"

namespace iotguard {

/// Per-class intensity knobs. Only the knobs relevant to a scenario's class
/// are read by the generator; defaults keep the seven classes separable with
/// a deliberate PortScan/PortSweep overlap.
struct ScenarioKnobs {
  // scans
  int port_range_lo = 1;
  int port_range_hi = 1024;
  int scan_subset = 24;  // PortScan probes this many distinct ports
  // botnet
  int botnet_fanout = 2;  // number of C2 destinations
  // auth attack
  double auth_failure_rate = 0.9;
  // worm
  int worm_host_pool = 60;  // distinct victim hosts per device
  // normal traffic
  int normal_dst_pool = 12;  // external destinations per device
};

struct ScenarioConfig {
  TrafficClass cls = TrafficClass::Normal;
  int device_count = 2;
  int flows_per_device = 500;
  std::uint64_t seed = 1;
  ScenarioKnobs knobs;
};

/// Generates a labeled single-class flow log. Deterministic given
/// (config, seed); the RNG algorithm is pinned (see rng.hpp). Contradictory
/// knobs (e.g. scan subset >= port range) raise ParameterError.
FlowLog generate(const ScenarioConfig& config);

/// Generates each config and interleaves the logs by timestamp (stable
/// merge). Labels and per-class record counts are preserved.
FlowLog generate_mixed(const std::vector<ScenarioConfig>& configs,
                       std::uint64_t interleave_seed);

/// One config per traffic class with shared device/flow counts and per-class
/// derived seeds; the default acceptance-scale workload.
std::vector<ScenarioConfig> default_mix(int device_count, int flows_per_device,
                                        std::uint64_t seed,
                                        const ScenarioKnobs& knobs = {});

}  // namespace iotguard
