#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "aqkg/errors.hpp"

namespace aqkg {

/// One RSSI reading: probe round number plus the reported power in dBm.
struct RssiSample {
  std::int64_t index = 0;
  int value = 0;  // dBm

  friend bool operator==(const RssiSample&, const RssiSample&) = default;
};

/// Ordered RSSI measurements collected by one party.
struct RssiTrace {
  std::string party;  // "Alice", "Bob" or "Eve"
  std::vector<RssiSample> samples;

  /// Throws ValidationError unless indices are strictly increasing and all
  /// values lie in the ingestion sanity range [-150, 0] dBm.
  void validate() const;

  std::vector<std::int64_t> indices() const;
  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
};

/// Paired probing run. lost_a / lost_b hold the probe indices each party
/// failed to receive (or otherwise excludes).
struct ProbeSession {
  RssiTrace trace_a;
  RssiTrace trace_b;
  std::set<std::int64_t> lost_a;
  std::set<std::int64_t> lost_b;
};

/// Piecewise schedule entry: `count` probes drawn with the given shadowing
/// standard deviation. Used to synthesize traces whose diversity changes
/// over time.
struct ShadowSegment {
  std::size_t count = 0;
  double sigma = 0.0;
};

struct SimConfig {
  std::size_t n_probes = 1000;
  double base_power = -80.0;   // dBm
  double shadow_sigma = 6.0;   // dB, ignored when diversity_profile is set
  double shadow_phi = 0.9;     // AR(1) coefficient, in [0, 1)
  double noise_sigma = 1.0;    // per-party measurement noise, dB
  double loss_prob = 0.0;      // per-direction packet loss probability
  std::uint64_t seed = 1;
  std::vector<ShadowSegment> diversity_profile;  // optional sigma schedule

  void validate() const;
};

struct SimulatedSession {
  ProbeSession session;
  RssiTrace eve;  // independent observer channel, no losses
};

/// Reads a trace from CSV (`index,rssi_dbm` header). Throws ParseError with
/// the offending line number on malformed rows, ValidationError on duplicate
/// or non-increasing indices.
RssiTrace load_trace(const std::filesystem::path& path, std::string party = "");

/// Writes the CSV format accepted by load_trace (LF line endings).
void save_trace(const std::filesystem::path& path, const RssiTrace& trace);

/// Restricts both traces to the common index set minus all lost indices,
/// preserving order. Throws ValidationError when nothing survives.
ProbeSession align(const ProbeSession& session);

/// Synthesizes a reciprocal-channel probing session: a shared AR(1)
/// log-shadowing component plus independent per-party Gaussian noise,
/// integer-rounded like LoRa RSSI reports. Eve observes an independently
/// drawn shadowing process. Deterministic for a fixed seed.
SimulatedSession simulate(const SimConfig& config);

}  // namespace aqkg
