#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <variant>
#include <vector>

#include "aqkg/randomness.hpp"
#include "aqkg/reconciliation.hpp"
#include "aqkg/selector.hpp"
#include "aqkg/traces.hpp"

namespace aqkg {

/// Public protocol messages. None of them carries RSSI values; the only
/// key-derived payload is the masked string inside ReconMessage.
struct LostIndicesMsg {
  std::vector<std::int64_t> indices;  // probe indices the sender excludes
};
struct QuantParamsMsg {
  std::uint32_t block_id = 0;
  std::uint8_t m = 2;
  double alpha = 0.0;
};
struct DroppedIndicesMsg {
  std::uint32_t block_id = 0;
  std::vector<std::int64_t> indices;
};
struct IrcMsg {
  std::uint32_t block_id = 0;
  std::uint8_t flag = 0;
};

using Message = std::variant<LostIndicesMsg, QuantParamsMsg, DroppedIndicesMsg, ReconMessage,
                             IrcMsg>;

enum class Direction : std::uint8_t { kAliceToBob = 0, kBobToAlice = 1 };

struct Transcript {
  std::vector<std::pair<Direction, Message>> entries;

  std::size_t size() const { return entries.size(); }
};

/// Length-prefixed binary records; ReconMessage uses the reconciliation wire
/// layout, other messages a tag byte plus big-endian fields.
void write_transcript(std::ostream& out, const Transcript& transcript);
Transcript read_transcript(std::istream& in);
void save_transcript(const std::filesystem::path& path, const Transcript& transcript);
Transcript load_transcript(const std::filesystem::path& path);

struct BlockReport {
  std::uint32_t block_id = 0;
  double c = 0.0;           // Alice's normalized complexity
  int m = 0;
  double alpha_selected = 0.0;
  double alpha_final = 0.0;
  bool agreed = false;
  int calibrations_used = 0;
  std::size_t key_bits = 0;
  Bits merged_a;  // final-attempt quantizer outputs (pre-reconciliation)
  Bits merged_b;
};

struct SessionReport {
  std::vector<Digest256> keys_a;  // 256-bit final keys after amplification
  std::vector<Digest256> keys_b;
  Bits reconciled_a;  // agreed bits before amplification
  Bits reconciled_b;
  std::vector<BlockReport> blocks;
  MetricReport metrics;
  Transcript transcript;
};

/// Executes the full protocol over an in-process channel: align, per-block
/// parameter selection by Alice, quantization with dropped-index exchange,
/// BCH reconciliation with guard band calibration, and SHA-256 privacy
/// amplification. Deterministic for a fixed seed (Bob's codeword draws).
SessionReport run_session(const ProbeSession& session, const AdaptiveModel& model,
                          const CalibrationPolicy& policy, std::uint64_t seed = 1,
                          const BlockLengths& lengths = {});

/// Reconstructs one party's final-attempt quantizer bits per block from only
/// that party's trace plus the public transcript (dropped-index unions, m,
/// alpha schedule). Used for replay determinism checks and the eavesdropper.
std::vector<Bits> replay_block_bits(const RssiTrace& trace, const Transcript& transcript,
                                    const CalibrationPolicy& policy,
                                    const BlockLengths& lengths = {});

/// Bob's full replay: his agreed blocks (per transcript IRCs) and amplified
/// keys, recomputed from (his trace, transcript) alone.
struct ReplayResult {
  Bits reconciled;
  std::vector<Digest256> keys;
};
ReplayResult replay_bob(const RssiTrace& trace_b, const Transcript& transcript,
                        const CalibrationPolicy& policy, const BlockLengths& lengths = {});

struct EveReport {
  double kdr_vs_bob = 0.0;      // pre-reconciliation disagreement vs Bob
  std::size_t bits_compared = 0;
  std::size_t blocks_compared = 0;
  std::size_t crc_passes = 0;   // Eve blocks passing the agreement check
  bool transcript_clean = true;  // structural scan result
};

/// Passive eavesdropper replay: Eve applies the transcript's public
/// parameters to her own trace and tries to reproduce Bob's keys. The model
/// parameter is unused (all quantization parameters are public in the
/// transcript) and kept for interface symmetry.
EveReport eavesdrop_report(const SessionReport& report, const RssiTrace& eve_trace,
                           const AdaptiveModel& model, const CalibrationPolicy& policy,
                           const BlockLengths& lengths = {});

/// JSON session summary (metrics + per-block outcomes; no key material).
std::string report_to_json(const SessionReport& report);

}  // namespace aqkg
