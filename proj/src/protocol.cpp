#include "aqkg/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aqkg/complexity.hpp"

namespace aqkg {
namespace {

constexpr std::uint8_t kTagLost = 1;
constexpr std::uint8_t kTagQuantParams = 2;
constexpr std::uint8_t kTagDropped = 3;
constexpr std::uint8_t kTagRecon = 4;
constexpr std::uint8_t kTagIrc = 5;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8)
    out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t& off) {
  if (off + 4 > in.size()) throw ParseError("transcript record truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | in[off++];
  return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t& off) {
  if (off + 8 > in.size()) throw ParseError("transcript record truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in[off++];
  return v;
}

std::vector<std::uint8_t> encode_message(const Message& msg) {
  std::vector<std::uint8_t> out;
  std::visit(
      [&out](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LostIndicesMsg>) {
          out.push_back(kTagLost);
          put_u32(out, static_cast<std::uint32_t>(m.indices.size()));
          for (auto idx : m.indices) put_u64(out, static_cast<std::uint64_t>(idx));
        } else if constexpr (std::is_same_v<T, QuantParamsMsg>) {
          out.push_back(kTagQuantParams);
          put_u32(out, m.block_id);
          out.push_back(m.m);
          std::uint64_t alpha_bits = 0;
          static_assert(sizeof(double) == 8);
          std::memcpy(&alpha_bits, &m.alpha, 8);
          put_u64(out, alpha_bits);
        } else if constexpr (std::is_same_v<T, DroppedIndicesMsg>) {
          out.push_back(kTagDropped);
          put_u32(out, m.block_id);
          put_u32(out, static_cast<std::uint32_t>(m.indices.size()));
          for (auto idx : m.indices) put_u64(out, static_cast<std::uint64_t>(idx));
        } else if constexpr (std::is_same_v<T, ReconMessage>) {
          out.push_back(kTagRecon);
          const auto payload = serialize_recon(m);
          out.insert(out.end(), payload.begin(), payload.end());
        } else if constexpr (std::is_same_v<T, IrcMsg>) {
          out.push_back(kTagIrc);
          put_u32(out, m.block_id);
          out.push_back(m.flag);
        }
      },
      msg);
  return out;
}

Message decode_message(std::span<const std::uint8_t> payload) {
  if (payload.empty()) throw ParseError("empty transcript record");
  std::size_t off = 1;
  switch (payload[0]) {
    case kTagLost: {
      LostIndicesMsg m;
      const auto count = get_u32(payload, off);
      for (std::uint32_t i = 0; i < count; ++i)
        m.indices.push_back(static_cast<std::int64_t>(get_u64(payload, off)));
      return m;
    }
    case kTagQuantParams: {
      QuantParamsMsg m;
      m.block_id = get_u32(payload, off);
      if (off >= payload.size()) throw ParseError("transcript record truncated");
      m.m = payload[off++];
      const std::uint64_t alpha_bits = get_u64(payload, off);
      std::memcpy(&m.alpha, &alpha_bits, 8);
      return m;
    }
    case kTagDropped: {
      DroppedIndicesMsg m;
      m.block_id = get_u32(payload, off);
      const auto count = get_u32(payload, off);
      for (std::uint32_t i = 0; i < count; ++i)
        m.indices.push_back(static_cast<std::int64_t>(get_u64(payload, off)));
      return m;
    }
    case kTagRecon:
      return parse_recon(payload.subspan(1));
    case kTagIrc: {
      IrcMsg m;
      m.block_id = get_u32(payload, off);
      if (off >= payload.size()) throw ParseError("transcript record truncated");
      m.flag = payload[off];
      return m;
    }
    default:
      throw ParseError("unknown transcript message tag " + std::to_string(payload[0]));
  }
}

}  // namespace

void write_transcript(std::ostream& out, const Transcript& transcript) {
  for (const auto& [dir, msg] : transcript.entries) {
    const auto payload = encode_message(msg);
    std::vector<std::uint8_t> record;
    put_u32(record, static_cast<std::uint32_t>(payload.size() + 1));
    record.push_back(static_cast<std::uint8_t>(dir));
    record.insert(record.end(), payload.begin(), payload.end());
    out.write(reinterpret_cast<const char*>(record.data()),
              static_cast<std::streamsize>(record.size()));
  }
}

Transcript read_transcript(std::istream& in) {
  Transcript transcript;
  for (;;) {
    std::uint8_t len_bytes[4];
    in.read(reinterpret_cast<char*>(len_bytes), 4);
    if (in.gcount() == 0 && in.eof()) break;
    if (in.gcount() != 4) throw ParseError("transcript truncated in length prefix");
    const std::uint32_t len = (std::uint32_t{len_bytes[0]} << 24) |
                              (std::uint32_t{len_bytes[1]} << 16) |
                              (std::uint32_t{len_bytes[2]} << 8) | len_bytes[3];
    if (len < 2) throw ParseError("transcript record too short");
    std::vector<std::uint8_t> record(len);
    in.read(reinterpret_cast<char*>(record.data()), len);
    if (static_cast<std::uint32_t>(in.gcount()) != len)
      throw ParseError("transcript truncated in record body");
    const auto dir = static_cast<Direction>(record[0]);
    transcript.entries.emplace_back(dir,
                                    decode_message(std::span(record).subspan(1)));
  }
  return transcript;
}

void save_transcript(const std::filesystem::path& path, const Transcript& transcript) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write transcript: " + path.string());
  write_transcript(out, transcript);
  if (!out) throw IoError("write failed: " + path.string());
}

Transcript load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open transcript: " + path.string());
  return read_transcript(in);
}

namespace {

/// Alice's per-session state: her trace and the selector model. Bob's: his
/// trace and the codeword RNG. All cross-party data flows through Messages
/// recorded in the transcript.
struct RecordingChannel {
  Transcript* transcript;
  void send(Direction dir, Message msg) { transcript->entries.emplace_back(dir, std::move(msg)); }
};

using BlockSpanPair = std::pair<std::span<const RssiSample>, std::span<const RssiSample>>;

std::vector<BlockSpanPair> diversity_blocks_spans(const ProbeSession& aligned,
                                                  std::size_t len) {
  std::vector<BlockSpanPair> blocks;
  const std::span<const RssiSample> a(aligned.trace_a.samples);
  const std::span<const RssiSample> b(aligned.trace_b.samples);
  for (std::size_t off = 0; off + len <= a.size(); off += len)
    blocks.emplace_back(a.subspan(off, len), b.subspan(off, len));
  return blocks;
}

std::set<std::int64_t> excluded_indices(const RssiTrace& own, const ProbeSession& session) {
  // Everything the peer might have probed that this party cannot use.
  std::set<std::int64_t> all;
  for (const auto& s : session.trace_a.samples) all.insert(s.index);
  for (const auto& s : session.trace_b.samples) all.insert(s.index);
  all.insert(session.lost_a.begin(), session.lost_a.end());
  all.insert(session.lost_b.begin(), session.lost_b.end());

  std::set<std::int64_t> own_set;
  for (const auto& s : own.samples) own_set.insert(s.index);

  std::set<std::int64_t> excluded;
  for (auto idx : all)
    if (!own_set.contains(idx)) excluded.insert(idx);
  return excluded;
}

}  // namespace

SessionReport run_session(const ProbeSession& session, const AdaptiveModel& model,
                          const CalibrationPolicy& policy, std::uint64_t seed,
                          const BlockLengths& lengths) {
  model.validate();
  policy.validate();
  lengths.validate();

  SessionReport report;
  RecordingChannel channel{&report.transcript};

  // Lost-packet exchange, then alignment on both sides.
  auto lost_a = excluded_indices(session.trace_a, session);
  lost_a.insert(session.lost_a.begin(), session.lost_a.end());
  auto lost_b = excluded_indices(session.trace_b, session);
  lost_b.insert(session.lost_b.begin(), session.lost_b.end());
  channel.send(Direction::kAliceToBob,
               LostIndicesMsg{{lost_a.begin(), lost_a.end()}});
  channel.send(Direction::kBobToAlice,
               LostIndicesMsg{{lost_b.begin(), lost_b.end()}});

  ProbeSession to_align = session;
  to_align.lost_a = lost_a;
  to_align.lost_b = lost_b;
  const ProbeSession aligned = align(to_align);

  const auto blocks = diversity_blocks_spans(aligned, lengths.diversity);
  if (blocks.empty())
    throw ValidationError("session too short for a single diversity block");

  std::mt19937_64 bob_rng(seed);
  const BchCode& code = BchCode::standard();

  PrivacyAmplifier amp_a;
  PrivacyAmplifier amp_b;
  std::uint64_t disagreements = 0;
  std::uint64_t compared_bits = 0;

  for (std::uint32_t block_id = 0; block_id < blocks.size(); ++block_id) {
    const auto [span_a, span_b] = blocks[block_id];

    // Alice: complexity of her own samples -> (m, alpha), shared with Bob.
    std::vector<int> values_a;
    values_a.reserve(span_a.size());
    for (const auto& s : span_a) values_a.push_back(s.value);
    const double c = normalized_complexity(values_a, lengths.diversity);
    const auto [m, alpha] = select_params(c, model);
    channel.send(Direction::kAliceToBob,
                 QuantParamsMsg{block_id, static_cast<std::uint8_t>(m), alpha});

    const QuantParams params{m, alpha, lengths.for_level(m)};
    const auto outcome =
        reconcile_with_calibration(span_a, span_b, params, policy, code, bob_rng, block_id);

    for (const auto& attempt : outcome.attempts) {
      channel.send(Direction::kAliceToBob, DroppedIndicesMsg{block_id, attempt.dropped_a});
      channel.send(Direction::kBobToAlice, DroppedIndicesMsg{block_id, attempt.dropped_b});
      for (const auto& recon : attempt.recons)
        channel.send(Direction::kBobToAlice, recon);
      if (attempt.irc) channel.send(Direction::kAliceToBob, IrcMsg{block_id, attempt.irc->flag});
    }

    BlockReport block_report;
    block_report.block_id = block_id;
    block_report.c = c;
    block_report.m = m;
    block_report.alpha_selected = alpha;
    block_report.alpha_final = outcome.attempts.back().alpha;
    block_report.agreed = outcome.agreed;
    block_report.calibrations_used = outcome.calibrations_used;
    block_report.key_bits = outcome.agreed_bits.size();
    block_report.merged_a = outcome.attempts.back().merged_a;
    block_report.merged_b = outcome.attempts.back().merged_b;
    report.blocks.push_back(std::move(block_report));

    if (!report.blocks.back().merged_a.empty()) {
      compared_bits += report.blocks.back().merged_a.size();
      for (std::size_t i = 0; i < report.blocks.back().merged_a.size(); ++i)
        disagreements +=
            (report.blocks.back().merged_a[i] ^ report.blocks.back().merged_b[i]) & 1u;
    }

    if (outcome.agreed) {
      amp_a.absorb(outcome.agreed_bits);
      // Bob keeps his own merged bits; the CRC check certifies they equal
      // Alice's corrected key.
      amp_b.absorb(outcome.attempts.back().merged_b);
      report.reconciled_a.insert(report.reconciled_a.end(), outcome.agreed_bits.begin(),
                                 outcome.agreed_bits.end());
      const auto& bob_bits = outcome.attempts.back().merged_b;
      report.reconciled_b.insert(report.reconciled_b.end(), bob_bits.begin(), bob_bits.end());
      report.metrics.n_key += outcome.agreed_bits.size();
    }
  }

  report.keys_a = amp_a.drain();
  report.keys_b = amp_b.drain();

  report.metrics.n_rssi = blocks.size() * lengths.diversity;
  report.metrics.kgr = kgr(report.metrics.n_key, report.metrics.n_rssi);
  report.metrics.kdr =
      compared_bits == 0 ? 0.0
                         : static_cast<double>(disagreements) / static_cast<double>(compared_bits);

  // Randomness of the generated keys: every 128-bit sequence of the final
  // amplified key material.
  std::vector<Bits> sequences;
  Bits key_bits;
  for (const auto& key : report.keys_a)
    for (auto byte : key)
      for (int b = 7; b >= 0; --b) key_bits.push_back((byte >> b) & 1u);
  for (std::size_t off = 0; off + 128 <= key_bits.size(); off += 128)
    sequences.emplace_back(key_bits.begin() + off, key_bits.begin() + off + 128);
  report.metrics.n_ks = sequences.size();
  if (!sequences.empty()) {
    std::size_t failures = 0;
    for (const auto& seq : sequences)
      if (!nist_suite(seq).all_pass()) ++failures;
    report.metrics.n_f = failures;
    report.metrics.nfr = static_cast<double>(failures) / static_cast<double>(sequences.size());
  }
  return report;
}

namespace {

struct ParsedAttempt {
  std::set<std::int64_t> dropped_union;
  std::vector<ReconMessage> recons;
  std::optional<std::uint8_t> irc;
};

struct ParsedBlock {
  std::uint32_t id = 0;
  int m = 2;
  double alpha0 = 0.0;
  std::vector<ParsedAttempt> attempts;
};

struct ParsedTranscript {
  std::set<std::int64_t> excluded;  // union of both parties' lost messages
  std::vector<ParsedBlock> blocks;
};

ParsedTranscript parse_session_transcript(const Transcript& transcript) {
  ParsedTranscript out;
  for (const auto& [dir, msg] : transcript.entries) {
    if (const auto* lost = std::get_if<LostIndicesMsg>(&msg)) {
      out.excluded.insert(lost->indices.begin(), lost->indices.end());
    } else if (const auto* params = std::get_if<QuantParamsMsg>(&msg)) {
      ParsedBlock block;
      block.id = params->block_id;
      block.m = params->m;
      block.alpha0 = params->alpha;
      out.blocks.push_back(std::move(block));
    } else if (const auto* dropped = std::get_if<DroppedIndicesMsg>(&msg)) {
      if (out.blocks.empty()) throw ParseError("dropped-index message before any block");
      auto& block = out.blocks.back();
      if (dir == Direction::kAliceToBob) block.attempts.emplace_back();
      if (block.attempts.empty()) throw ParseError("peer drop message before Alice's");
      block.attempts.back().dropped_union.insert(dropped->indices.begin(),
                                                 dropped->indices.end());
    } else if (const auto* recon = std::get_if<ReconMessage>(&msg)) {
      if (out.blocks.empty() || out.blocks.back().attempts.empty())
        throw ParseError("recon message outside an attempt");
      out.blocks.back().attempts.back().recons.push_back(*recon);
    } else if (const auto* irc = std::get_if<IrcMsg>(&msg)) {
      if (out.blocks.empty() || out.blocks.back().attempts.empty())
        throw ParseError("IRC message outside an attempt");
      out.blocks.back().attempts.back().irc = irc->flag;
    }
  }
  return out;
}

double attempt_alpha(double alpha0, std::size_t attempt_index, const CalibrationPolicy& policy) {
  return std::min(alpha0 + static_cast<double>(attempt_index) * policy.delta_alpha, kAlphaMax);
}

/// A party's merged quantizer bits for one parsed attempt (its own key group
/// provenance, the transcript's public dropped union).
BitKey replay_attempt(std::span<const RssiSample> samples, const ParsedBlock& block,
                      const ParsedAttempt& attempt, double alpha,
                      const BlockLengths& lengths) {
  const QuantParams params{block.m, alpha, lengths.for_level(block.m)};
  const auto quantized = quantize_diversity_block(samples, params);
  std::set<std::int64_t> dropped = attempt.dropped_union;
  dropped.insert(quantized.dropped.begin(), quantized.dropped.end());
  return merge_drops(quantized.key, dropped);
}

}  // namespace

std::vector<Bits> replay_block_bits(const RssiTrace& trace, const Transcript& transcript,
                                    const CalibrationPolicy& policy,
                                    const BlockLengths& lengths) {
  const auto parsed = parse_session_transcript(transcript);

  std::vector<RssiSample> aligned;
  aligned.reserve(trace.samples.size());
  for (const auto& s : trace.samples)
    if (!parsed.excluded.contains(s.index)) aligned.push_back(s);

  std::vector<Bits> out;
  for (const auto& block : parsed.blocks) {
    const std::size_t off = static_cast<std::size_t>(block.id) * lengths.diversity;
    if (off + lengths.diversity > aligned.size() || block.attempts.empty()) {
      out.emplace_back();
      continue;
    }
    const std::span<const RssiSample> samples(aligned.data() + off, lengths.diversity);
    const std::size_t last = block.attempts.size() - 1;
    out.push_back(
        replay_attempt(samples, block, block.attempts[last],
                       attempt_alpha(block.alpha0, last, policy), lengths)
            .bits);
  }
  return out;
}

ReplayResult replay_bob(const RssiTrace& trace_b, const Transcript& transcript,
                        const CalibrationPolicy& policy, const BlockLengths& lengths) {
  const auto parsed = parse_session_transcript(transcript);
  const auto per_block = replay_block_bits(trace_b, transcript, policy, lengths);

  ReplayResult result;
  PrivacyAmplifier amp;
  for (std::size_t i = 0; i < parsed.blocks.size(); ++i) {
    const auto& attempts = parsed.blocks[i].attempts;
    if (attempts.empty() || !attempts.back().irc || attempts.back().irc != 1) continue;
    amp.absorb(per_block[i]);
    result.reconciled.insert(result.reconciled.end(), per_block[i].begin(),
                             per_block[i].end());
  }
  result.keys = amp.drain();
  return result;
}

EveReport eavesdrop_report(const SessionReport& report, const RssiTrace& eve_trace,
                           const AdaptiveModel& /*model*/, const CalibrationPolicy& policy,
                           const BlockLengths& lengths) {
  const auto parsed = parse_session_transcript(report.transcript);
  const auto eve_bits = replay_block_bits(eve_trace, report.transcript, policy, lengths);

  EveReport out;
  std::size_t disagreements = 0;
  const BchCode& code = BchCode::standard();

  for (std::size_t i = 0; i < parsed.blocks.size() && i < report.blocks.size(); ++i) {
    const auto& bob = report.blocks[i].merged_b;
    const auto& eve = eve_bits[i];
    if (bob.empty() || eve.size() != bob.size()) continue;  // nothing comparable

    ++out.blocks_compared;
    out.bits_compared += bob.size();
    for (std::size_t j = 0; j < bob.size(); ++j) disagreements += (bob[j] ^ eve[j]) & 1u;

    // Can Eve pass the agreement check with her own measurements?
    const auto& attempts = parsed.blocks[i].attempts;
    if (attempts.empty() || attempts.back().recons.empty()) continue;
    bool all_pass = true;
    const std::size_t n = static_cast<std::size_t>(code.n());
    for (std::size_t c = 0; c < attempts.back().recons.size() && all_pass; ++c) {
      BitKey chunk;
      chunk.bits_per_group = 1;
      const std::size_t off = c * n;
      if (off >= eve.size()) {
        all_pass = false;
        break;
      }
      const std::size_t len = std::min(n, eve.size() - off);
      chunk.bits.assign(eve.begin() + off, eve.begin() + off + len);
      chunk.source_indices.resize(len, 0);
      all_pass = correct(chunk, attempts.back().recons[c], code).irc;
    }
    if (all_pass) ++out.crc_passes;
  }
  out.kdr_vs_bob = out.bits_compared == 0
                       ? 0.0
                       : static_cast<double>(disagreements) /
                             static_cast<double>(out.bits_compared);

  // Structural scan: every entry must be one of the protocol variants (the
  // parse above enforces that), and no masked string may equal Bob's raw
  // key bits for its block.
  for (std::size_t i = 0; i < parsed.blocks.size() && i < report.blocks.size(); ++i) {
    const auto& bob = report.blocks[i].merged_b;
    for (const auto& attempt : parsed.blocks[i].attempts) {
      for (const auto& recon : attempt.recons) {
        if (bob.empty()) continue;
        bool equal = bob.size() <= recon.s.size();
        for (std::size_t j = 0; equal && j < bob.size(); ++j)
          equal = recon.s[j] == bob[j];
        if (equal) out.transcript_clean = false;
      }
    }
  }
  return out;
}

std::string report_to_json(const SessionReport& report) {
  nlohmann::json j;
  j["metrics"] = {{"n_rssi", report.metrics.n_rssi}, {"n_key", report.metrics.n_key},
                  {"kgr", report.metrics.kgr},       {"kdr", report.metrics.kdr},
                  {"n_ks", report.metrics.n_ks},     {"n_f", report.metrics.n_f},
                  {"nfr", report.metrics.nfr}};
  j["final_keys"] = report.keys_a.size();
  j["transcript_messages"] = report.transcript.size();
  j["blocks"] = nlohmann::json::array();
  for (const auto& b : report.blocks) {
    j["blocks"].push_back({{"block_id", b.block_id},
                           {"complexity", b.c},
                           {"m", b.m},
                           {"alpha_selected", b.alpha_selected},
                           {"alpha_final", b.alpha_final},
                           {"agreed", b.agreed},
                           {"calibrations_used", b.calibrations_used},
                           {"key_bits", b.key_bits}});
  }
  return j.dump(2) + "\n";
}

}  // namespace aqkg
