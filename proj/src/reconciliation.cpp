#include "aqkg/reconciliation.hpp"

#include <algorithm>
#include <string>

namespace aqkg {
namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t off) {
  return (static_cast<std::uint32_t>(in[off]) << 24) |
         (static_cast<std::uint32_t>(in[off + 1]) << 16) |
         (static_cast<std::uint32_t>(in[off + 2]) << 8) |
         static_cast<std::uint32_t>(in[off + 3]);
}

Bits random_message_bits(int k, std::mt19937_64& rng) {
  Bits msg(k);
  const std::uint64_t word = rng();
  for (int i = 0; i < k; ++i) msg[i] = static_cast<std::uint8_t>((word >> i) & 1u);
  return msg;
}

}  // namespace

void CalibrationPolicy::validate() const {
  if (delta_alpha <= 0) throw ValidationError("delta_alpha must be positive");
  if (max_calibrations < 0) throw ValidationError("max_calibrations must be non-negative");
}

std::optional<ReconMessage> make_recon_message(const BitKey& key_b, const BchCode& code,
                                               std::mt19937_64& rng, std::uint32_t block_id) {
  if (key_b.empty()) return std::nullopt;
  const std::size_t n = static_cast<std::size_t>(code.n());
  if (key_b.bits.size() > n)
    throw ValidationError("key exceeds one codeword; use make_recon_messages");

  const Bits codeword = code.encode(random_message_bits(code.k(), rng));

  ReconMessage msg;
  msg.block_id = block_id;
  msg.s.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t key_bit = i < key_b.bits.size() ? key_b.bits[i] : 0;  // tail padding
    msg.s[i] = key_bit ^ codeword[i];
  }
  msg.crc = crc32_bits(key_b.bits);
  return msg;
}

std::vector<ReconMessage> make_recon_messages(const BitKey& key_b, const BchCode& code,
                                              std::mt19937_64& rng,
                                              std::uint32_t first_block_id) {
  std::vector<ReconMessage> out;
  const std::size_t n = static_cast<std::size_t>(code.n());
  for (std::size_t off = 0; off < key_b.bits.size(); off += n) {
    BitKey chunk;
    chunk.bits_per_group = 1;
    const std::size_t len = std::min(n, key_b.bits.size() - off);
    chunk.bits.assign(key_b.bits.begin() + off, key_b.bits.begin() + off + len);
    chunk.source_indices.resize(len, 0);
    auto msg = make_recon_message(chunk, code, rng,
                                  first_block_id + static_cast<std::uint32_t>(off / n));
    out.push_back(std::move(*msg));
  }
  return out;
}

CorrectionOutcome correct(const BitKey& key_a, const ReconMessage& msg, const BchCode& code) {
  const std::size_t n = static_cast<std::size_t>(code.n());
  if (msg.s.size() != n) throw ValidationError("masking string must be n bits");
  if (key_a.bits.size() > n)
    throw ValidationError("key exceeds one codeword; reconcile per chunk");

  Bits received(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t key_bit = i < key_a.bits.size() ? key_a.bits[i] : 0;
    received[i] = key_bit ^ msg.s[i];
  }

  CorrectionOutcome out;
  const auto decoded = code.decode(received);
  if (!decoded) return out;

  Bits corrected(key_a.bits.size());
  for (std::size_t i = 0; i < corrected.size(); ++i) corrected[i] = (*decoded)[i] ^ msg.s[i];
  if (crc32_bits(corrected) != msg.crc) return out;

  out.key = std::move(corrected);
  out.irc = true;
  return out;
}

std::vector<std::uint8_t> serialize_recon(const ReconMessage& msg) {
  std::vector<std::uint8_t> out;
  put_u32(out, msg.block_id);
  put_u16(out, static_cast<std::uint16_t>(msg.s.size()));
  const auto packed = pack_bits_msb(msg.s);
  out.insert(out.end(), packed.begin(), packed.end());
  put_u32(out, msg.crc);
  return out;
}

ReconMessage parse_recon(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 10) throw ParseError("recon record truncated");
  ReconMessage msg;
  msg.block_id = get_u32(bytes, 0);
  const std::size_t n_bits = (static_cast<std::size_t>(bytes[4]) << 8) | bytes[5];
  const std::size_t n_bytes = (n_bits + 7) / 8;
  if (bytes.size() != 6 + n_bytes + 4) throw ParseError("recon record length mismatch");
  msg.s = unpack_bits_msb(bytes.subspan(6, n_bytes), n_bits);
  msg.crc = get_u32(bytes, 6 + n_bytes);
  return msg;
}

std::vector<std::uint8_t> pack_bits_msb(std::span<const std::uint8_t> bits) {
  std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i] & 1u) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  return out;
}

Bits unpack_bits_msb(std::span<const std::uint8_t> bytes, std::size_t n_bits) {
  if (bytes.size() * 8 < n_bits) throw ParseError("bit buffer shorter than declared length");
  Bits out(n_bits);
  for (std::size_t i = 0; i < n_bits; ++i)
    out[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
  return out;
}

void PrivacyAmplifier::absorb(std::span<const std::uint8_t> bits) {
  buffer_.insert(buffer_.end(), bits.begin(), bits.end());
}

std::vector<Digest256> PrivacyAmplifier::drain() {
  constexpr std::size_t kChunkBits = 512;
  std::vector<Digest256> keys;
  std::size_t off = 0;
  while (buffer_.size() - off >= kChunkBits) {
    const auto chunk = pack_bits_msb(std::span(buffer_).subspan(off, kChunkBits));
    keys.push_back(sha256(chunk));
    off += kChunkBits;
  }
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(off));
  return keys;
}

BlockOutcome reconcile_with_calibration(std::span<const RssiSample> block_a,
                                        std::span<const RssiSample> block_b,
                                        const QuantParams& params,
                                        const CalibrationPolicy& policy, const BchCode& code,
                                        std::mt19937_64& bob_rng, std::uint32_t block_id) {
  params.validate();
  policy.validate();

  BlockOutcome outcome;
  for (int attempt = 0; attempt <= policy.max_calibrations; ++attempt) {
    QuantParams p = params;
    p.alpha = std::min(params.alpha + attempt * policy.delta_alpha, kAlphaMax);

    const auto qa = quantize_diversity_block(block_a, p);
    const auto qb = quantize_diversity_block(block_b, p);

    std::set<std::int64_t> union_dropped(qa.dropped.begin(), qa.dropped.end());
    union_dropped.insert(qb.dropped.begin(), qb.dropped.end());
    const BitKey merged_a = merge_drops(qa.key, union_dropped);
    const BitKey merged_b = merge_drops(qb.key, union_dropped);

    BlockAttempt trail;
    trail.alpha = p.alpha;
    trail.dropped_a = qa.dropped;
    trail.dropped_b = qb.dropped;
    trail.merged_a = merged_a.bits;
    trail.merged_b = merged_b.bits;

    if (merged_b.empty()) {
      outcome.attempts.push_back(std::move(trail));
      outcome.calibrations_used = attempt;
      break;  // nothing left to reconcile; more guard band cannot help
    }

    // One codeword per diversity block with the default lengths; longer
    // merged keys are reconciled chunk-wise and agree only if every chunk
    // passes its CRC.
    trail.recons = make_recon_messages(merged_b, code, bob_rng, block_id);
    const std::size_t n = static_cast<std::size_t>(code.n());
    Bits recovered;
    bool all_agreed = true;
    for (std::size_t c = 0; c < trail.recons.size(); ++c) {
      BitKey chunk_a;
      chunk_a.bits_per_group = 1;
      const std::size_t off = c * n;
      const std::size_t len = std::min(n, merged_a.bits.size() - off);
      chunk_a.bits.assign(merged_a.bits.begin() + off, merged_a.bits.begin() + off + len);
      chunk_a.source_indices.resize(len, 0);
      const auto corrected = correct(chunk_a, trail.recons[c], code);
      if (!corrected.irc) {
        all_agreed = false;
        break;
      }
      recovered.insert(recovered.end(), corrected.key.begin(), corrected.key.end());
    }
    trail.irc = Irc{block_id, static_cast<std::uint8_t>(all_agreed ? 1 : 0)};
    outcome.attempts.push_back(std::move(trail));
    outcome.calibrations_used = attempt;

    if (all_agreed) {
      outcome.agreed = true;
      outcome.agreed_bits = std::move(recovered);
      break;
    }
  }
  return outcome;
}

}  // namespace aqkg
