#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "aqkg/bch.hpp"
#include "aqkg/crc32.hpp"
#include "aqkg/quantizer.hpp"
#include "aqkg/sha256.hpp"

namespace aqkg {

/// Public reconciliation payload for one diversity block: the key masked by
/// a random codeword plus a CRC of the unmasked key for the agreement check.
struct ReconMessage {
  std::uint32_t block_id = 0;
  Bits s;                  // n-bit masking string, key XOR codeword
  std::uint32_t crc = 0;   // CRC-32 of the (unpadded) key bits

  friend bool operator==(const ReconMessage&, const ReconMessage&) = default;
};

struct Irc {
  std::uint32_t block_id = 0;
  std::uint8_t flag = 0;  // 1 = keys agree
};

struct CalibrationPolicy {
  double delta_alpha = 0.2;
  int max_calibrations = 2;

  void validate() const;
};

/// Bob's side: draws a random codeword c, masks the zero-padded key and
/// attaches the agreement CRC. Returns nullopt for an empty key (the block
/// is skipped). Keys longer than n bits must go through
/// make_recon_messages.
std::optional<ReconMessage> make_recon_message(const BitKey& key_b, const BchCode& code,
                                               std::mt19937_64& rng,
                                               std::uint32_t block_id = 0);

/// Splits an arbitrarily long key into codeword-sized chunks (the last one
/// zero-padded) and produces one message per chunk.
std::vector<ReconMessage> make_recon_messages(const BitKey& key_b, const BchCode& code,
                                              std::mt19937_64& rng,
                                              std::uint32_t first_block_id = 0);

struct CorrectionOutcome {
  Bits key;       // corrected key bits, valid only when irc == 1
  bool irc = false;
};

/// Alice's side: unmasks with her own key, decodes the resulting
/// codeword-plus-error word, and accepts only when the decoded key passes
/// the CRC agreement check.
CorrectionOutcome correct(const BitKey& key_a, const ReconMessage& msg, const BchCode& code);

/// Normative wire layout (big-endian): block_id u32, bit-length u16,
/// MSB-first packed s bytes, crc u32.
std::vector<std::uint8_t> serialize_recon(const ReconMessage& msg);
ReconMessage parse_recon(std::span<const std::uint8_t> bytes);

/// MSB-first bit packing helpers shared by the wire format and hashing.
std::vector<std::uint8_t> pack_bits_msb(std::span<const std::uint8_t> bits);
Bits unpack_bits_msb(std::span<const std::uint8_t> bytes, std::size_t n_bits);

/// Privacy amplification: consumes reconciled bits, emitting one SHA-256
/// digest per disjoint 512-bit chunk; the tail shorter than 512 bits stays
/// buffered for the next session.
class PrivacyAmplifier {
 public:
  void absorb(std::span<const std::uint8_t> bits);
  std::vector<Digest256> drain();
  const Bits& leftover() const { return buffer_; }

 private:
  Bits buffer_;
};

/// One reconciliation attempt within a block: everything the two parties
/// exchanged plus their merged (post union-drop) quantizer outputs.
struct BlockAttempt {
  double alpha = 0.0;
  std::vector<std::int64_t> dropped_a;
  std::vector<std::int64_t> dropped_b;
  std::vector<ReconMessage> recons;  // empty when the merged key was empty;
                                     // one per codeword chunk otherwise
  std::optional<Irc> irc;
  Bits merged_a;
  Bits merged_b;
};

struct BlockOutcome {
  bool agreed = false;
  int calibrations_used = 0;
  Bits agreed_bits;  // identical at both parties when agreed
  std::vector<BlockAttempt> attempts;
};

/// Runs quantize -> dropped-index exchange -> BCH reconciliation for one
/// diversity block, increasing alpha by policy.delta_alpha (capped at
/// kAlphaMax) after each failed agreement check, up to
/// policy.max_calibrations extra rounds. A block whose merged key comes out
/// empty is dropped immediately: larger guard bands can only shrink it
/// further.
BlockOutcome reconcile_with_calibration(std::span<const RssiSample> block_a,
                                        std::span<const RssiSample> block_b,
                                        const QuantParams& params,
                                        const CalibrationPolicy& policy, const BchCode& code,
                                        std::mt19937_64& bob_rng, std::uint32_t block_id = 0);

}  // namespace aqkg
