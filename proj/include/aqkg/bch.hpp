#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aqkg/errors.hpp"

namespace aqkg {

using Bits = std::vector<std::uint8_t>;

/// Binary primitive BCH code of length 127 over GF(2^7), primitive
/// polynomial x^7 + x^3 + 1. The generator polynomial is the LCM of the
/// minimal polynomials of alpha^1..alpha^2t, so any error pattern of weight
/// <= t is corrected. The default instance is (n, k, t) = (127, 15, 27),
/// whose 27/127 > 20% correction radius covers the target key-disagreement
/// budget while one codeword spans a full diversity block (<= 120 key bits).
class BchCode {
 public:
  explicit BchCode(int t);

  int n() const { return kN; }
  int k() const { return k_; }
  int t() const { return t_; }

  /// Systematic encoding: message bits occupy the top k coefficient
  /// positions, parity fills positions 0..n-k-1.
  Bits encode(std::span<const std::uint8_t> message) const;

  /// Syndrome decoding via Berlekamp-Massey and Chien search. Returns the
  /// corrected codeword, or nullopt when no codeword lies within distance t.
  std::optional<Bits> decode(std::span<const std::uint8_t> received) const;

  bool is_codeword(std::span<const std::uint8_t> word) const;

  /// Shared (127, 15, t=27) instance.
  static const BchCode& standard();

  static constexpr int kN = 127;

 private:
  int gf_mul(int a, int b) const;
  int gf_inv(int a) const;
  std::vector<int> syndromes(std::span<const std::uint8_t> word) const;

  int t_;
  int k_;
  std::array<int, 2 * kN> exp_{};
  std::array<int, kN + 1> log_{};
  Bits generator_;  // degree n-k polynomial over GF(2), index = degree
};

}  // namespace aqkg
