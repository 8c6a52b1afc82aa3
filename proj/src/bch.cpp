#include "aqkg/bch.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace aqkg {
namespace {
constexpr int kPrimitivePoly = 0x89;  // x^7 + x^3 + 1
}

BchCode::BchCode(int t) : t_(t) {
  if (t < 1 || 2 * t >= kN) throw ValidationError("unsupported BCH correction capacity");

  // GF(2^7) exp/log tables.
  int x = 1;
  for (int i = 0; i < kN; ++i) {
    exp_[i] = x;
    log_[x] = i;
    x <<= 1;
    if (x & 0x80) x ^= kPrimitivePoly;
  }
  for (int i = kN; i < 2 * kN; ++i) exp_[i] = exp_[i - kN];
  log_[0] = -1;

  // Generator = product of the minimal polynomials of alpha^1..alpha^2t,
  // i.e. one factor (x - alpha^j) per element of each cyclotomic coset.
  std::set<int> covered;
  std::vector<int> g = {1};  // coefficients in GF(2^7), index = degree
  for (int i = 1; i <= 2 * t_; ++i) {
    if (covered.contains(i)) continue;
    std::vector<int> coset;
    int j = i;
    while (!covered.contains(j)) {
      covered.insert(j);
      coset.push_back(j);
      j = (2 * j) % kN;
    }
    for (int power : coset) {
      const int root = exp_[power];
      std::vector<int> next(g.size() + 1, 0);
      for (std::size_t d = 0; d < g.size(); ++d) {
        next[d + 1] ^= g[d];
        next[d] ^= gf_mul(g[d], root);
      }
      g = std::move(next);
    }
  }

  generator_.resize(g.size());
  for (std::size_t d = 0; d < g.size(); ++d) {
    if (g[d] != 0 && g[d] != 1)
      throw ValidationError("generator polynomial has a coefficient outside GF(2)");
    generator_[d] = static_cast<std::uint8_t>(g[d]);
  }
  k_ = kN - static_cast<int>(generator_.size() - 1);
  if (k_ <= 0) throw ValidationError("designed distance too large for n=127");
}

const BchCode& BchCode::standard() {
  static const BchCode code(27);
  return code;
}

int BchCode::gf_mul(int a, int b) const {
  if (a == 0 || b == 0) return 0;
  return exp_[log_[a] + log_[b]];
}

int BchCode::gf_inv(int a) const { return exp_[(kN - log_[a]) % kN]; }

Bits BchCode::encode(std::span<const std::uint8_t> message) const {
  if (static_cast<int>(message.size()) != k_)
    throw ValidationError("BCH message must have exactly " + std::to_string(k_) + " bits");

  const int parity = kN - k_;
  Bits codeword(kN, 0);
  for (int i = 0; i < k_; ++i) codeword[parity + i] = message[i] & 1u;

  // Remainder of x^{n-k} m(x) modulo g(x).
  Bits rem = codeword;
  for (int d = kN - 1; d >= parity; --d) {
    if (!rem[d]) continue;
    for (std::size_t i = 0; i < generator_.size(); ++i)
      rem[d - parity + i] ^= generator_[i];
  }
  for (int i = 0; i < parity; ++i) codeword[i] = rem[i];
  return codeword;
}

std::vector<int> BchCode::syndromes(std::span<const std::uint8_t> word) const {
  std::vector<int> out(2 * t_ + 1, 0);
  for (int i = 1; i <= 2 * t_; ++i) {
    int s = 0;
    for (int j = 0; j < kN; ++j)
      if (word[j]) s ^= exp_[(i * j) % kN];
    out[i] = s;
  }
  return out;
}

bool BchCode::is_codeword(std::span<const std::uint8_t> word) const {
  const auto s = syndromes(word);
  return std::all_of(s.begin() + 1, s.end(), [](int v) { return v == 0; });
}

std::optional<Bits> BchCode::decode(std::span<const std::uint8_t> received) const {
  if (static_cast<int>(received.size()) != kN)
    throw ValidationError("BCH decode expects a 127-bit word");

  const auto synd = syndromes(received);
  Bits word(received.begin(), received.end());
  if (std::all_of(synd.begin() + 1, synd.end(), [](int v) { return v == 0; })) return word;

  // Berlekamp-Massey: grow the error locator sigma until it explains all
  // 2t syndromes.
  const int rounds = 2 * t_;
  std::vector<int> sigma(rounds + 1, 0), prev(rounds + 1, 0);
  sigma[0] = 1;
  prev[0] = 1;
  int length = 0;
  int gap = 1;
  int prev_discrepancy = 1;
  for (int round = 0; round < rounds; ++round) {
    int discrepancy = synd[round + 1];
    for (int i = 1; i <= length; ++i)
      discrepancy ^= gf_mul(sigma[i], synd[round + 1 - i]);

    if (discrepancy == 0) {
      ++gap;
    } else if (2 * length <= round) {
      const std::vector<int> saved = sigma;
      const int coef = gf_mul(discrepancy, gf_inv(prev_discrepancy));
      for (int i = 0; i + gap <= rounds; ++i)
        sigma[i + gap] ^= gf_mul(coef, prev[i]);
      length = round + 1 - length;
      prev = saved;
      prev_discrepancy = discrepancy;
      gap = 1;
    } else {
      const int coef = gf_mul(discrepancy, gf_inv(prev_discrepancy));
      for (int i = 0; i + gap <= rounds; ++i)
        sigma[i + gap] ^= gf_mul(coef, prev[i]);
      ++gap;
    }
  }
  if (length > t_) return std::nullopt;

  // Chien search: position j is in error iff sigma(alpha^{-j}) == 0.
  std::vector<int> error_positions;
  for (int j = 0; j < kN; ++j) {
    int value = 0;
    for (int i = 0; i <= length; ++i) {
      if (sigma[i] == 0) continue;
      value ^= exp_[(log_[sigma[i]] + i * ((kN - j) % kN)) % kN];
    }
    if (value == 0) error_positions.push_back(j);
  }
  if (static_cast<int>(error_positions.size()) != length) return std::nullopt;

  for (int j : error_positions) word[j] ^= 1u;
  if (!is_codeword(word)) return std::nullopt;
  return word;
}

}  // namespace aqkg
