#include "aqkg/randomness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace aqkg {

double kgr(std::uint64_t n_key, std::uint64_t n_rssi) {
  if (n_rssi == 0) throw ValidationError("KGR undefined for zero probes");
  return static_cast<double>(n_key) / static_cast<double>(n_rssi);
}

double kdr(std::span<const std::uint8_t> key_a, std::span<const std::uint8_t> key_b) {
  if (key_a.size() != key_b.size()) throw ValidationError("KDR requires equal key lengths");
  if (key_a.empty()) throw ValidationError("KDR undefined for empty keys");
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < key_a.size(); ++i)
    mismatches += (key_a[i] ^ key_b[i]) & 1u;
  return static_cast<double>(mismatches) / static_cast<double>(key_a.size());
}

const std::array<const char*, NistReport::kTestCount>& NistReport::test_names() {
  static const std::array<const char*, kTestCount> names = {
      "frequency",       "block_frequency", "runs",
      "longest_run_1s",  "dft",             "serial",
      "approx_entropy",  "cusum_forward",   "cusum_reverse"};
  return names;
}

bool NistReport::all_pass() const {
  return std::all_of(p_values.begin(), p_values.end(),
                     [](double p) { return p > kAlpha; });
}

namespace nist {
namespace {

constexpr std::size_t kKeyBits = 128;

double phi_normal(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// psi^2_m statistic over cyclic m-bit windows (serial test building block).
double psi_squared(std::span<const std::uint8_t> bits, unsigned m) {
  if (m == 0) return 0.0;
  const std::size_t n = bits.size();
  std::vector<std::size_t> counts(std::size_t{1} << m, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pattern = 0;
    for (unsigned j = 0; j < m; ++j) pattern = (pattern << 1) | (bits[(i + j) % n] & 1u);
    ++counts[pattern];
  }
  double sum = 0.0;
  for (std::size_t c : counts) sum += static_cast<double>(c) * static_cast<double>(c);
  return std::ldexp(sum / static_cast<double>(n), static_cast<int>(m)) -
         static_cast<double>(n);
}

double phi_entropy(std::span<const std::uint8_t> bits, unsigned m) {
  if (m == 0) return 0.0;
  const std::size_t n = bits.size();
  std::vector<std::size_t> counts(std::size_t{1} << m, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pattern = 0;
    for (unsigned j = 0; j < m; ++j) pattern = (pattern << 1) | (bits[(i + j) % n] & 1u);
    ++counts[pattern];
  }
  double sum = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(n);
    sum += p * std::log(p);
  }
  return sum;
}

}  // namespace

double igamc(double a, double x) {
  if (a <= 0 || x < 0 || !std::isfinite(x)) throw ValidationError("igamc domain error");
  if (x == 0) return 1.0;

  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 500;
  const double lg = std::lgamma(a);

  if (x < a + 1.0) {
    // Lower series: P(a,x), return 1 - P.
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < kMaxIter; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
  }

  // Continued fraction for Q(a,x) (modified Lentz).
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h * std::exp(-x + a * std::log(x) - lg);
}

double frequency(std::span<const std::uint8_t> bits) {
  if (bits.empty()) throw ValidationError("frequency test needs a non-empty sequence");
  const double n = static_cast<double>(bits.size());
  long long s = 0;
  for (auto b : bits) s += b ? 1 : -1;
  return std::erfc(std::abs(static_cast<double>(s)) / std::sqrt(2.0 * n));
}

double block_frequency(std::span<const std::uint8_t> bits, std::size_t block_size) {
  if (block_size == 0 || bits.size() < block_size)
    throw ValidationError("block_frequency: invalid block size");
  const std::size_t blocks = bits.size() / block_size;
  double chi = 0.0;
  for (std::size_t i = 0; i < blocks; ++i) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < block_size; ++j) ones += bits[i * block_size + j] & 1u;
    const double pi = static_cast<double>(ones) / static_cast<double>(block_size);
    chi += (pi - 0.5) * (pi - 0.5);
  }
  chi *= 4.0 * static_cast<double>(block_size);
  return igamc(static_cast<double>(blocks) / 2.0, chi / 2.0);
}

double runs(std::span<const std::uint8_t> bits) {
  const std::size_t n = bits.size();
  if (n < 2) throw ValidationError("runs test needs at least two bits");
  std::size_t ones = 0;
  for (auto b : bits) ones += b & 1u;
  const double pi = static_cast<double>(ones) / static_cast<double>(n);
  if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(static_cast<double>(n))) return 0.0;

  std::size_t v_obs = 1;
  for (std::size_t i = 0; i + 1 < n; ++i)
    if ((bits[i] ^ bits[i + 1]) & 1u) ++v_obs;
  const double nn = static_cast<double>(n);
  const double num = std::abs(static_cast<double>(v_obs) - 2.0 * nn * pi * (1.0 - pi));
  const double den = 2.0 * std::sqrt(2.0 * nn) * pi * (1.0 - pi);
  return std::erfc(num / den);
}

double longest_run_of_ones(std::span<const std::uint8_t> bits) {
  if (bits.size() != kKeyBits)
    throw ValidationError("longest_run_of_ones is parameterized for 128-bit sequences");
  constexpr std::size_t kM = 8;
  constexpr std::size_t kBlocks = 16;
  // Class probabilities for runs <=1, ==2, ==3, >=4 within an 8-bit block.
  constexpr std::array<double, 4> kPi = {0.2148, 0.3672, 0.2305, 0.1875};

  std::array<std::size_t, 4> v{};
  for (std::size_t blk = 0; blk < kBlocks; ++blk) {
    std::size_t longest = 0;
    std::size_t run = 0;
    for (std::size_t j = 0; j < kM; ++j) {
      run = bits[blk * kM + j] ? run + 1 : 0;
      longest = std::max(longest, run);
    }
    const std::size_t cls = longest <= 1 ? 0 : (longest == 2 ? 1 : (longest == 3 ? 2 : 3));
    ++v[cls];
  }
  double chi = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double expected = static_cast<double>(kBlocks) * kPi[i];
    chi += (static_cast<double>(v[i]) - expected) * (static_cast<double>(v[i]) - expected) /
           expected;
  }
  return igamc(1.5, chi / 2.0);
}

double dft(std::span<const std::uint8_t> bits) {
  const std::size_t n = bits.size();
  if (n < 2) throw ValidationError("dft test needs at least two bits");

  // Direct DFT of the +-1 sequence; moduli of the first n/2 coefficients
  // (DC included) are compared against the 95% threshold.
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = bits[i] ? 1.0 : -1.0;

  const double threshold = std::sqrt(std::log(1.0 / 0.05) * static_cast<double>(n));
  std::size_t below = 0;
  for (std::size_t j = 0; j < n / 2; ++j) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double angle =
          -2.0 * std::numbers::pi_v<double> * static_cast<double>(j * i) / static_cast<double>(n);
      re += x[i] * std::cos(angle);
      im += x[i] * std::sin(angle);
    }
    if (std::sqrt(re * re + im * im) < threshold) ++below;
  }
  const double n0 = 0.95 * static_cast<double>(n) / 2.0;
  const double d = (static_cast<double>(below) - n0) /
                   std::sqrt(static_cast<double>(n) * 0.95 * 0.05 / 4.0);
  return std::erfc(std::abs(d) / std::numbers::sqrt2);
}

double serial(std::span<const std::uint8_t> bits, unsigned m) {
  if (m < 1) throw ValidationError("serial test needs m >= 1");
  if (bits.size() < m) throw ValidationError("serial test: sequence shorter than m");
  const double d1 = psi_squared(bits, m) - psi_squared(bits, m - 1);
  return igamc(std::ldexp(1.0, static_cast<int>(m) - 2), d1 / 2.0);
}

double approximate_entropy(std::span<const std::uint8_t> bits, unsigned m) {
  if (bits.size() <= m) throw ValidationError("approximate_entropy: sequence too short");
  const double ap = phi_entropy(bits, m) - phi_entropy(bits, m + 1);
  const double chi =
      2.0 * static_cast<double>(bits.size()) * (std::numbers::ln2_v<double> - ap);
  return igamc(std::ldexp(1.0, static_cast<int>(m) - 1), chi / 2.0);
}

namespace {

double cusum(std::span<const std::uint8_t> bits, bool reverse) {
  const std::size_t n = bits.size();
  if (n == 0) throw ValidationError("cusum test needs a non-empty sequence");
  long long sum = 0;
  long long z = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t bit = reverse ? bits[n - 1 - i] : bits[i];
    sum += bit ? 1 : -1;
    z = std::max(z, std::llabs(sum));
  }
  const double nn = static_cast<double>(n);
  const double zz = static_cast<double>(z);
  const double sq = std::sqrt(nn);
  double term1 = 0.0;
  for (long long k = static_cast<long long>(std::floor((-nn / zz + 1.0) / 4.0));
       k <= static_cast<long long>(std::floor((nn / zz - 1.0) / 4.0)); ++k) {
    term1 += phi_normal((4.0 * k + 1.0) * zz / sq) - phi_normal((4.0 * k - 1.0) * zz / sq);
  }
  double term2 = 0.0;
  for (long long k = static_cast<long long>(std::floor((-nn / zz - 3.0) / 4.0));
       k <= static_cast<long long>(std::floor((nn / zz - 1.0) / 4.0)); ++k) {
    term2 += phi_normal((4.0 * k + 3.0) * zz / sq) - phi_normal((4.0 * k + 1.0) * zz / sq);
  }
  return 1.0 - term1 + term2;
}

}  // namespace

double cusum_forward(std::span<const std::uint8_t> bits) { return cusum(bits, false); }
double cusum_reverse(std::span<const std::uint8_t> bits) { return cusum(bits, true); }

}  // namespace nist

NistReport nist_suite(std::span<const std::uint8_t> bits) {
  if (bits.size() != 128) throw ValidationError("nist_suite expects 128-bit sequences");
  NistReport report;
  report.p_values = {
      nist::frequency(bits),
      nist::block_frequency(bits, 128),
      nist::runs(bits),
      nist::longest_run_of_ones(bits),
      nist::dft(bits),
      nist::serial(bits, 2),
      nist::approximate_entropy(bits, 2),
      nist::cusum_forward(bits),
      nist::cusum_reverse(bits),
  };
  return report;
}

double nfr(const std::vector<Bits>& key_sequences) {
  if (key_sequences.empty()) throw ValidationError("NFR undefined for zero key sequences");
  std::size_t failures = 0;
  for (const auto& key : key_sequences)
    if (!nist_suite(key).all_pass()) ++failures;
  return static_cast<double>(failures) / static_cast<double>(key_sequences.size());
}

void write_nist_csv(const std::filesystem::path& path, const std::vector<NistReport>& reports) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write NIST report: " + path.string());
  out << "key_id,test_name,p_value,pass\n";
  for (std::size_t k = 0; k < reports.size(); ++k) {
    for (std::size_t t = 0; t < NistReport::kTestCount; ++t) {
      out << k << ',' << NistReport::test_names()[t] << ',' << reports[k].p(t) << ','
          << (reports[k].pass(t) ? 1 : 0) << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace aqkg
