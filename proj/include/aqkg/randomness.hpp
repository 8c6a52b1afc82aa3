#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "aqkg/bch.hpp"
#include "aqkg/errors.hpp"

namespace aqkg {

/// Session efficiency metrics: key bits per probe (KGR), disagreement ratio
/// after quantization (KDR), and the fraction of 128-bit key sequences that
/// fail the randomness suite (NFR).
struct MetricReport {
  std::uint64_t n_rssi = 0;
  std::uint64_t n_key = 0;
  double kgr = 0.0;
  double kdr = 0.0;
  std::uint64_t n_ks = 0;
  std::uint64_t n_f = 0;
  double nfr = 0.0;
};

double kgr(std::uint64_t n_key, std::uint64_t n_rssi);
double kdr(std::span<const std::uint8_t> key_a, std::span<const std::uint8_t> key_b);

/// The nine statistical tests applied to each 128-bit key sequence, with
/// their p-values. A sequence passes when every p-value exceeds 0.01.
struct NistReport {
  static constexpr double kAlpha = 0.01;
  static constexpr std::size_t kTestCount = 9;
  static const std::array<const char*, kTestCount>& test_names();

  std::array<double, kTestCount> p_values{};

  double p(std::size_t i) const { return p_values[i]; }
  bool pass(std::size_t i) const { return p_values[i] > kAlpha; }
  bool all_pass() const;
};

/// Runs the suite on a 128-bit sequence (throws on any other length).
NistReport nist_suite(std::span<const std::uint8_t> bits);

/// Fraction of 128-bit sequences failing at least one test.
double nfr(const std::vector<Bits>& key_sequences);

/// CSV export: key_id,test_name,p_value,pass
void write_nist_csv(const std::filesystem::path& path, const std::vector<NistReport>& reports);

/// Individual tests. Frequency-family tests accept any positive length;
/// longest_run_of_ones requires the 128-bit parameterization.
namespace nist {

double frequency(std::span<const std::uint8_t> bits);
double block_frequency(std::span<const std::uint8_t> bits, std::size_t block_size);
double runs(std::span<const std::uint8_t> bits);
double longest_run_of_ones(std::span<const std::uint8_t> bits);  // n == 128: M=8, K=3, N=16
double dft(std::span<const std::uint8_t> bits);
double serial(std::span<const std::uint8_t> bits, unsigned m = 2);  // first serial p-value
double approximate_entropy(std::span<const std::uint8_t> bits, unsigned m = 2);
double cusum_forward(std::span<const std::uint8_t> bits);
double cusum_reverse(std::span<const std::uint8_t> bits);

/// Regularized upper incomplete gamma Q(a, x), accurate to ~1e-14.
double igamc(double a, double x);

}  // namespace nist
}  // namespace aqkg
