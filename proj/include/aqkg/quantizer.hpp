#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "aqkg/errors.hpp"
#include "aqkg/traces.hpp"

namespace aqkg {

/// Upper bound for the guard band parameter: caps the training search and
/// clamps model outputs.
inline constexpr double kAlphaMax = 1.5;

/// Quantization-block length per level, plus the diversity-block length over
/// which one (m, alpha) pair applies.
struct BlockLengths {
  std::size_t l2 = 5;
  std::size_t l4 = 20;
  std::size_t l8 = 40;
  std::size_t diversity = 40;

  std::size_t for_level(int m) const;
  void validate() const;
};

struct QuantParams {
  int m = 2;           // quantization level, in {2, 4, 8}
  double alpha = 0.0;  // guard band parameter
  std::size_t block_len = 5;

  void validate() const;
  unsigned bits_per_sample() const;  // log2(m)
};

/// Mean-split thresholds q_0..q_m for one block plus the per-threshold
/// standard deviations that size the guard bands.
struct Thresholds {
  std::vector<double> q;  // size m+1; q.front() = block min, q.back() = block max
  std::vector<double> s;  // size m-1; s[i] belongs to internal threshold q[i+1]
  double alpha = 0.0;

  int level() const { return static_cast<int>(q.size()) - 1; }
  double guard_lo(int n) const { return q[n] - alpha * s[n - 1]; }
  double guard_hi(int n) const { return q[n] + alpha * s[n - 1]; }

  /// True when the sample falls strictly inside some guard band
  /// (guard_lo(n), guard_hi(n)].
  bool in_guard(double x) const;

  /// 1-based interval index for a retained sample.
  int interval_of(double x) const;
};

/// Key bits with provenance: one group of bits_per_group bits per retained
/// sample, in sample order.
struct BitKey {
  std::vector<std::uint8_t> bits;               // 0/1 values
  std::vector<std::int64_t> source_indices;     // one per bit group
  unsigned bits_per_group = 1;

  std::size_t groups() const { return source_indices.size(); }
  bool empty() const { return bits.empty(); }
  void validate() const;
};

struct QuantOutcome {
  BitKey key;
  std::vector<std::int64_t> dropped;  // sample indices inside guard bands
  Thresholds thresholds;
};

/// Splits samples into consecutive non-overlapping blocks of exactly
/// block_len; a short trailing remainder is discarded.
std::vector<std::span<const RssiSample>> partition(std::span<const RssiSample> samples,
                                                   std::size_t block_len);

/// Mean-split threshold recursion plus guard-band standard deviations.
/// Throws DegenerateBlock when all samples are equal.
Thresholds compute_thresholds(std::span<const int> values, int m, double alpha);

/// Gray code word assigned to the given 1-based interval: g(m - index) with
/// g(j) = j ^ (j >> 1), so the lowest interval of an m=4 quantizer reads
/// "10" and the highest "00".
unsigned gray_code_value(int interval_index, int m);
std::string gray_code(int interval_index, int m);

/// Quantizes one block: computes thresholds, drops samples inside guard
/// bands, Gray-codes the rest. Throws DegenerateBlock on constant blocks.
QuantOutcome quantize_block(std::span<const RssiSample> block, int m, double alpha);

/// Removes every bit group whose source index is in the union of the local
/// outcome's dropped set and the peer's dropped set.
BitKey merge_drops(const QuantOutcome& outcome_a, const std::set<std::int64_t>& dropped_b);
BitKey merge_drops(const BitKey& key, const std::set<std::int64_t>& dropped);

/// Whole-diversity-block quantization: partitions into quantization blocks
/// of p.block_len and concatenates per-block outcomes. Constant blocks emit
/// no bits; their sample indices are added to `dropped` so that the peer
/// discards the same positions.
struct DiversityQuantResult {
  BitKey key;
  std::vector<std::int64_t> dropped;
};
DiversityQuantResult quantize_diversity_block(std::span<const RssiSample> samples,
                                              const QuantParams& params);

}  // namespace aqkg
