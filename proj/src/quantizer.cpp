#include "aqkg/quantizer.hpp"

#include <algorithm>
#include <cmath>

namespace aqkg {
namespace {

constexpr bool valid_level(int m) { return m == 2 || m == 4 || m == 8; }

unsigned log2_level(int m) { return m == 2 ? 1u : (m == 4 ? 2u : 3u); }

/// Mean over {x : lo <= x <= hi} (closed_lo) or {x : lo < x <= hi};
/// empty window falls back to the window midpoint so the threshold ladder
/// stays ordered.
double mean_in(std::span<const int> xs, double lo, double hi, bool closed_lo) {
  double sum = 0.0;
  std::size_t count = 0;
  for (int x : xs) {
    const bool above = closed_lo ? x >= lo : x > lo;
    if (above && x <= hi) {
      sum += x;
      ++count;
    }
  }
  if (count == 0) return 0.5 * (lo + hi);
  return sum / static_cast<double>(count);
}

/// Population standard deviation over the given window; 0 when empty.
double popstd_in(std::span<const int> xs, double lo, double hi, bool closed_lo) {
  double sum = 0.0;
  std::size_t count = 0;
  for (int x : xs) {
    const bool above = closed_lo ? x >= lo : x > lo;
    if (above && x <= hi) {
      sum += x;
      ++count;
    }
  }
  if (count == 0) return 0.0;
  const double mean = sum / static_cast<double>(count);
  double ss = 0.0;
  for (int x : xs) {
    const bool above = closed_lo ? x >= lo : x > lo;
    if (above && x <= hi) ss += (x - mean) * (x - mean);
  }
  return std::sqrt(ss / static_cast<double>(count));
}

}  // namespace

std::size_t BlockLengths::for_level(int m) const {
  switch (m) {
    case 2: return l2;
    case 4: return l4;
    case 8: return l8;
    default: throw ValidationError("unsupported quantization level " + std::to_string(m));
  }
}

void BlockLengths::validate() const {
  if (l2 == 0 || l4 == 0 || l8 == 0 || diversity == 0)
    throw ValidationError("block lengths must be positive");
  if (diversity < std::max({l2, l4, l8}))
    throw ValidationError("diversity block must cover the largest quantization block");
  if (diversity % l2 != 0 || diversity % l4 != 0 || diversity % l8 != 0)
    throw ValidationError("diversity length must be a multiple of each quantization length");
}

void QuantParams::validate() const {
  if (!valid_level(m)) throw ValidationError("quantization level must be 2, 4 or 8");
  if (alpha < 0.0 || alpha > kAlphaMax)
    throw ValidationError("alpha must lie in [0, " + std::to_string(kAlphaMax) + "]");
  if (block_len == 0) throw ValidationError("block_len must be positive");
}

unsigned QuantParams::bits_per_sample() const { return log2_level(m); }

bool Thresholds::in_guard(double x) const {
  const int m = level();
  for (int n = 1; n < m; ++n) {
    if (x > guard_lo(n) && x <= guard_hi(n)) return true;
  }
  return false;
}

int Thresholds::interval_of(double x) const {
  const int m = level();
  for (int n = 1; n < m; ++n) {
    if (x <= guard_lo(n)) return n;
  }
  return m;
}

void BitKey::validate() const {
  if (bits_per_group == 0) throw ValidationError("bits_per_group must be positive");
  if (bits.size() != source_indices.size() * bits_per_group)
    throw ValidationError("bit count does not match group count");
}

std::vector<std::span<const RssiSample>> partition(std::span<const RssiSample> samples,
                                                   std::size_t block_len) {
  if (block_len == 0) throw ValidationError("block_len must be positive");
  std::vector<std::span<const RssiSample>> blocks;
  blocks.reserve(samples.size() / block_len);
  for (std::size_t off = 0; off + block_len <= samples.size(); off += block_len)
    blocks.push_back(samples.subspan(off, block_len));
  return blocks;
}

Thresholds compute_thresholds(std::span<const int> values, int m, double alpha) {
  if (!valid_level(m)) throw ValidationError("quantization level must be 2, 4 or 8");
  if (values.empty()) throw ValidationError("cannot quantize an empty block");
  if (alpha < 0.0) throw ValidationError("alpha must be non-negative");

  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  if (*min_it == *max_it) throw DegenerateBlock();

  Thresholds t;
  t.alpha = alpha;
  t.q.assign(static_cast<std::size_t>(m) + 1, 0.0);
  t.q.front() = *min_it;
  t.q.back() = *max_it;

  // Recursive mean split: the middle threshold is the mean of the whole
  // block, then each half (and for m=8 each quarter) is split by its own
  // mean. Windows are half-open on the left except the lowest one.
  t.q[m / 2] = mean_in(values, t.q[0], t.q[m], /*closed_lo=*/true);
  if (m >= 4) {
    t.q[m / 4] = mean_in(values, t.q[0], t.q[m / 2], true);
    t.q[3 * m / 4] = mean_in(values, t.q[m / 2], t.q[m], false);
  }
  if (m == 8) {
    t.q[1] = mean_in(values, t.q[0], t.q[2], true);
    t.q[3] = mean_in(values, t.q[2], t.q[4], false);
    t.q[5] = mean_in(values, t.q[4], t.q[6], false);
    t.q[7] = mean_in(values, t.q[6], t.q[8], false);
  }

  t.s.assign(static_cast<std::size_t>(m) - 1, 0.0);
  for (int n = 1; n < m; ++n)
    t.s[n - 1] = popstd_in(values, t.q[n - 1], t.q[n + 1], /*closed_lo=*/n == 1);
  return t;
}

unsigned gray_code_value(int interval_index, int m) {
  if (!valid_level(m)) throw ValidationError("quantization level must be 2, 4 or 8");
  if (interval_index < 1 || interval_index > m)
    throw ValidationError("interval index " + std::to_string(interval_index) +
                          " out of range for m=" + std::to_string(m));
  const unsigned j = static_cast<unsigned>(m - interval_index);
  return j ^ (j >> 1);
}

std::string gray_code(int interval_index, int m) {
  const unsigned value = gray_code_value(interval_index, m);
  const unsigned width = log2_level(m);
  std::string out(width, '0');
  for (unsigned b = 0; b < width; ++b)
    if (value & (1u << (width - 1 - b))) out[b] = '1';
  return out;
}

QuantOutcome quantize_block(std::span<const RssiSample> block, int m, double alpha) {
  std::vector<int> values;
  values.reserve(block.size());
  for (const auto& s : block) values.push_back(s.value);

  QuantOutcome out;
  out.thresholds = compute_thresholds(values, m, alpha);
  out.key.bits_per_group = log2_level(m);

  const unsigned width = out.key.bits_per_group;
  for (const auto& sample : block) {
    if (out.thresholds.in_guard(sample.value)) {
      out.dropped.push_back(sample.index);
      continue;
    }
    const int interval = out.thresholds.interval_of(sample.value);
    const unsigned word = gray_code_value(interval, m);
    for (unsigned b = 0; b < width; ++b)
      out.key.bits.push_back((word >> (width - 1 - b)) & 1u);
    out.key.source_indices.push_back(sample.index);
  }
  return out;
}

BitKey merge_drops(const BitKey& key, const std::set<std::int64_t>& dropped) {
  BitKey out;
  out.bits_per_group = key.bits_per_group;
  const unsigned width = key.bits_per_group;
  for (std::size_t g = 0; g < key.groups(); ++g) {
    if (dropped.contains(key.source_indices[g])) continue;
    out.source_indices.push_back(key.source_indices[g]);
    for (unsigned b = 0; b < width; ++b) out.bits.push_back(key.bits[g * width + b]);
  }
  return out;
}

BitKey merge_drops(const QuantOutcome& outcome_a, const std::set<std::int64_t>& dropped_b) {
  std::set<std::int64_t> all(dropped_b);
  all.insert(outcome_a.dropped.begin(), outcome_a.dropped.end());
  return merge_drops(outcome_a.key, all);
}

DiversityQuantResult quantize_diversity_block(std::span<const RssiSample> samples,
                                              const QuantParams& params) {
  params.validate();
  DiversityQuantResult out;
  out.key.bits_per_group = params.bits_per_sample();
  for (const auto block : partition(samples, params.block_len)) {
    try {
      QuantOutcome q = quantize_block(block, params.m, params.alpha);
      out.key.bits.insert(out.key.bits.end(), q.key.bits.begin(), q.key.bits.end());
      out.key.source_indices.insert(out.key.source_indices.end(),
                                    q.key.source_indices.begin(),
                                    q.key.source_indices.end());
      out.dropped.insert(out.dropped.end(), q.dropped.begin(), q.dropped.end());
    } catch (const DegenerateBlock&) {
      // Zero-entropy block: contribute nothing, and drop the positions on
      // both sides so the parties stay group-aligned.
      for (const auto& s : block) out.dropped.push_back(s.index);
    }
  }
  return out;
}

}  // namespace aqkg
