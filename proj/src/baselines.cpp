#include "aqkg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "aqkg/training.hpp"

namespace aqkg {
namespace {

/// NFR over 128-bit sequences of the amplified key material (the same
/// definition run_session uses for its own metrics).
double amplified_nfr(const Bits& reconciled) {
  PrivacyAmplifier amp;
  amp.absorb(reconciled);
  const auto keys = amp.drain();

  std::vector<Bits> sequences;
  Bits bits;
  for (const auto& key : keys)
    for (auto byte : key)
      for (int b = 7; b >= 0; --b) bits.push_back((byte >> b) & 1u);
  for (std::size_t off = 0; off + 128 <= bits.size(); off += 128)
    sequences.emplace_back(bits.begin() + off, bits.begin() + off + 128);
  if (sequences.empty()) return 0.0;
  return nfr(sequences);
}

struct PipelineResult {
  std::uint64_t agreed_bits = 0;
  std::uint64_t compared_bits = 0;
  std::uint64_t disagreements = 0;
  Bits reconciled;
};

/// Fixed-parameter pipeline over all diversity blocks: quantize both sides,
/// union-drop, reconcile each block with one shot (no calibration).
PipelineResult fixed_pipeline(const std::vector<DiversityBlockPair>& blocks,
                              const QuantParams& params, const BchCode& code,
                              std::mt19937_64& rng) {
  CalibrationPolicy no_calibration;
  no_calibration.max_calibrations = 0;

  PipelineResult result;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto outcome =
        reconcile_with_calibration(blocks[i].a, blocks[i].b, params, no_calibration, code, rng,
                                   static_cast<std::uint32_t>(i));
    const auto& last = outcome.attempts.back();
    result.compared_bits += last.merged_a.size();
    for (std::size_t j = 0; j < last.merged_a.size(); ++j)
      result.disagreements += (last.merged_a[j] ^ last.merged_b[j]) & 1u;
    if (outcome.agreed) {
      result.agreed_bits += outcome.agreed_bits.size();
      result.reconciled.insert(result.reconciled.end(), outcome.agreed_bits.begin(),
                               outcome.agreed_bits.end());
    }
  }
  return result;
}

}  // namespace

BitKey differential_quantize(const RssiTrace& trace) {
  BitKey key;
  key.bits_per_group = 1;
  if (trace.size() < 2) return key;
  for (std::size_t i = 1; i < trace.samples.size(); ++i) {
    key.bits.push_back(trace.samples[i].value > trace.samples[i - 1].value ? 1 : 0);
    key.source_indices.push_back(trace.samples[i].index);
  }
  return key;
}

FixedSearchResult fixed_search(const ProbeSession& session, std::uint64_t seed,
                               const BlockLengths& lengths) {
  const auto aligned = align(session);
  const auto blocks = diversity_blocks(aligned, lengths.diversity);
  if (blocks.empty())
    throw ValidationError("fixed_search needs at least one complete diversity block");

  const BchCode& code = BchCode::standard();
  const auto n_rssi = static_cast<double>(blocks.size() * lengths.diversity);
  const int max_steps = static_cast<int>(std::lround(kAlphaMax / 0.01));

  FixedSearchResult best;
  double best_kgr = -1.0;
  Bits best_reconciled;
  double best_kdr = 0.0;

  for (int m : {2, 4, 8}) {
    for (int step = 0; step <= max_steps; ++step) {
      const QuantParams params{m, step * 0.01, lengths.for_level(m)};
      std::mt19937_64 rng(seed);  // one stream per lattice point, reproducible
      const auto result = fixed_pipeline(blocks, params, code, rng);
      const double point_kgr = static_cast<double>(result.agreed_bits) / n_rssi;
      if (point_kgr > best_kgr) {
        best_kgr = point_kgr;
        best.m = m;
        best.alpha = params.alpha;
        best_reconciled = result.reconciled;
        best_kdr = result.compared_bits == 0
                       ? 0.0
                       : static_cast<double>(result.disagreements) /
                             static_cast<double>(result.compared_bits);
      }
    }
  }

  best.row.method = "fixed";
  best.row.kgr = best_kgr;
  best.row.kdr = best_kdr;
  best.row.nfr = amplified_nfr(best_reconciled);
  return best;
}

BenchmarkRow differential_row(const ProbeSession& session, std::uint64_t seed) {
  const auto aligned = align(session);
  const auto key_a = differential_quantize(aligned.trace_a);
  const auto key_b = differential_quantize(aligned.trace_b);
  if (key_a.empty()) throw ValidationError("differential baseline needs >= 2 aligned samples");

  BenchmarkRow row;
  row.method = "differential";
  row.kdr = kdr(key_a.bits, key_b.bits);

  // Reconcile per codeword chunk, then amplify, mirroring the protocol's
  // accounting: KGR counts all aligned probes.
  const BchCode& code = BchCode::standard();
  std::mt19937_64 rng(seed);
  const auto messages = make_recon_messages(key_b, code, rng);
  const std::size_t n = static_cast<std::size_t>(code.n());

  Bits reconciled;
  for (std::size_t c = 0; c < messages.size(); ++c) {
    BitKey chunk;
    chunk.bits_per_group = 1;
    const std::size_t off = c * n;
    const std::size_t len = std::min(n, key_a.bits.size() - off);
    chunk.bits.assign(key_a.bits.begin() + off, key_a.bits.begin() + off + len);
    chunk.source_indices.resize(len, 0);
    const auto outcome = correct(chunk, messages[c], code);
    if (outcome.irc)
      reconciled.insert(reconciled.end(), outcome.key.begin(), outcome.key.end());
  }

  row.kgr = static_cast<double>(reconciled.size()) /
            static_cast<double>(aligned.trace_a.size());
  row.nfr = amplified_nfr(reconciled);
  return row;
}

std::vector<BenchmarkRow> run_benchmark(const ProbeSession& session, const AdaptiveModel& model,
                                        const CalibrationPolicy& policy, std::uint64_t seed,
                                        const BlockLengths& lengths) {
  std::vector<BenchmarkRow> rows;

  const auto report = run_session(session, model, policy, seed, lengths);
  rows.push_back(
      {"adaptive", report.metrics.kgr, report.metrics.kdr, report.metrics.nfr});

  rows.push_back(fixed_search(session, seed, lengths).row);
  rows.push_back(differential_row(session, seed));
  return rows;
}

void write_benchmark_csv(const std::filesystem::path& path,
                         const std::vector<BenchmarkRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write benchmark CSV: " + path.string());
  out << "method,kgr,kdr,nfr\n";
  out.precision(17);
  for (const auto& row : rows)
    out << row.method << ',' << row.kgr << ',' << row.kdr << ',' << row.nfr << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace aqkg
