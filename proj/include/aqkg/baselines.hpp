#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aqkg/protocol.hpp"

namespace aqkg {

struct BenchmarkRow {
  std::string method;
  double kgr = 0.0;
  double kdr = 0.0;
  double nfr = 0.0;
};

/// Differential quantization: one bit per adjacent sample pair, 1 when the
/// RSSI rose, 0 otherwise (ties map to 0). N samples yield N-1 bits.
BitKey differential_quantize(const RssiTrace& trace);

struct FixedSearchResult {
  int m = 0;
  double alpha = 0.0;
  BenchmarkRow row;
};

/// Offline upper bound of fixed quantization: exhaustive (m, alpha) grid on
/// the 0.01 lattice, one global parameter pair for the whole session, same
/// block lengths and BCH reconciliation as the protocol but no calibration.
/// Returns the lattice point maximizing end-to-end KGR (first maximum wins:
/// smallest m, then smallest alpha).
FixedSearchResult fixed_search(const ProbeSession& session, std::uint64_t seed = 1,
                               const BlockLengths& lengths = {});

/// Differential baseline run end to end: quantize, reconcile per codeword
/// chunk, amplify; KGR counts every aligned probe consumed.
BenchmarkRow differential_row(const ProbeSession& session, std::uint64_t seed = 1);

/// Three-way comparison on one session: adaptive protocol (with calibration),
/// fixed-search upper bound, and differential quantization.
std::vector<BenchmarkRow> run_benchmark(const ProbeSession& session, const AdaptiveModel& model,
                                        const CalibrationPolicy& policy, std::uint64_t seed = 1,
                                        const BlockLengths& lengths = {});

/// CSV export: method,kgr,kdr,nfr
void write_benchmark_csv(const std::filesystem::path& path,
                         const std::vector<BenchmarkRow>& rows);

}  // namespace aqkg
