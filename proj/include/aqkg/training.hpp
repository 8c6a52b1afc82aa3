#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "aqkg/quantizer.hpp"
#include "aqkg/selector.hpp"
#include "aqkg/traces.hpp"

namespace aqkg {

struct TrainingConfig {
  BlockLengths lengths{};
  double kdr_threshold = 0.2;
  double alpha_step = 0.01;
  double alpha_max = kAlphaMax;
};

/// One diversity block's paired samples (offline training only: requires
/// both parties' secrets).
struct DiversityBlockPair {
  std::uint32_t id = 0;
  std::vector<RssiSample> a;
  std::vector<RssiSample> b;
};

/// Per-level search trail: every (alpha, kdr) actually visited, plus the
/// level's final verdict.
struct LevelSearch {
  int m = 0;
  bool feasible = false;
  double alpha = 0.0;
  double kgr = 0.0;
  double kdr = 0.0;
  std::vector<std::pair<double, double>> visited;  // (alpha, kdr) trajectory
};

struct BlockSearchResult {
  bool feasible = false;
  int m = 0;
  double alpha = 0.0;
  double kgr = 0.0;
  double kdr = 0.0;
  std::vector<LevelSearch> levels;
};

/// Per-level smallest-alpha search: starting from alpha = 0, step by
/// alpha_step while the union-dropped KDR stays above the threshold; among
/// feasible levels return the one with the highest KGR (ties to the larger
/// level). Infeasible when no level reaches the KDR target with a non-empty
/// key.
BlockSearchResult optimal_block_params(const DiversityBlockPair& block,
                                       const TrainingConfig& config = {});

/// Splits an aligned session into complete diversity blocks; the trailing
/// remainder is discarded.
std::vector<DiversityBlockPair> diversity_blocks(const ProbeSession& aligned,
                                                 std::size_t diversity_len);

struct TrainingRecord {
  std::uint32_t block_id = 0;
  double c = 0.0;  // normalized LZ76 complexity of Alice's samples
  int m_opt = 0;
  double alpha_opt = 0.0;
  double kgr = 0.0;
  double kdr = 0.0;
};

/// Full offline pipeline over an aligned session: per-block complexity and
/// optimal parameters; infeasible blocks are excluded. Throws when the
/// session has no complete diversity block.
std::vector<TrainingRecord> build_training_set(const ProbeSession& session,
                                               const TrainingConfig& config = {});

/// Fits a fresh AdaptiveModel: level thresholds where the per-complexity
/// median of log2(m) steps past 1.5 and 2.5, and one least-squares alpha
/// line per level over (C, median alpha) pairs. Requires >= 20 records over
/// >= 5 distinct complexity values.
AdaptiveModel fit_model(std::span<const TrainingRecord> records,
                        const TrainingConfig& config = {});

/// CSV export: block_id,C,m_opt,alpha_opt,kgr,kdr
void write_training_csv(const std::filesystem::path& path,
                        std::span<const TrainingRecord> records);

}  // namespace aqkg
