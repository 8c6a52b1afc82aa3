#include "aqkg/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "aqkg/complexity.hpp"
#include "aqkg/randomness.hpp"

namespace aqkg {
namespace {

struct QuantizedPair {
  Bits a;
  Bits b;
};

/// Quantizes both halves of a diversity block and union-drops, so the KDR
/// matches what the live protocol would see.
QuantizedPair quantize_pair(const DiversityBlockPair& block, const QuantParams& params) {
  const auto qa = quantize_diversity_block(block.a, params);
  const auto qb = quantize_diversity_block(block.b, params);
  std::set<std::int64_t> dropped(qa.dropped.begin(), qa.dropped.end());
  dropped.insert(qb.dropped.begin(), qb.dropped.end());
  return {merge_drops(qa.key, dropped).bits, merge_drops(qb.key, dropped).bits};
}

double lower_median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

/// Least-squares line through (x, y) pairs; degenerate x-spread falls back
/// to a constant at the mean level.
LinearSegment fit_line(const std::vector<std::pair<double, double>>& points) {
  LinearSegment seg;  // unbounded by default
  if (points.empty()) return seg;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(points.size());
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) {
    seg.slope = 0.0;
    seg.intercept = sy / n;
    return seg;
  }
  seg.slope = (n * sxy - sx * sy) / denom;
  seg.intercept = (sy - seg.slope * sx) / n;
  return seg;
}

}  // namespace

BlockSearchResult optimal_block_params(const DiversityBlockPair& block,
                                       const TrainingConfig& config) {
  config.lengths.validate();
  if (block.a.size() != config.lengths.diversity || block.b.size() != block.a.size())
    throw ValidationError("diversity block must hold exactly L_D paired samples");

  const auto n_rssi = static_cast<double>(config.lengths.diversity);
  const int max_steps = static_cast<int>(std::lround(config.alpha_max / config.alpha_step));

  BlockSearchResult result;
  for (int m : {2, 4, 8}) {
    LevelSearch level;
    level.m = m;
    QuantParams params{m, 0.0, config.lengths.for_level(m)};

    for (int step = 0; step <= max_steps; ++step) {
      params.alpha = step * config.alpha_step;
      const auto pair = quantize_pair(block, params);
      if (pair.a.empty()) break;  // guard bands ate everything; larger alpha cannot help

      const double block_kdr = kdr(pair.a, pair.b);
      level.visited.emplace_back(params.alpha, block_kdr);
      if (block_kdr <= config.kdr_threshold) {
        level.feasible = true;
        level.alpha = params.alpha;
        level.kdr = block_kdr;
        level.kgr = static_cast<double>(pair.a.size()) / n_rssi;
        break;
      }
    }
    result.levels.push_back(std::move(level));
  }

  for (const auto& level : result.levels) {
    if (!level.feasible) continue;
    // Ties go to the larger level (iteration order is 2, 4, 8).
    if (!result.feasible || level.kgr >= result.kgr) {
      result.feasible = true;
      result.m = level.m;
      result.alpha = level.alpha;
      result.kgr = level.kgr;
      result.kdr = level.kdr;
    }
  }
  return result;
}

std::vector<DiversityBlockPair> diversity_blocks(const ProbeSession& aligned,
                                                 std::size_t diversity_len) {
  if (aligned.trace_a.size() != aligned.trace_b.size())
    throw ValidationError("session must be aligned before blocking");
  std::vector<DiversityBlockPair> blocks;
  const std::size_t n = aligned.trace_a.size();
  for (std::size_t off = 0; off + diversity_len <= n; off += diversity_len) {
    DiversityBlockPair blk;
    blk.id = static_cast<std::uint32_t>(blocks.size());
    blk.a.assign(aligned.trace_a.samples.begin() + off,
                 aligned.trace_a.samples.begin() + off + diversity_len);
    blk.b.assign(aligned.trace_b.samples.begin() + off,
                 aligned.trace_b.samples.begin() + off + diversity_len);
    blocks.push_back(std::move(blk));
  }
  return blocks;
}

std::vector<TrainingRecord> build_training_set(const ProbeSession& session,
                                               const TrainingConfig& config) {
  const auto aligned = align(session);
  const auto blocks = diversity_blocks(aligned, config.lengths.diversity);
  if (blocks.empty())
    throw ValidationError("training needs at least one complete diversity block");

  std::vector<TrainingRecord> records;
  for (const auto& block : blocks) {
    std::vector<int> values;
    values.reserve(block.a.size());
    for (const auto& s : block.a) values.push_back(s.value);
    const double c = normalized_complexity(values, config.lengths.diversity);

    const auto search = optimal_block_params(block, config);
    if (!search.feasible) continue;
    records.push_back({block.id, c, search.m, search.alpha, search.kgr, search.kdr});
  }
  return records;
}

AdaptiveModel fit_model(std::span<const TrainingRecord> records, const TrainingConfig& config) {
  if (records.size() < 20)
    throw ValidationError("fit_model needs >= 20 training records, got " +
                          std::to_string(records.size()));

  // Group by complexity value. C is always (lz76 count) / L_D, so exact
  // double keys are well defined.
  std::map<double, std::vector<const TrainingRecord*>> by_c;
  for (const auto& r : records) by_c[r.c].push_back(&r);
  if (by_c.size() < 5)
    throw ValidationError("fit_model needs >= 5 distinct complexity values, got " +
                          std::to_string(by_c.size()));

  const double step = 1.0 / static_cast<double>(config.lengths.diversity);

  // Median of log2(m) per complexity value, scanned in ascending C: the
  // level thresholds sit halfway between the last C before a crossing and
  // the first C after it.
  double t_low = std::numeric_limits<double>::infinity();
  double t_high = std::numeric_limits<double>::infinity();
  double prev_c = -1.0;
  bool first = true;
  for (const auto& [c, recs] : by_c) {
    std::vector<double> log_levels;
    log_levels.reserve(recs.size());
    for (const auto* r : recs) log_levels.push_back(std::log2(static_cast<double>(r->m_opt)));
    const double med = lower_median(std::move(log_levels));

    const double crossing = first ? c - step / 2.0 : (prev_c + c) / 2.0;
    if (med > 1.5 && std::isinf(t_low)) t_low = crossing;
    if (med > 2.5 && std::isinf(t_high)) t_high = crossing;
    prev_c = c;
    first = false;
  }
  const double max_c = by_c.rbegin()->first;
  if (std::isinf(t_high)) t_high = std::isinf(t_low) ? max_c + 2.0 * step : max_c + step;
  if (std::isinf(t_low)) t_low = t_high - step;
  if (!(t_low < t_high)) t_low = t_high - step / 2.0;  // medians jumped 1 -> 3 in one step

  AdaptiveModel model;
  model.t_low = t_low;
  model.t_high = t_high;

  // One least-squares alpha line per level over (C, median alpha).
  for (int m : {2, 4, 8}) {
    std::map<double, std::vector<double>> alphas_by_c;
    for (const auto& r : records)
      if (r.m_opt == m) alphas_by_c[r.c].push_back(r.alpha_opt);

    std::vector<std::pair<double, double>> points;
    points.reserve(alphas_by_c.size());
    for (auto& [c, alphas] : alphas_by_c) points.emplace_back(c, lower_median(std::move(alphas)));

    PiecewiseLinearModel plm;
    plm.alpha_max = config.alpha_max;
    plm.segments = {fit_line(points)};
    model.alpha_models[m] = std::move(plm);
  }
  model.validate();
  return model;
}

void write_training_csv(const std::filesystem::path& path,
                        std::span<const TrainingRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write training CSV: " + path.string());
  out << "block_id,C,m_opt,alpha_opt,kgr,kdr\n";
  out.precision(17);
  for (const auto& r : records) {
    out << r.block_id << ',' << r.c << ',' << r.m_opt << ',' << r.alpha_opt << ',' << r.kgr
        << ',' << r.kdr << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace aqkg
