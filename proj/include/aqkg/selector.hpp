#pragma once

#include <filesystem>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "aqkg/errors.hpp"
#include "aqkg/quantizer.hpp"

namespace aqkg {

/// One branch of a piecewise-linear alpha model: applies while the
/// complexity C is <= upper_bound. The final segment uses +infinity.
struct LinearSegment {
  double upper_bound = std::numeric_limits<double>::infinity();
  double slope = 0.0;
  double intercept = 0.0;
};

struct PiecewiseLinearModel {
  std::vector<LinearSegment> segments;
  double alpha_max = kAlphaMax;

  /// Evaluates the first matching segment and clamps to [0, alpha_max].
  double evaluate(double c) const;
  void validate() const;
};

/// Level-selection thresholds on normalized LZ76 complexity plus one alpha
/// model per quantization level. Level choice is half-open: C < t_low picks
/// m=2, t_low <= C < t_high picks m=4, otherwise m=8.
struct AdaptiveModel {
  double t_low = 0.3;
  double t_high = 0.675;
  std::map<int, PiecewiseLinearModel> alpha_models;  // keys 2, 4, 8

  void validate() const;
};

/// The fitted constants shipped with the scheme: level thresholds
/// (0.3, 0.675) and the published per-level alpha branches.
AdaptiveModel paper_default_model();

/// Picks (m, alpha) for a diversity block of the given normalized
/// complexity. Total for all C >= 0; alpha is clamped to [0, alpha_max].
std::pair<int, double> select_params(double c, const AdaptiveModel& model);

/// JSON model file I/O; save/load round-trips losslessly.
void save_model(const std::filesystem::path& path, const AdaptiveModel& model);
AdaptiveModel load_model(const std::filesystem::path& path);
std::string model_to_json(const AdaptiveModel& model);
AdaptiveModel model_from_json(const std::string& text);

}  // namespace aqkg
