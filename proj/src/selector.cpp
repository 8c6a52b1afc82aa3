#include "aqkg/selector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace aqkg {

double PiecewiseLinearModel::evaluate(double c) const {
  for (const auto& seg : segments) {
    if (c <= seg.upper_bound) {
      const double raw = seg.slope * c + seg.intercept;
      return std::clamp(raw, 0.0, alpha_max);
    }
  }
  throw ValidationError("piecewise model has no segment covering C");
}

void PiecewiseLinearModel::validate() const {
  if (segments.empty()) throw ValidationError("piecewise model needs at least one segment");
  for (std::size_t i = 1; i < segments.size(); ++i) {
    if (!(segments[i - 1].upper_bound < segments[i].upper_bound))
      throw ValidationError("segment bounds must be strictly increasing");
  }
  if (!std::isinf(segments.back().upper_bound))
    throw ValidationError("final segment must be unbounded");
  if (alpha_max <= 0) throw ValidationError("alpha_max must be positive");
}

void AdaptiveModel::validate() const {
  if (!(t_low < t_high)) throw ValidationError("level thresholds must satisfy t_low < t_high");
  for (int m : {2, 4, 8}) {
    const auto it = alpha_models.find(m);
    if (it == alpha_models.end())
      throw ValidationError("missing alpha model for m=" + std::to_string(m));
    it->second.validate();
  }
}

AdaptiveModel paper_default_model() {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  AdaptiveModel model;
  model.t_low = 0.3;
  model.t_high = 0.675;
  model.alpha_models[2] = {{{0.275, 0.0, 1.0}, {kInf, -5.83, 2.57}}, kAlphaMax};
  model.alpha_models[4] = {{{0.33, 1.085, -0.082}, {0.46, -3.47, 1.6}, {kInf, 0.0, 0.0}},
                           kAlphaMax};
  model.alpha_models[8] = {{{kInf, 0.0, 0.0}}, kAlphaMax};
  return model;
}

std::pair<int, double> select_params(double c, const AdaptiveModel& model) {
  if (c < 0) throw ValidationError("normalized complexity must be non-negative");
  const int m = c < model.t_low ? 2 : (c < model.t_high ? 4 : 8);
  return {m, model.alpha_models.at(m).evaluate(c)};
}

namespace {

nlohmann::json segment_to_json(const LinearSegment& seg) {
  nlohmann::json j;
  j["upper_bound"] = std::isinf(seg.upper_bound) ? nlohmann::json(nullptr)
                                                 : nlohmann::json(seg.upper_bound);
  j["slope"] = seg.slope;
  j["intercept"] = seg.intercept;
  return j;
}

LinearSegment segment_from_json(const nlohmann::json& j) {
  LinearSegment seg;
  seg.upper_bound = j.at("upper_bound").is_null()
                        ? std::numeric_limits<double>::infinity()
                        : j.at("upper_bound").get<double>();
  seg.slope = j.at("slope").get<double>();
  seg.intercept = j.at("intercept").get<double>();
  return seg;
}

}  // namespace

std::string model_to_json(const AdaptiveModel& model) {
  nlohmann::json j;
  j["level_thresholds"] = {model.t_low, model.t_high};
  nlohmann::json models = nlohmann::json::object();
  for (const auto& [m, plm] : model.alpha_models) {
    nlohmann::json entry;
    entry["alpha_max"] = plm.alpha_max;
    entry["segments"] = nlohmann::json::array();
    for (const auto& seg : plm.segments) entry["segments"].push_back(segment_to_json(seg));
    models[std::to_string(m)] = std::move(entry);
  }
  j["models"] = std::move(models);
  return j.dump(2) + "\n";
}

AdaptiveModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    AdaptiveModel model;
    model.t_low = j.at("level_thresholds").at(0).get<double>();
    model.t_high = j.at("level_thresholds").at(1).get<double>();
    for (const auto& [key, entry] : j.at("models").items()) {
      PiecewiseLinearModel plm;
      plm.alpha_max = entry.value("alpha_max", kAlphaMax);
      for (const auto& seg : entry.at("segments")) plm.segments.push_back(segment_from_json(seg));
      model.alpha_models[std::stoi(key)] = std::move(plm);
    }
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file missing required fields: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const AdaptiveModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file: " + path.string());
  out << model_to_json(model);
  if (!out) throw IoError("write failed: " + path.string());
}

AdaptiveModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return model_from_json(text);
}

}  // namespace aqkg
