#include "aqkg/traces.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

namespace aqkg {
namespace {

constexpr int kMinDbm = -150;
constexpr int kMaxDbm = 0;

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Box-Muller Gaussian over mt19937_64. std::normal_distribution output is
/// implementation-defined, which would break pinned regression values.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi_v<double> * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double uniform01() {  // strictly inside (0, 1)
    return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace

void RssiTrace::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.value < kMinDbm || s.value > kMaxDbm) {
      throw ValidationError("sample " + std::to_string(s.index) + ": value " +
                            std::to_string(s.value) + " dBm outside [-150, 0]");
    }
    if (i > 0 && samples[i - 1].index >= s.index) {
      throw ValidationError("indices not strictly increasing at position " +
                            std::to_string(i));
    }
  }
}

std::vector<std::int64_t> RssiTrace::indices() const {
  std::vector<std::int64_t> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.index);
  return out;
}

void SimConfig::validate() const {
  if (shadow_phi < 0.0 || shadow_phi >= 1.0)
    throw ValidationError("shadow_phi must lie in [0, 1)");
  if (loss_prob < 0.0 || loss_prob >= 1.0)
    throw ValidationError("loss_prob must lie in [0, 1)");
  if (shadow_sigma < 0.0 || noise_sigma < 0.0)
    throw ValidationError("sigma parameters must be non-negative");
  if (n_probes == 0) throw ValidationError("n_probes must be positive");
}

RssiTrace load_trace(const std::filesystem::path& path, std::string party) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file: " + path.string());

  RssiTrace trace;
  trace.party = std::move(party);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw ParseError(path.string() + ": missing header line");
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "index,rssi_dbm") {
    throw ParseError(path.string() + ": line 1: expected header 'index,rssi_dbm'");
  }

  std::set<std::int64_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    long long index_ll = 0;
    int value = 0;
    char trailing = 0;
    if (std::sscanf(line.c_str(), "%lld,%d%c", &index_ll, &value, &trailing) != 2) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                       ": malformed row '" + line + "'");
    }
    const auto index = static_cast<std::int64_t>(index_ll);
    if (!seen.insert(index).second) {
      throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                            ": duplicate index " + std::to_string(index));
    }
    if (!trace.samples.empty() && trace.samples.back().index >= index) {
      throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                            ": non-increasing index " + std::to_string(index));
    }
    trace.samples.push_back({index, value});
  }
  trace.validate();
  return trace;
}

void save_trace(const std::filesystem::path& path, const RssiTrace& trace) {
  std::ofstream out(path, std::ios::binary);  // binary: keep LF on all platforms
  if (!out) throw IoError("cannot write trace file: " + path.string());
  out << "index,rssi_dbm\n";
  for (const auto& s : trace.samples) out << s.index << ',' << s.value << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

ProbeSession align(const ProbeSession& session) {
  std::set<std::int64_t> in_a;
  for (const auto& s : session.trace_a.samples) in_a.insert(s.index);

  std::set<std::int64_t> keep;
  for (const auto& s : session.trace_b.samples) {
    if (in_a.contains(s.index) && !session.lost_a.contains(s.index) &&
        !session.lost_b.contains(s.index)) {
      keep.insert(s.index);
    }
  }
  if (keep.empty()) throw ValidationError("alignment left no common probe indices");

  auto filter = [&keep](const RssiTrace& t) {
    RssiTrace out;
    out.party = t.party;
    for (const auto& s : t.samples)
      if (keep.contains(s.index)) out.samples.push_back(s);
    return out;
  };

  ProbeSession out;
  out.trace_a = filter(session.trace_a);
  out.trace_b = filter(session.trace_b);
  out.lost_a = session.lost_a;
  out.lost_b = session.lost_b;
  return out;
}

SimulatedSession simulate(const SimConfig& config) {
  config.validate();

  std::uint64_t s = config.seed;
  GaussianRng shadow_rng(splitmix64(s));
  GaussianRng noise_a(splitmix64(s));
  GaussianRng noise_b(splitmix64(s));
  GaussianRng eve_shadow_rng(splitmix64(s));
  GaussianRng eve_noise(splitmix64(s));
  std::mt19937_64 loss_a_rng(splitmix64(s));
  std::mt19937_64 loss_b_rng(splitmix64(s));

  auto uniform = [](std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  };

  // Expand the sigma schedule to one value per probe.
  std::vector<double> sigmas;
  sigmas.reserve(config.n_probes);
  if (config.diversity_profile.empty()) {
    sigmas.assign(config.n_probes, config.shadow_sigma);
  } else {
    for (const auto& seg : config.diversity_profile)
      for (std::size_t i = 0; i < seg.count && sigmas.size() < config.n_probes; ++i)
        sigmas.push_back(seg.sigma);
    while (sigmas.size() < config.n_probes)
      sigmas.push_back(config.diversity_profile.back().sigma);
  }

  const double phi = config.shadow_phi;
  const double innovation_scale = std::sqrt(1.0 - phi * phi);

  auto clamp_dbm = [](double v) {
    const int r = static_cast<int>(std::lround(v));
    return std::clamp(r, kMinDbm, kMaxDbm);
  };

  SimulatedSession out;
  out.session.trace_a.party = "Alice";
  out.session.trace_b.party = "Bob";
  out.eve.party = "Eve";

  double w = 0.0;
  double w_eve = 0.0;
  for (std::size_t i = 0; i < config.n_probes; ++i) {
    const double sigma = sigmas[i];
    if (i == 0) {
      w = sigma * shadow_rng();  // stationary start
      w_eve = sigma * eve_shadow_rng();
    } else {
      w = phi * w + sigma * innovation_scale * shadow_rng();
      w_eve = phi * w_eve + sigma * innovation_scale * eve_shadow_rng();
    }

    const auto idx = static_cast<std::int64_t>(i);
    const double na = config.noise_sigma > 0 ? config.noise_sigma * noise_a() : 0.0;
    const double nb = config.noise_sigma > 0 ? config.noise_sigma * noise_b() : 0.0;
    const double ne = config.noise_sigma > 0 ? config.noise_sigma * eve_noise() : 0.0;

    const bool lost_at_a = uniform(loss_a_rng) < config.loss_prob;
    const bool lost_at_b = uniform(loss_b_rng) < config.loss_prob;
    if (lost_at_a) out.session.lost_a.insert(idx);
    if (lost_at_b) out.session.lost_b.insert(idx);

    if (!lost_at_a)
      out.session.trace_a.samples.push_back({idx, clamp_dbm(config.base_power + w + na)});
    if (!lost_at_b)
      out.session.trace_b.samples.push_back({idx, clamp_dbm(config.base_power + w + nb)});
    out.eve.samples.push_back({idx, clamp_dbm(config.base_power + w_eve + ne)});
  }
  return out;
}

}  // namespace aqkg
