// aqkg: batch CLI for the adaptive-quantization key-generation pipeline.
//
// Subcommands:
//   simulate  synthesize paired RSSI traces (plus an eavesdropper trace)
//   train     fit an adaptive model from paired traces
//   keygen    run the full protocol: report JSON, key hex, transcript binary
//   nist      randomness-test a key file, one CSV row per (key, test)
//   bench     compare adaptive / fixed-search / differential quantization

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "aqkg/baselines.hpp"
#include "aqkg/protocol.hpp"
#include "aqkg/training.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag_seed) {
  if (flag_seed) return *flag_seed;
  if (const char* env = std::getenv("AQKG_SEED")) return std::strtoull(env, nullptr, 10);
  return 1;
}

aqkg::AdaptiveModel resolve_model(const std::string& spec) {
  if (spec == "paper-default") return aqkg::paper_default_model();
  return aqkg::load_model(spec);
}

std::vector<aqkg::ShadowSegment> parse_profile(const std::string& text) {
  // "count:sigma,count:sigma,..."
  std::vector<aqkg::ShadowSegment> segments;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto comma = text.find(',', pos);
    const std::string part = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    const auto colon = part.find(':');
    if (colon == std::string::npos)
      throw aqkg::ValidationError("--profile segments must look like count:sigma");
    segments.push_back({static_cast<std::size_t>(std::stoull(part.substr(0, colon))),
                        std::stod(part.substr(colon + 1))});
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (segments.empty()) throw aqkg::ValidationError("--profile must name at least one segment");
  return segments;
}

void write_keys_hex(const std::string& path, const std::vector<aqkg::Digest256>& keys) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw aqkg::IoError("cannot write key file: " + path);
  for (const auto& key : keys) out << aqkg::to_hex(key) << '\n';
  if (!out) throw aqkg::IoError("write failed: " + path);
}

std::vector<aqkg::Bits> read_key_sequences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw aqkg::IoError("cannot open key file: " + path);
  std::vector<aqkg::Bits> sequences;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    aqkg::Bits bits;
    for (char ch : line) {
      int value;
      if (ch >= '0' && ch <= '9') value = ch - '0';
      else if (ch >= 'a' && ch <= 'f') value = ch - 'a' + 10;
      else if (ch >= 'A' && ch <= 'F') value = ch - 'A' + 10;
      else
        throw aqkg::ParseError(path + ": line " + std::to_string(line_no) +
                               ": not a hex string");
      for (int b = 3; b >= 0; --b) bits.push_back((value >> b) & 1);
    }
    // Split each line into 128-bit test sequences; a short tail is ignored.
    for (std::size_t off = 0; off + 128 <= bits.size(); off += 128)
      sequences.emplace_back(bits.begin() + off, bits.begin() + off + 128);
  }
  if (sequences.empty())
    throw aqkg::ValidationError(path + ": no 128-bit key sequences found");
  return sequences;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-quantization key generation from RSSI traces"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed_flag;
  app.add_option("--seed", seed_flag, "RNG seed (fallback: AQKG_SEED, then 1)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Synthesize paired RSSI traces");
  aqkg::SimConfig sim_config;
  std::string profile_text, out_a, out_b, out_eve;
  sim->add_option("--n", sim_config.n_probes, "number of probe rounds")->required();
  sim->add_option("--base", sim_config.base_power, "base power, dBm");
  sim->add_option("--shadow-sigma", sim_config.shadow_sigma, "shadow fading std, dB");
  sim->add_option("--phi", sim_config.shadow_phi, "AR(1) coefficient");
  sim->add_option("--noise-sigma", sim_config.noise_sigma, "per-party noise std, dB");
  sim->add_option("--loss-prob", sim_config.loss_prob, "per-direction loss probability");
  sim->add_option("--profile", profile_text, "piecewise sigma schedule count:sigma[,...]");
  sim->add_option("--out-a", out_a, "Alice trace CSV")->required();
  sim->add_option("--out-b", out_b, "Bob trace CSV")->required();
  sim->add_option("--out-eve", out_eve, "Eve trace CSV");

  // train
  auto* train = app.add_subcommand("train", "Fit an adaptive model from paired traces");
  std::string train_a, train_b, out_model, out_records;
  train->add_option("--a", train_a, "Alice trace CSV")->required();
  train->add_option("--b", train_b, "Bob trace CSV")->required();
  train->add_option("--out-model", out_model, "model JSON output")->required();
  train->add_option("--out-records", out_records, "training-set CSV output");

  // keygen
  auto* keygen = app.add_subcommand("keygen", "Run the key-generation protocol");
  std::string kg_a, kg_b, kg_model = "paper-default", kg_eve;
  std::string out_report, out_key_a, out_key_b, out_transcript;
  aqkg::CalibrationPolicy policy;
  keygen->add_option("--a", kg_a, "Alice trace CSV")->required();
  keygen->add_option("--b", kg_b, "Bob trace CSV")->required();
  keygen->add_option("--model", kg_model, "model JSON path or 'paper-default'");
  keygen->add_option("--eve", kg_eve, "optional Eve trace CSV for leakage analysis");
  keygen->add_option("--delta-alpha", policy.delta_alpha, "calibration increment");
  keygen->add_option("--max-calibrations", policy.max_calibrations, "calibration budget");
  keygen->add_option("--out-report", out_report, "session report JSON");
  keygen->add_option("--out-key-a", out_key_a, "Alice final keys, hex lines");
  keygen->add_option("--out-key-b", out_key_b, "Bob final keys, hex lines");
  keygen->add_option("--out-transcript", out_transcript, "public transcript, binary");

  // nist
  auto* nist_cmd = app.add_subcommand("nist", "Randomness-test a key file");
  std::string nist_keys, nist_out;
  nist_cmd->add_option("--keys", nist_keys, "hex key file, one key per line")->required();
  nist_cmd->add_option("--out", nist_out, "report CSV")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "Compare quantization schemes");
  std::string bench_a, bench_b, bench_model = "paper-default", bench_out;
  bench->add_option("--a", bench_a, "Alice trace CSV")->required();
  bench->add_option("--b", bench_b, "Bob trace CSV")->required();
  bench->add_option("--model", bench_model, "model JSON path or 'paper-default'");
  bench->add_option("--out", bench_out, "benchmark CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitValidation;
  }

  try {
    const std::uint64_t seed = resolve_seed(seed_flag);

    if (sim->parsed()) {
      sim_config.seed = seed;
      if (!profile_text.empty()) sim_config.diversity_profile = parse_profile(profile_text);
      const auto result = aqkg::simulate(sim_config);
      aqkg::save_trace(out_a, result.session.trace_a);
      aqkg::save_trace(out_b, result.session.trace_b);
      if (!out_eve.empty()) aqkg::save_trace(out_eve, result.eve);
      std::cout << "wrote " << result.session.trace_a.size() << " samples for Alice, "
                << result.session.trace_b.size() << " for Bob\n";
    } else if (train->parsed()) {
      aqkg::ProbeSession session;
      session.trace_a = aqkg::load_trace(train_a, "Alice");
      session.trace_b = aqkg::load_trace(train_b, "Bob");
      const auto records = aqkg::build_training_set(session);
      const auto model = aqkg::fit_model(records);
      aqkg::save_model(out_model, model);
      if (!out_records.empty()) aqkg::write_training_csv(out_records, records);
      std::cout << "trained on " << records.size() << " feasible diversity blocks\n";
    } else if (keygen->parsed()) {
      aqkg::ProbeSession session;
      session.trace_a = aqkg::load_trace(kg_a, "Alice");
      session.trace_b = aqkg::load_trace(kg_b, "Bob");
      const auto model = resolve_model(kg_model);
      const auto report = aqkg::run_session(session, model, policy, seed);
      if (!out_report.empty()) {
        std::ofstream out(out_report, std::ios::binary);
        if (!out) throw aqkg::IoError("cannot write report: " + out_report);
        out << aqkg::report_to_json(report);
      }
      if (!out_key_a.empty()) write_keys_hex(out_key_a, report.keys_a);
      if (!out_key_b.empty()) write_keys_hex(out_key_b, report.keys_b);
      if (!out_transcript.empty()) aqkg::save_transcript(out_transcript, report.transcript);
      if (!kg_eve.empty()) {
        const auto eve = aqkg::load_trace(kg_eve, "Eve");
        const auto leak = aqkg::eavesdrop_report(report, eve, model, policy);
        std::cout << "eve_kdr_vs_bob=" << leak.kdr_vs_bob
                  << " eve_crc_passes=" << leak.crc_passes << '\n';
      }
      std::cout << "kgr=" << report.metrics.kgr << " kdr=" << report.metrics.kdr
                << " nfr=" << report.metrics.nfr << " final_keys=" << report.keys_a.size()
                << '\n';
    } else if (nist_cmd->parsed()) {
      const auto sequences = read_key_sequences(nist_keys);
      std::vector<aqkg::NistReport> reports;
      reports.reserve(sequences.size());
      for (const auto& seq : sequences) reports.push_back(aqkg::nist_suite(seq));
      aqkg::write_nist_csv(nist_out, reports);
      std::size_t failures = 0;
      for (const auto& r : reports)
        if (!r.all_pass()) ++failures;
      std::cout << "sequences=" << reports.size() << " failures=" << failures
                << " nfr=" << (static_cast<double>(failures) / reports.size()) << '\n';
    } else if (bench->parsed()) {
      aqkg::ProbeSession session;
      session.trace_a = aqkg::load_trace(bench_a, "Alice");
      session.trace_b = aqkg::load_trace(bench_b, "Bob");
      const auto model = resolve_model(bench_model);
      const auto rows = aqkg::run_benchmark(session, model, aqkg::CalibrationPolicy{}, seed);
      aqkg::write_benchmark_csv(bench_out, rows);
      for (const auto& row : rows)
        std::cout << row.method << ": kgr=" << row.kgr << " kdr=" << row.kdr
                  << " nfr=" << row.nfr << '\n';
    }
  } catch (const aqkg::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const aqkg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
