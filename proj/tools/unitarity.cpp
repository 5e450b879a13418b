// Copyright 2026 The Unitarity Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: channel reports, protocol simulation, fitting,
// random-ensemble scans and the verification suite.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "unitarity/ensembles.hpp"
#include "unitarity/fitmodel.hpp"
#include "unitarity/metrics.hpp"
#include "unitarity/rbsim.hpp"
#include "unitarity/serialization.hpp"
#include "unitarity/verify.hpp"

namespace fs = std::filesystem;
using namespace unitarity;

namespace {

constexpr const char *kVersion = "0.1.0";

enum ExitCode { kOk = 0, kInputError = 1, kNoConvergence = 2, kVerificationFailure = 3 };

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string sha256_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  EVP_MD_CTX *ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof(byte), "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

void write_text(const fs::path &path, const std::string &text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

/// Writes <manifest> listing every output with its SHA-256 digest.
void write_manifest(const fs::path &manifest, const std::string &command, const Json &config, std::uint64_t seed,
                    const std::string &started, const std::vector<fs::path> &outputs) {
  Json files = Json::array();
  for (const auto &p : outputs) {
    files.push_back({{"path", p.filename().string()}, {"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}});
  }
  const Json j{{"command", command}, {"config", config},       {"seed", seed},  {"tool_version", kVersion},
               {"started_at", started}, {"finished_at", utc_now()}, {"outputs", files}};
  write_text(manifest, j.dump(2) + "\n");
}

void emit(const std::string &text, const std::string &out) {
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
}

std::vector<int> parse_int_list(const std::string &text, const std::string &flag) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    try {
      if (colon == std::string::npos) {
        out.push_back(std::stoi(item));
      } else {
        // a:b or a:b:step
        const auto second = item.find(':', colon + 1);
        const int lo = std::stoi(item.substr(0, colon));
        const int hi = std::stoi(item.substr(colon + 1, second == std::string::npos ? std::string::npos : second - colon - 1));
        const int step = second == std::string::npos ? 1 : std::stoi(item.substr(second + 1));
        if (step < 1) throw InputError(flag + ": step must be >= 1");
        for (int v = lo; v <= hi; v += step) out.push_back(v);
      }
    } catch (const std::logic_error &) {
      throw InputError(flag + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw InputError(flag + ": empty list");
  return out;
}

Json read_json_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error &e) {
    throw InputError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

struct ChannelInfoArgs {
  std::string spec;
  std::string channel_file;
  std::string out;
  int restarts = 20;
};

int cmd_channel_info(const ChannelInfoArgs &a) {
  KrausChannel channel = identity_channel(2);
  if (!a.channel_file.empty()) {
    const ChannelData data = channel_from_json(read_json_file(a.channel_file));
    if (!std::holds_alternative<KrausChannel>(data)) {
      throw InputError("channel-info needs a Kraus representation (kind \"kraus\")");
    }
    channel = std::get<KrausChannel>(data);
  } else if (!a.spec.empty()) {
    channel = parse_channel_spec(a.spec);
  } else {
    throw InputError("channel-info: give a channel specifier or --channel-file");
  }
  emit(channel_report_to_json(channel_report(channel, a.restarts)).dump(2) + "\n", a.out);
  return kOk;
}

struct SimulateArgs {
  std::string config;
  std::string noise;
  std::string lengths;
  std::string spam;
  std::string protocol = "purity";
  std::string out = "simulation";
  std::optional<double> max_delta;
  std::optional<std::uint64_t> seed;
  std::optional<int> sequences;
  std::optional<int> shots;
  std::optional<int> workers;
  bool exact = false;
};

int cmd_simulate(const SimulateArgs &a) {
  const std::string started = utc_now();
  ProtocolInputs in = a.config.empty() ? ProtocolInputs{} : inputs_from_json(read_json_file(a.config));
  if (!a.noise.empty()) in.noise = a.noise;
  if (a.max_delta) in.max_delta = *a.max_delta;
  if (a.seed) in.seed = *a.seed;
  if (!a.lengths.empty()) in.lengths = parse_int_list(a.lengths, "--lengths");
  if (a.sequences) in.sequences = *a.sequences;
  if (a.shots) in.shots = *a.shots;
  if (a.workers) in.workers = *a.workers;
  if (a.exact) in.exact = true;
  if (a.spam == "on") in.spam.enabled = true;
  if (a.spam == "off") in.spam.enabled = false;

  ProtocolConfig config = in.to_config();
  config.validate();
  const DecayDataset data = a.protocol == "loss" ? run_loss_protocol(config) : run_purity_protocol(config);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  std::ostringstream raw, agg;
  write_raw_csv(raw, data);
  write_aggregate_csv(agg, data);
  const fs::path raw_path = dir / "raw.csv";
  const fs::path agg_path = dir / "aggregate.csv";
  write_text(raw_path, raw.str());
  write_text(agg_path, agg.str());
  Json echo = inputs_to_json(in);
  echo["protocol"] = a.protocol;
  write_manifest(dir / "manifest.json", "simulate", echo, in.seed, started, {raw_path, agg_path});
  std::cerr << "wrote " << agg_path.string() << " and " << raw_path.string() << "\n";
  return kOk;
}

struct FitArgs {
  std::string csv;
  std::string model;
  std::string out;
  int bootstrap = 0;
};

int cmd_fit(const FitArgs &a) {
  std::ifstream in(a.csv);
  if (!in) throw InputError("cannot open " + a.csv);
  const DecayDataset data = read_aggregate_csv(in);
  const std::string model = a.model.empty() ? (data.kind == "loss" ? "loss" : "tp") : a.model;
  FitOptions options;
  options.bootstrap_samples = a.bootstrap;
  FitResult fit;
  if (model == "tp") {
    fit = fit_tp_decay(data, options);
  } else if (model == "td") {
    fit = fit_td_decay(data, options);
  } else {
    fit = loss_fit(data, options);
  }
  emit(fit_report_to_json(fit).dump(2) + "\n", a.out);
  if (!a.out.empty()) {
    write_manifest(fs::path(a.out).string() + ".manifest.json", "fit",
                   Json{{"csv", a.csv}, {"model", model}, {"bootstrap", a.bootstrap}}, 0, utc_now(), {a.out});
  }
  return fit.converged ? kOk : kNoConvergence;
}

struct ScanArgs {
  std::string ranks = "1,2,3,4";
  int samples = 1000;
  std::uint64_t seed = 1;
  std::string out;
  std::optional<int> workers;
};

int cmd_scan_ensemble(const ScanArgs &a) {
  const std::string started = utc_now();
  constexpr int d = 2;
  const std::vector<int> ranks = parse_int_list(a.ranks, "--ranks");
  for (int r : ranks) {
    if (r < 1 || r > d * d) throw InputError("--ranks: rank " + std::to_string(r) + " outside 1.." + std::to_string(d * d));
  }
  if (a.samples < 1) throw InputError("--samples must be >= 1");
  const std::size_t total = ranks.size() * static_cast<std::size_t>(a.samples);
  std::vector<double> u(total), r(total);
  parallel_for(total, a.workers.value_or(0), [&](std::size_t i) {
    const int rank = ranks[i / a.samples];
    const auto sample = static_cast<std::uint64_t>(i % a.samples);
    RngStream rng(a.seed, {purpose(StreamPurpose::kEnsembleScan), static_cast<std::uint64_t>(rank), sample});
    const Superoperator s = kraus_to_liouville(bruzda_channel(d, rank, rng));
    u[i] = unitarity::unitarity(s);
    r[i] = average_infidelity(s);
  });
  std::ostringstream csv;
  csv << "rank,sample,unitarity,infidelity\n";
  for (std::size_t i = 0; i < total; ++i) {
    csv << ranks[i / a.samples] << ',' << i % a.samples << ',' << format_double(u[i]) << ',' << format_double(r[i])
        << '\n';
  }
  emit(csv.str(), a.out);
  if (!a.out.empty()) {
    write_manifest(a.out + ".manifest.json", "scan-ensemble",
                   Json{{"ranks", ranks}, {"samples", a.samples}, {"d", d}}, a.seed, started, {a.out});
  }
  return kOk;
}

struct VerifyArgs {
  std::string level = "quick";
  std::string out;
  double tolerance_scale = 1.0;
  std::uint64_t seed = VerifyOptions{}.seed;
  std::optional<int> workers;
};

int cmd_verify(const VerifyArgs &a) {
  VerifyOptions options;
  options.tolerance_scale = a.tolerance_scale;
  options.seed = a.seed;
  options.workers = a.workers.value_or(0);
  const auto results = a.level == "full" ? run_acceptance(options) : run_quick_checks(options);
  Json checks = Json::array();
  bool all = true;
  for (const auto &r : results) {
    Json values = Json::object();
    for (const auto &[k, v] : r.values) values[k] = v;
    checks.push_back({{"id", r.id},
                      {"name", r.name},
                      {"passed", r.passed},
                      {"detail", r.detail},
                      {"values", values},
                      {"seconds", r.seconds}});
    all = all && r.passed;
    std::cerr << (r.passed ? "PASS " : "FAIL ") << r.id << " " << r.name << "\n";
  }
  const Json report{{"level", a.level}, {"tolerance_scale", a.tolerance_scale}, {"seed", a.seed},
                    {"passed", all},    {"checks", checks}};
  emit(report.dump(2) + "\n", a.out);
  return all ? kOk : kVerificationFailure;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Unitarity estimation toolkit: channel metrics, protocol simulation and decay fitting"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ChannelInfoArgs info;
  auto *c_info = app.add_subcommand("channel-info", "Report unitarity and related metrics of a channel");
  c_info->add_option("spec", info.spec, "Channel specifier, e.g. dep:0.1 or compose:[reset:0.003,haar:1]");
  c_info->add_option("--channel-file", info.channel_file, "Channel JSON file (kind \"kraus\")");
  c_info->add_option("--out", info.out, "Write the JSON report here instead of stdout");
  c_info->add_option("--restarts", info.restarts, "Restarts for the optimized infidelity")->check(CLI::PositiveNumber);

  SimulateArgs sim;
  std::string spam_flag;
  auto *c_sim = app.add_subcommand("simulate", "Simulate the purity or loss protocol and write CSV files");
  c_sim->add_option("--config", sim.config, "Protocol JSON config");
  c_sim->add_option("--noise", sim.noise, "Channel specifier for the noise");
  c_sim->add_option("--max-delta", sim.max_delta, "Gate-dependent eigenvalue perturbation bound");
  c_sim->add_option("--seed", sim.seed, "Random seed");
  c_sim->add_option("--lengths", sim.lengths, "Sequence lengths: comma list, ranges as lo:hi[:step]");
  c_sim->add_option("--sequences", sim.sequences, "Sequences per length (K)")->check(CLI::PositiveNumber);
  c_sim->add_option("--shots", sim.shots, "Shots per observable (N)")->check(CLI::Range(2, 1 << 30));
  c_sim->add_option("--spam", sim.spam, "SPAM errors on|off")->check(CLI::IsMember({"on", "off"}));
  c_sim->add_option("--protocol", sim.protocol, "purity|loss")->check(CLI::IsMember({"purity", "loss"}));
  c_sim->add_flag("--exact", sim.exact, "Use exact expectations instead of shots");
  c_sim->add_option("--workers", sim.workers, "Worker threads")->check(CLI::NonNegativeNumber);
  c_sim->add_option("--out", sim.out, "Output directory");

  FitArgs fit;
  auto *c_fit = app.add_subcommand("fit", "Fit a decay model to an aggregate CSV");
  c_fit->add_option("csv", fit.csv, "Aggregate CSV")->required();
  c_fit->add_option("--model", fit.model, "tp|td|loss (default from the CSV header)")
      ->check(CLI::IsMember({"tp", "td", "loss"}));
  c_fit->add_option("--bootstrap", fit.bootstrap, "Bootstrap resamples for CIs (needs raw data; 0 = linearized)")
      ->check(CLI::NonNegativeNumber);
  c_fit->add_option("--out", fit.out, "Write the JSON report here instead of stdout");

  ScanArgs scan;
  auto *c_scan = app.add_subcommand("scan-ensemble", "Unitarity and infidelity of random channels by Kraus rank");
  c_scan->add_option("--ranks", scan.ranks, "Kraus ranks, comma separated");
  c_scan->add_option("--samples", scan.samples, "Samples per rank");
  c_scan->add_option("--seed", scan.seed, "Random seed");
  c_scan->add_option("--workers", scan.workers, "Worker threads")->check(CLI::NonNegativeNumber);
  c_scan->add_option("--out", scan.out, "Output CSV (default stdout)");

  VerifyArgs ver;
  auto *c_ver = app.add_subcommand("verify", "Run the verification suite");
  c_ver->add_option("--level", ver.level, "quick|full")->check(CLI::IsMember({"quick", "full"}));
  c_ver->add_option("--tolerance-scale", ver.tolerance_scale, "Multiply every tolerance (test hook)");
  c_ver->add_option("--seed", ver.seed, "Random seed");
  c_ver->add_option("--workers", ver.workers, "Worker threads")->check(CLI::NonNegativeNumber);
  c_ver->add_option("--out", ver.out, "Write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*c_info) return cmd_channel_info(info);
    if (*c_sim) return cmd_simulate(sim);
    if (*c_fit) return cmd_fit(fit);
    if (*c_scan) return cmd_scan_ensemble(scan);
    if (*c_ver) return cmd_verify(ver);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
