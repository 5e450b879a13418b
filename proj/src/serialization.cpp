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

#include "unitarity/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "unitarity/ensembles.hpp"

namespace unitarity {

namespace {

Json complex_matrix_to_json(const CMatrix &m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

double number(const Json &j, const std::string &where) {
  if (!j.is_number()) throw FormatError(where + ": expected a number");
  return j.get<double>();
}

CMatrix complex_matrix_from_json(const Json &j, int d, const std::string &where) {
  if (!j.is_array() || static_cast<int>(j.size()) != d) {
    throw FormatError(where + ": expected " + std::to_string(d) + " rows");
  }
  CMatrix out(d, d);
  for (int i = 0; i < d; ++i) {
    const Json &row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != d) {
      throw FormatError(where + ": row " + std::to_string(i) + " must have " + std::to_string(d) + " entries");
    }
    for (int k = 0; k < d; ++k) {
      const Json &e = row[k];
      if (e.is_number()) {
        out(i, k) = Complex(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2) {
        out(i, k) = Complex(number(e[0], where), number(e[1], where));
      } else {
        throw FormatError(where + ": entry (" + std::to_string(i) + "," + std::to_string(k) +
                          ") must be [re, im] or a number");
      }
    }
  }
  return out;
}

int matrix_dim(const Json &j, const std::string &where) {
  if (!j.is_array() || j.empty()) throw FormatError(where + ": expected a non-empty matrix");
  return static_cast<int>(j.size());
}

void write_row(std::ostream &out, std::initializer_list<std::string> fields) {
  bool first = true;
  for (const auto &f : fields) {
    if (!first) out << ',';
    out << f;
    first = false;
  }
  out << '\n';
}

std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string &field, int line, const std::string &column) {
  const std::string t = trim(field);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception &) {
    throw FormatError("column '" + column + "': '" + t + "' is not a number", line);
  }
  if (used != t.size() || !std::isfinite(v)) {
    throw FormatError("column '" + column + "': '" + t + "' is not a finite number", line);
  }
  return v;
}

int parse_int(const std::string &field, int line, const std::string &column) {
  const double v = parse_double(field, line, column);
  if (v != std::floor(v) || v < 0 || v > 2147483647.0) {
    throw FormatError("column '" + column + "': expected a non-negative integer", line);
  }
  return static_cast<int>(v);
}

Json spam_to_json(const SpamModel &s) {
  return Json{{"enabled", s.enabled},     {"prep_angle", s.prep_angle}, {"meas_angle", s.meas_angle},
              {"scale_min", s.scale_min}, {"scale_max", s.scale_max}};
}

}  // namespace

FormatError::FormatError(const std::string &what, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

// ---------------------------------------------------------------------------

Json channel_to_json(const KrausChannel &channel) {
  Json ops = Json::array();
  for (const auto &k : channel.ops()) ops.push_back(complex_matrix_to_json(k));
  return Json{{"d", channel.dim()}, {"kind", "kraus"}, {"ops", ops}};
}

Json channel_to_json(const Superoperator &channel) {
  Json rows = Json::array();
  const RMatrix &m = channel.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return Json{{"d", channel.dim()}, {"kind", "liouville"}, {"basis", "pauli"}, {"matrix", rows}};
}

ChannelData channel_from_json(const Json &j) {
  if (!j.is_object()) throw FormatError("channel: expected a JSON object");
  if (!j.contains("d") || !j["d"].is_number_integer()) throw FormatError("channel: missing integer 'd'");
  const int d = j["d"].get<int>();
  if (d < 1) throw FormatError("channel: 'd' must be positive");
  const std::string kind = j.value("kind", "");
  if (kind == "kraus") {
    if (!j.contains("ops") || !j["ops"].is_array() || j["ops"].empty()) {
      throw FormatError("channel: 'ops' must be a non-empty list");
    }
    std::vector<CMatrix> ops;
    for (std::size_t i = 0; i < j["ops"].size(); ++i) {
      ops.push_back(complex_matrix_from_json(j["ops"][i], d, "channel op " + std::to_string(i)));
    }
    return KrausChannel(std::move(ops));
  }
  if (kind == "liouville") {
    if (j.value("basis", "pauli") != "pauli") throw FormatError("channel: only the 'pauli' basis is supported");
    const Json &rows = j.value("matrix", Json());
    const int n = d * d;
    if (!rows.is_array() || static_cast<int>(rows.size()) != n) {
      throw FormatError("channel: 'matrix' must have d^2 rows");
    }
    RMatrix m(n, n);
    for (int r = 0; r < n; ++r) {
      if (!rows[r].is_array() || static_cast<int>(rows[r].size()) != n) {
        throw FormatError("channel: matrix row " + std::to_string(r) + " must have d^2 entries");
      }
      for (int c = 0; c < n; ++c) m(r, c) = number(rows[r][c], "channel matrix");
    }
    return Superoperator(pauli_basis_for_dim(d), m);
  }
  throw FormatError("channel: 'kind' must be \"kraus\" or \"liouville\"");
}

Json gateset_to_json(const GateSet &gates) {
  Json out = Json::array();
  for (const auto &u : gates.unitaries()) out.push_back(complex_matrix_to_json(u));
  return out;
}

GateSet gateset_from_json(const Json &j, bool require_2design) {
  if (!j.is_array() || j.empty()) throw FormatError("gate set: expected a non-empty list of matrices");
  const int d = matrix_dim(j[0], "gate set element 0");
  std::vector<CMatrix> elements;
  for (std::size_t i = 0; i < j.size(); ++i) {
    elements.push_back(complex_matrix_from_json(j[i], d, "gate set element " + std::to_string(i)));
  }
  GateSet gates(std::move(elements), "file");
  if (require_2design) {
    const double fp = frame_potential_2(gates);
    if (std::abs(fp - 2.0) > 1e-10) {
      throw FormatError("gate set: frame potential " + format_double(fp) + " differs from 2");
    }
  }
  return gates;
}

// ---------------------------------------------------------------------------

Json channel_report_to_json(const ChannelReport &r) {
  Json out{{"d", r.d},
           {"unitarity", r.unitarity},
           {"survival", r.survival},
           {"infidelity", r.infidelity},
           {"optimized_infidelity_upper", r.optimized_infidelity_upper},
           {"lambda_plus", r.lambda_plus},
           {"lambda_minus", r.lambda_minus},
           {"lambda_sum", r.lambda_plus + r.lambda_minus},
           {"norm_bound_residuals",
            {{"nonunital", r.norm_bounds.nonunital_residual},
             {"sdl", r.norm_bounds.sdl_residual},
             {"tp", r.norm_bounds.tp ? Json(r.norm_bounds.tp_residual) : Json()},
             {"passed", r.norm_bounds.passed}}},
           {"jamiolkowski_residual", r.jamiolkowski_residual},
           {"warnings", r.warnings}};
  if (r.d == 2) {
    out["chain_residuals"] = {{"first", r.chain.first_residual},
                              {"second", r.chain.second_applicable ? Json(r.chain.second_residual) : Json()},
                              {"passed", r.chain.passed}};
  } else {
    out["chain_residuals"] = Json();
  }
  return out;
}

Json fit_report_to_json(const FitResult &fit) {
  Json params = Json::object();
  Json ci = Json::object();
  Json stderrs = Json::object();
  for (const auto &p : fit.params) {
    params[p.name] = p.value;
    ci[p.name] = {p.ci_low, p.ci_high};
    stderrs[p.name] = p.std_error;
  }
  Json out{{"model", fit.model},
           {"params", params},
           {"ci95", ci},
           {"stderr", stderrs},
           {"rms_residual", fit.rms_residual},
           {"converged", fit.converged},
           {"iterations", fit.iterations},
           {"condition_number", std::isfinite(fit.condition_number) ? Json(fit.condition_number) : Json()},
           {"fallback", fit.fallback},
           {"warnings", fit.warnings}};
  if (fit.lambda_sum) out["lambda_sum"] = *fit.lambda_sum;
  return out;
}

// ---------------------------------------------------------------------------

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_raw_csv(std::ostream &out, const DecayDataset &data) {
  write_row(out, {"m", "seq_index", data.kind == "loss" ? "estimate" : "purity_estimate"});
  for (const auto &r : data.raw) write_row(out, {std::to_string(r.m), std::to_string(r.seq_index), format_double(r.value)});
}

void write_aggregate_csv(std::ostream &out, const DecayDataset &data) {
  write_row(out, {"m", data.kind == "loss" ? "mean" : "mean_sq", "stderr", "K", "N"});
  for (const auto &r : data.rows) {
    write_row(out, {std::to_string(r.m), format_double(r.mean), format_double(r.std_error),
                    std::to_string(r.sequences), std::to_string(r.shots)});
  }
}

DecayDataset read_aggregate_csv(std::istream &in) {
  std::string line;
  int number = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++number;
    if (!trim(line).empty()) {
      header = split_csv(line);
      break;
    }
  }
  if (header.empty()) throw FormatError("empty CSV", number);
  for (auto &h : header) h = trim(h);
  DecayDataset out;
  if (header == std::vector<std::string>{"m", "mean_sq", "stderr", "K", "N"}) {
    out.kind = "purity";
  } else if (header == std::vector<std::string>{"m", "mean", "stderr", "K", "N"}) {
    out.kind = "loss";
  } else {
    throw FormatError("header must be 'm,mean_sq,stderr,K,N' or 'm,mean,stderr,K,N'", number);
  }
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw FormatError("expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()),
                        number);
    }
    DecayRow row;
    row.m = parse_int(fields[0], number, "m");
    if (row.m < 1) throw FormatError("column 'm': must be >= 1", number);
    row.mean = parse_double(fields[1], number, header[1]);
    row.std_error = parse_double(fields[2], number, "stderr");
    if (row.std_error < 0.0) throw FormatError("column 'stderr': must be >= 0", number);
    row.sequences = parse_int(fields[3], number, "K");
    row.shots = parse_int(fields[4], number, "N");
    out.rows.push_back(row);
  }
  if (out.rows.empty()) throw FormatError("CSV has no data rows", number);
  return out;
}

// ---------------------------------------------------------------------------

ProtocolConfig ProtocolInputs::to_config() const {
  ProtocolConfig c;
  if (gateset) c.gates = gateset_from_json(*gateset);
  const KrausChannel base = parse_channel_spec(noise);
  if (max_delta) {
    RngStream rng(perturbation_seed, {purpose(StreamPurpose::kPerturbation)});
    c.noise = eigenvalue_perturbed_gates(c.gates.unitaries(), *max_delta, rng).after(base);
  } else {
    c.noise = base;
  }
  c.lengths = lengths;
  c.sequences = sequences;
  c.shots = shots;
  c.exact_expectations = exact;
  c.spam = spam;
  c.seed = seed;
  c.workers = workers;
  return c;
}

ProtocolInputs inputs_from_json(const Json &j) {
  if (!j.is_object()) throw FormatError("config: expected a JSON object");
  static const std::set<std::string> known{"noise", "max_delta", "perturbation_seed", "gateset",
                                           "lengths", "sequences", "shots", "exact",
                                           "spam", "seed", "workers"};
  std::vector<std::string> problems;
  for (const auto &[key, value] : j.items()) {
    if (!known.count(key)) problems.push_back("unknown key '" + key + "'");
  }
  ProtocolInputs in;
  auto get = [&](const char *key, auto &target, auto check) {
    if (!j.contains(key) || j.at(key).is_null()) return;
    try {
      using T = std::decay_t<decltype(target)>;
      T v = j.at(key).get<T>();
      if (!check(v)) {
        problems.push_back(std::string("'") + key + "' out of range");
        return;
      }
      target = v;
    } catch (const Json::exception &) {
      problems.push_back(std::string("'") + key + "' has the wrong type");
    }
  };
  auto any = [](const auto &) { return true; };
  get("noise", in.noise, any);
  if (j.contains("max_delta") && !j["max_delta"].is_null()) {
    double d = 0.0;
    get("max_delta", d, [](double v) { return v >= 0.0; });
    in.max_delta = d;
  }
  get("perturbation_seed", in.perturbation_seed, any);
  if (j.contains("gateset") && !j["gateset"].is_null() && j["gateset"] != "clifford_1q") {
    in.gateset = j["gateset"];
  }
  get("lengths", in.lengths, [](const std::vector<int> &v) {
    return !v.empty() && std::all_of(v.begin(), v.end(), [](int m) { return m >= 1; });
  });
  get("sequences", in.sequences, [](int v) { return v >= 1; });
  get("shots", in.shots, [](int v) { return v >= 2; });
  get("exact", in.exact, any);
  get("seed", in.seed, any);
  get("workers", in.workers, [](int v) { return v >= 0; });
  if (j.contains("spam")) {
    const Json &s = j["spam"];
    if (s.is_boolean()) {
      in.spam.enabled = s.get<bool>();
    } else if (s.is_object()) {
      in.spam.enabled = s.value("enabled", true);
      in.spam.prep_angle = s.value("prep_angle", in.spam.prep_angle);
      in.spam.meas_angle = s.value("meas_angle", in.spam.meas_angle);
      in.spam.scale_min = s.value("scale_min", in.spam.scale_min);
      in.spam.scale_max = s.value("scale_max", in.spam.scale_max);
    } else {
      problems.push_back("'spam' must be a boolean or an object");
    }
  }
  if (!problems.empty()) {
    std::string msg = "config:";
    for (const auto &p : problems) msg += " " + p + ";";
    throw FormatError(msg);
  }
  return in;
}

Json inputs_to_json(const ProtocolInputs &in) {
  Json out{{"noise", in.noise},
           {"max_delta", in.max_delta ? Json(*in.max_delta) : Json()},
           {"perturbation_seed", in.perturbation_seed},
           {"gateset", in.gateset ? *in.gateset : Json("clifford_1q")},
           {"lengths", in.lengths},
           {"sequences", in.sequences},
           {"shots", in.shots},
           {"exact", in.exact},
           {"spam", spam_to_json(in.spam)},
           {"seed", in.seed},
           {"workers", in.workers}};
  return out;
}

}  // namespace unitarity
