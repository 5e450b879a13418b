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

#ifndef UNITARITY_SERIALIZATION_HPP
#define UNITARITY_SERIALIZATION_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "unitarity/fitmodel.hpp"
#include "unitarity/metrics.hpp"
#include "unitarity/rbsim.hpp"

namespace unitarity {

using Json = nlohmann::json;

/// Malformed input file; `line` is 1-based, 0 when not line-oriented.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string &what, int line = 0);
  int line() const { return line_; }

 private:
  int line_;
};

// ---------------------------------------------------------------------------
// Channels and gate sets

/// {d, kind: "kraus", ops: [[[re, im], ...], ...]} with ops as row lists.
Json channel_to_json(const KrausChannel &channel);
/// {d, kind: "liouville", basis: "pauli", matrix: [[...], ...]}
Json channel_to_json(const Superoperator &channel);

using ChannelData = std::variant<KrausChannel, Superoperator>;
ChannelData channel_from_json(const Json &j);

/// JSON list of d x d complex matrices in the same layout as Kraus operators.
Json gateset_to_json(const GateSet &gates);
/// Re-verifies unitarity; optionally requires frame potential 2 to 1e-10.
GateSet gateset_from_json(const Json &j, bool require_2design = false);

// ---------------------------------------------------------------------------
// Reports

Json channel_report_to_json(const ChannelReport &report);
Json fit_report_to_json(const FitResult &fit);

// ---------------------------------------------------------------------------
// CSV (floats at 17 significant digits)

/// m,seq_index,purity_estimate (or m,seq_index,estimate for loss data)
void write_raw_csv(std::ostream &out, const DecayDataset &data);
/// m,mean_sq,stderr,K,N (purity) or m,mean,stderr,K,N (loss)
void write_aggregate_csv(std::ostream &out, const DecayDataset &data);
/// Reads an aggregate CSV; the header decides the kind. Throws FormatError with the line number.
DecayDataset read_aggregate_csv(std::istream &in);

std::string format_double(double x);

// ---------------------------------------------------------------------------
// Protocol configuration

/// Declarative protocol description; `to_config` realizes the noise and gate set.
struct ProtocolInputs {
  std::string noise = "compose:[reset:0.003,haar:1]";
  std::optional<double> max_delta;  // set: gate-dependent eigenvalue perturbations after `noise`
  std::uint64_t perturbation_seed = 1;
  std::optional<Json> gateset;  // empty: single-qubit Clifford group
  std::vector<int> lengths = ProtocolConfig::default_lengths();
  int sequences = 30;
  int shots = 150;
  bool exact = false;
  SpamModel spam;
  std::uint64_t seed = 1;
  int workers = 0;

  ProtocolConfig to_config() const;
};

/*
 * Keys (all optional): noise, max_delta, perturbation_seed, gateset, lengths,
 * sequences, shots, exact, spam (bool or {enabled, prep_angle, meas_angle,
 * scale_min, scale_max}), seed, workers. Unknown keys are rejected.
 */
ProtocolInputs inputs_from_json(const Json &j);
/// Full echo of every field, defaults included.
Json inputs_to_json(const ProtocolInputs &inputs);

}  // namespace unitarity

#endif  // UNITARITY_SERIALIZATION_HPP
