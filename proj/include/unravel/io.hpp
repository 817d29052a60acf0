// Copyright 2026 The Unravel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UNRAVEL_IO_HPP_
#define UNRAVEL_IO_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "unravel/structure.hpp"
#include "unravel/system.hpp"
#include "unravel/unraveling.hpp"

namespace unravel {

// Run configuration, JSON (de)serialization, and artifact emission.

struct RunSpec {
  std::string preset;                        // preset name, or empty when
  std::string system_file;                   // loading operators from a file
  std::map<std::string, double> parameters;  // preset parameter overrides
  std::string initial_state_file;            // empty: use the preset state
  Scheme scheme = Scheme::kDiffusive;
  int n_traj = 1;
  double t_final = 10.0;
  double dt = 0.0;  // 0: stability default from the integrator
  std::uint64_t base_seed = 1;
  long sample_stride = 100;
  std::vector<std::string> analyses;   // structure, steady-states, trajectory,
                                       // ensemble, localization, ergodicity,
                                       // update-rule
  std::vector<std::string> observables = {"purity"};  // for time-series CSVs
  std::string out_dir = ".";
  std::vector<std::string> formats = {"csv", "json"};
  int threads = 0;  // 0: TRAJ_THREADS env or serial
};

// Parses and fully validates a JSON config file. Malformed JSON raises
// ParseError with the parser's position message; a well-formed file with bad
// contents raises a single ValidationError listing every violation.
RunSpec parse_config(const std::string& path);

// Parses a config from an in-memory JSON string (same contract).
RunSpec parse_config_string(const std::string& text);

// Canonical JSON serialization; parse_config_string(serialize_config(s))
// reproduces s exactly.
std::string serialize_config(const RunSpec& spec);

// Builds the system and initial state a spec describes.
std::pair<QuantumSystem, DensityMatrix> materialize(const RunSpec& spec);

// Executes every requested analysis, writing artifacts into spec.out_dir:
// a manifest (config, seed policy, tolerances, versions), per-analysis JSON
// reports, and time-series CSVs with 17-significant-digit values. Returns 0
// on success, 1 for validation problems, 2 for numerical failures; on
// failure an error.json artifact describes the cause.
int run(const RunSpec& spec);

// Long-format CSV (trajectory_id, time, value, ensemble_mean) for one
// observable: "purity", "coherence", "sx", "sy", "sz" (d=2), "concurrence"
// (d=4), or "overlap:<k>" for the k-th registered projector series. Raises
// UnknownObservable for anything else, ValidationError when the records lack
// the data the observable needs.
void emit_plot_data(const std::vector<TrajectoryRecord>& records,
                    const std::string& observable, const std::string& path);

// JSON report fragments (also written by run()).
std::string structure_report_json(const SubspaceDecomposition& dec,
                                  const StationarySet& states,
                                  const DfsReport& dfs);

}  // namespace unravel

#endif  // UNRAVEL_IO_HPP_
