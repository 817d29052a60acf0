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

#include "unravel/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "unravel/analytics.hpp"
#include "unravel/errors.hpp"
#include "unravel/lindblad.hpp"
#include "unravel/models.hpp"

namespace unravel {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

const std::set<std::string>& known_analyses() {
  static const std::set<std::string> names{
      "structure",    "steady-states", "trajectory", "ensemble",
      "localization", "ergodicity",    "update-rule"};
  return names;
}

std::string fmt17(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const ComplexVector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

Complex json_to_complex(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ValidationError(where + ": complex entries must be [re, im] pairs");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

ComplexMatrix json_to_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw ValidationError(where + ": expected a non-empty matrix");
  }
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].size());
  ComplexMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    if (static_cast<Index>(j[r].size()) != cols) {
      throw ValidationError(where + ": ragged matrix rows");
    }
    for (Index c = 0; c < cols; ++c) {
      m(r, c) = json_to_complex(j[r][c], where);
    }
  }
  return m;
}

std::string role_name(BlockRole role) {
  switch (role) {
    case BlockRole::kDecaying:
      return "decaying";
    case BlockRole::kMinimalAsymptotic:
      return "minimal-asymptotic";
    case BlockRole::kUnresolved:
      return "unresolved";
  }
  return "unresolved";
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("'") + path + "': " + e.what());
  }
}

RunSpec spec_from_json(const json& j) {
  RunSpec spec;
  std::vector<std::string> problems;
  const std::set<std::string> known_keys{
      "preset",       "system_file", "parameters", "initial_state_file",
      "scheme",       "n_traj",      "t_final",    "dt",
      "base_seed",    "sample_stride", "analyses", "observables",
      "out_dir",      "formats",     "threads"};
  if (!j.is_object()) {
    throw ValidationError("config root must be a JSON object");
  }
  for (const auto& item : j.items()) {
    if (!known_keys.count(item.key())) {
      problems.push_back("unknown field '" + item.key() + "'");
    }
  }
  const auto get_string = [&](const char* key, std::string* out) {
    if (!j.contains(key)) return;
    if (!j[key].is_string()) {
      problems.push_back(std::string("field '") + key + "' must be a string");
      return;
    }
    *out = j[key].get<std::string>();
  };
  get_string("preset", &spec.preset);
  get_string("system_file", &spec.system_file);
  get_string("initial_state_file", &spec.initial_state_file);
  get_string("out_dir", &spec.out_dir);
  if (j.contains("parameters")) {
    if (!j["parameters"].is_object()) {
      problems.push_back("field 'parameters' must be an object of numbers");
    } else {
      for (const auto& item : j["parameters"].items()) {
        if (!item.value().is_number()) {
          problems.push_back("parameter '" + item.key() + "' must be a number");
        } else {
          spec.parameters[item.key()] = item.value().get<double>();
        }
      }
    }
  }
  if (j.contains("scheme")) {
    if (!j["scheme"].is_string()) {
      problems.push_back("field 'scheme' must be 'jump' or 'diffusive'");
    } else {
      try {
        spec.scheme = scheme_from_name(j["scheme"].get<std::string>());
      } catch (const Error& e) {
        problems.push_back(e.what());
      }
    }
  }
  const auto get_number = [&](const char* key, auto* out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) {
      problems.push_back(std::string("field '") + key + "' must be numeric");
      return;
    }
    *out = j[key].get<std::remove_pointer_t<decltype(out)>>();
  };
  get_number("n_traj", &spec.n_traj);
  get_number("t_final", &spec.t_final);
  get_number("dt", &spec.dt);
  get_number("base_seed", &spec.base_seed);
  get_number("sample_stride", &spec.sample_stride);
  get_number("threads", &spec.threads);
  const auto get_string_list = [&](const char* key, std::vector<std::string>* out) {
    if (!j.contains(key)) return;
    if (!j[key].is_array()) {
      problems.push_back(std::string("field '") + key + "' must be a string array");
      return;
    }
    out->clear();
    for (const auto& entry : j[key]) {
      if (!entry.is_string()) {
        problems.push_back(std::string("field '") + key + "' must hold strings");
        return;
      }
      out->push_back(entry.get<std::string>());
    }
  };
  get_string_list("analyses", &spec.analyses);
  get_string_list("observables", &spec.observables);
  get_string_list("formats", &spec.formats);

  // Semantic validation: report every violation at once.
  if (spec.preset.empty() && spec.system_file.empty()) {
    problems.push_back("one of 'preset' or 'system_file' is required");
  }
  if (!spec.preset.empty() && !spec.system_file.empty()) {
    problems.push_back("'preset' and 'system_file' are mutually exclusive");
  }
  if (!spec.preset.empty()) {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), spec.preset) == names.end()) {
      problems.push_back("unknown preset '" + spec.preset + "'");
    }
  }
  if (!spec.system_file.empty()) {
    if (!std::filesystem::exists(spec.system_file)) {
      problems.push_back("system_file '" + spec.system_file + "' does not exist");
    }
    if (spec.initial_state_file.empty()) {
      problems.push_back("'initial_state_file' is required with 'system_file'");
    }
  }
  if (!spec.initial_state_file.empty() &&
      !std::filesystem::exists(spec.initial_state_file)) {
    problems.push_back("initial_state_file '" + spec.initial_state_file +
                       "' does not exist");
  }
  if (spec.n_traj < 1) problems.push_back("'n_traj' must be at least 1");
  if (!(spec.t_final > 0.0)) problems.push_back("'t_final' must be positive");
  if (spec.dt < 0.0) problems.push_back("'dt' must be nonnegative");
  if (spec.sample_stride < 1) problems.push_back("'sample_stride' must be >= 1");
  if (spec.threads < 0) problems.push_back("'threads' must be nonnegative");
  for (const std::string& a : spec.analyses) {
    if (!known_analyses().count(a)) problems.push_back("unknown analysis '" + a + "'");
  }
  for (const std::string& f : spec.formats) {
    if (f != "csv" && f != "json") problems.push_back("unknown format '" + f + "'");
  }
  if (!problems.empty()) {
    std::string joined = "invalid config: ";
    for (std::size_t i = 0; i < problems.size(); ++i) {
      if (i > 0) joined += "; ";
      joined += problems[i];
    }
    throw ValidationError(joined);
  }
  return spec;
}

double record_value(const TrajectoryRecord& record, std::size_t sample,
                    const std::string& observable, int overlap_index) {
  if (overlap_index >= 0) {
    return record.overlaps[static_cast<std::size_t>(overlap_index)][sample];
  }
  const DensityMatrix& state = record.states[sample];
  if (observable == "purity") return purity(state);
  if (observable == "coherence") {
    double total = 0.0;
    for (Index i = 0; i < state.dim; ++i) {
      for (Index j = 0; j < state.dim; ++j) {
        if (i != j) total += std::abs(state.matrix(i, j));
      }
    }
    return total;
  }
  if (observable == "concurrence") return concurrence(state);
  // sx, sy, sz on a qubit.
  const ComplexMatrix& rho = state.matrix;
  if (observable == "sx") return 2.0 * rho(0, 1).real();
  if (observable == "sy") return -2.0 * rho(0, 1).imag();
  return (rho(0, 0) - rho(1, 1)).real();
}

}  // namespace

RunSpec parse_config(const std::string& path) {
  return spec_from_json(read_json_file(path));
}

RunSpec parse_config_string(const std::string& text) {
  try {
    return spec_from_json(json::parse(text));
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
}

std::string serialize_config(const RunSpec& spec) {
  json j;
  if (!spec.preset.empty()) j["preset"] = spec.preset;
  if (!spec.system_file.empty()) j["system_file"] = spec.system_file;
  if (!spec.parameters.empty()) j["parameters"] = spec.parameters;
  if (!spec.initial_state_file.empty()) {
    j["initial_state_file"] = spec.initial_state_file;
  }
  j["scheme"] = scheme_name(spec.scheme);
  j["n_traj"] = spec.n_traj;
  j["t_final"] = spec.t_final;
  j["dt"] = spec.dt;
  j["base_seed"] = spec.base_seed;
  j["sample_stride"] = spec.sample_stride;
  j["analyses"] = spec.analyses;
  j["observables"] = spec.observables;
  j["out_dir"] = spec.out_dir;
  j["formats"] = spec.formats;
  j["threads"] = spec.threads;
  return j.dump(2);
}

std::pair<QuantumSystem, DensityMatrix> materialize(const RunSpec& spec) {
  QuantumSystem sys;
  DensityMatrix rho0;
  if (!spec.preset.empty()) {
    Preset preset = make_preset(spec.preset, spec.parameters);
    sys = std::move(preset.system);
    rho0 = std::move(preset.initial_state);
  } else {
    const json j = read_json_file(spec.system_file);
    const ComplexMatrix h = json_to_matrix(j.at("hamiltonian"), "system_file");
    std::vector<ComplexMatrix> jumps;
    std::vector<std::string> labels;
    if (j.contains("jumps")) {
      for (const auto& entry : j["jumps"]) {
        jumps.push_back(json_to_matrix(entry, "system_file"));
      }
    }
    if (j.contains("labels")) {
      for (const auto& entry : j["labels"]) labels.push_back(entry.get<std::string>());
    }
    sys = new_system(h, jumps, labels);
  }
  if (!spec.initial_state_file.empty()) {
    const json j = read_json_file(spec.initial_state_file);
    if (j.contains("vector")) {
      ComplexVector v(static_cast<Index>(j["vector"].size()));
      for (Index i = 0; i < v.size(); ++i) {
        v(i) = json_to_complex(j["vector"][i], "initial_state_file");
      }
      rho0 = to_density(make_pure(v));
    } else if (j.contains("matrix")) {
      DensityMatrix candidate;
      candidate.matrix = json_to_matrix(j["matrix"], "initial_state_file");
      candidate.dim = candidate.matrix.rows();
      rho0 = validate_density(candidate.matrix);
    } else {
      throw ValidationError("initial_state_file: expected 'vector' or 'matrix'");
    }
  }
  if (rho0.dim != sys.dim) {
    throw DimensionMismatch("initial state dimension does not match the system");
  }
  return {std::move(sys), std::move(rho0)};
}

std::string structure_report_json(const SubspaceDecomposition& dec,
                                  const StationarySet& states,
                                  const DfsReport& dfs) {
  json j;
  j["epsilon"] = dec.epsilon;
  j["seed"] = dec.seed;
  json blocks = json::array();
  for (std::size_t b = 0; b < dec.blocks.size(); ++b) {
    json blk;
    blk["start"] = dec.blocks[b].start;
    blk["size"] = dec.blocks[b].size;
    blk["role"] = role_name(dec.roles[b]);
    blk["family"] = dec.family_ids[b];
    blocks.push_back(std::move(blk));
  }
  j["blocks"] = std::move(blocks);
  j["transform"] = matrix_to_json(dec.transform);
  json stationary = json::array();
  for (std::size_t s = 0; s < states.states.size(); ++s) {
    json entry;
    entry["matrix"] = matrix_to_json(states.states[s].matrix);
    entry["support_dimension"] =
        std::lround(states.supports[s].trace().real());
    stationary.push_back(std::move(entry));
  }
  j["stationary_states"] = std::move(stationary);
  json overlaps = json::array();
  for (Index r = 0; r < states.pairwise_overlaps.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < states.pairwise_overlaps.cols(); ++c) {
      row.push_back(states.pairwise_overlaps(r, c));
    }
    overlaps.push_back(std::move(row));
  }
  j["pairwise_overlaps"] = std::move(overlaps);
  json dfs_json;
  json dfs_states = json::array();
  for (const PureState& q : dfs.dfs_states) {
    dfs_states.push_back(vector_to_json(q.amplitudes));
  }
  dfs_json["states"] = std::move(dfs_states);
  dfs_json["hamiltonian_eigenvalues"] = dfs.hamiltonian_eigenvalues;
  json jump_eigs = json::array();
  for (const auto& per_state : dfs.jump_eigenvalues) {
    json row = json::array();
    for (const Complex& c : per_state) row.push_back(complex_to_json(c));
    jump_eigs.push_back(std::move(row));
  }
  dfs_json["jump_eigenvalues"] = std::move(jump_eigs);
  dfs_json["grouping"] = dfs.grouping;
  j["dfs"] = std::move(dfs_json);
  return j.dump(2);
}

void emit_plot_data(const std::vector<TrajectoryRecord>& records,
                    const std::string& observable, const std::string& path) {
  if (records.empty()) {
    throw ValidationError("emit_plot_data: no trajectory records");
  }
  int overlap_index = -1;
  if (observable.rfind("overlap:", 0) == 0) {
    try {
      overlap_index = std::stoi(observable.substr(8));
    } catch (const std::exception&) {
      throw UnknownObservable("emit_plot_data: bad overlap index in '" +
                              observable + "'");
    }
  } else if (observable != "purity" && observable != "coherence" &&
             observable != "concurrence" && observable != "sx" &&
             observable != "sy" && observable != "sz") {
    throw UnknownObservable("emit_plot_data: unknown observable '" + observable +
                            "'");
  }
  const std::size_t n_samples = records.front().times.size();
  for (const TrajectoryRecord& record : records) {
    if (record.times.size() != n_samples) {
      throw ValidationError("emit_plot_data: records have mismatched sampling");
    }
    if (overlap_index >= 0) {
      if (static_cast<std::size_t>(overlap_index) >= record.overlaps.size()) {
        throw ValidationError("emit_plot_data: overlap index out of range");
      }
    } else if (record.states.size() != n_samples) {
      throw ValidationError(
          "emit_plot_data: observable needs stored states (store_states)");
    }
    if ((observable == "sx" || observable == "sy" || observable == "sz") &&
        records.front().states.front().dim != 2) {
      throw ValidationError("emit_plot_data: polarization requires a qubit");
    }
  }

  std::vector<double> mean(n_samples, 0.0);
  for (const TrajectoryRecord& record : records) {
    for (std::size_t s = 0; s < n_samples; ++s) {
      mean[s] += record_value(record, s, observable, overlap_index);
    }
  }
  for (double& m : mean) m /= static_cast<double>(records.size());

  std::ofstream out(path);
  if (!out) throw ValidationError("emit_plot_data: cannot write '" + path + "'");
  out << "trajectory_id,time,value,ensemble_mean\n";
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (std::size_t s = 0; s < n_samples; ++s) {
      out << r << ',' << fmt17(records[r].times[s]) << ','
          << fmt17(record_value(records[r], s, observable, overlap_index)) << ','
          << fmt17(mean[s]) << '\n';
    }
  }
}

int run(const RunSpec& spec) {
  namespace fs = std::filesystem;
  const auto artifact = [&](const std::string& name) {
    return (fs::path(spec.out_dir) / name).string();
  };
  const auto write_text = [&](const std::string& name, const std::string& text) {
    std::ofstream out(artifact(name));
    out << text << '\n';
  };
  const auto fail = [&](const char* kind, const std::string& message, int code) {
    json err;
    err["error"] = kind;
    err["message"] = message;
    std::error_code ignored;
    fs::create_directories(spec.out_dir, ignored);
    write_text("error.json", err.dump(2));
    return code;
  };
  try {
    fs::create_directories(spec.out_dir);
    const bool want_json =
        std::find(spec.formats.begin(), spec.formats.end(), "json") !=
        spec.formats.end();
    const bool want_csv =
        std::find(spec.formats.begin(), spec.formats.end(), "csv") !=
        spec.formats.end();
    const auto requested = [&](const char* name) {
      return std::find(spec.analyses.begin(), spec.analyses.end(), name) !=
             spec.analyses.end();
    };

    auto [sys, rho0] = materialize(spec);
    const double dt = spec.dt > 0.0 ? spec.dt : default_dt(sys);

    const bool need_structure = requested("structure") ||
                                requested("steady-states") ||
                                requested("localization") ||
                                requested("update-rule");
    SubspaceDecomposition dec;
    StationarySet stationary;
    std::vector<ComplexMatrix> projectors;
    std::vector<std::size_t> minimal_blocks;
    if (need_structure) {
      std::tie(dec, stationary) = find_all_stationary_states(sys);
      for (std::size_t b = 0; b < dec.blocks.size(); ++b) {
        if (dec.roles[b] == BlockRole::kMinimalAsymptotic) {
          minimal_blocks.push_back(b);
          projectors.push_back(block_projector(dec, b));
        }
      }
    }

    if (requested("structure") && want_json) {
      write_text("structure.json",
                 structure_report_json(dec, stationary, detect_dfs(sys)));
    }
    if (requested("steady-states") && want_json) {
      json j;
      json states = json::array();
      for (std::size_t s = 0; s < stationary.states.size(); ++s) {
        json entry;
        entry["matrix"] = matrix_to_json(stationary.states[s].matrix);
        entry["residual"] =
            apply_generator(sys, stationary.states[s].matrix).norm();
        states.push_back(std::move(entry));
      }
      j["states"] = std::move(states);
      write_text("steady_states.json", j.dump(2));
    }

    if (requested("trajectory")) {
      TrajectoryOptions options;
      options.sample_stride = spec.sample_stride;
      options.store_states = true;
      const TrajectoryRecord record =
          run_trajectory(sys, rho0, spec.scheme, spec.t_final, dt,
                         derive_seed(spec.base_seed, 0), projectors, options);
      if (want_csv) {
        std::vector<TrajectoryRecord> single{record};
        for (const std::string& obs : spec.observables) {
          std::string tag = obs;
          std::replace(tag.begin(), tag.end(), ':', '-');
          emit_plot_data(single, obs, artifact("trajectory_" + tag + ".csv"));
        }
      }
      if (want_json) {
        json j;
        j["scheme"] = scheme_name(record.scheme);
        j["seed"] = record.seed;
        j["dt"] = record.dt;
        j["n_jumps"] = record.jump_events.size();
        j["final_purity"] = purity(record.final_state);
        write_text("trajectory.json", j.dump(2));
      }
    }

    const bool need_ensemble = requested("ensemble") || requested("localization") ||
                               requested("ergodicity") || requested("update-rule");
    EnsembleStats ensemble;
    if (need_ensemble) {
      EnsembleOptions options;
      options.sample_stride = spec.sample_stride;
      options.threads = spec.threads;
      options.keep_records = true;
      options.store_states = requested("ensemble") || requested("update-rule");
      ensemble = run_ensemble(sys, rho0, spec.scheme, spec.n_traj, spec.t_final,
                              dt, spec.base_seed, projectors, options);
    }

    json analytics;
    if (requested("ensemble")) {
      if (want_csv) {
        for (const std::string& obs : spec.observables) {
          std::string tag = obs;
          std::replace(tag.begin(), tag.end(), ':', '-');
          emit_plot_data(ensemble.records, obs, artifact("ensemble_" + tag + ".csv"));
        }
      }
      json j;
      j["n_traj"] = ensemble.n_traj;
      j["scheme"] = scheme_name(ensemble.scheme);
      j["dt"] = ensemble.dt;
      j["click_counts"] = ensemble.click_counts;
      analytics["ensemble"] = std::move(j);
    }
    if (requested("localization")) {
      std::vector<double> predicted;
      for (const ComplexMatrix& p : projectors) {
        predicted.push_back(std::clamp(
            (infinite_time_projector(sys, p) * rho0.matrix).trace().real(), 0.0,
            1.0));
      }
      const LocalizationReport report =
          localization_statistics(ensemble, dec, predicted);
      json j;
      j["projector_ids"] = report.projector_ids;
      j["frequencies"] = report.frequencies;
      j["predicted_weights"] = report.predicted_weights;
      j["z_scores"] = report.z_scores;
      j["terminal_subspace"] = report.terminal_subspace;
      j["terminal_overlaps"] = report.terminal_overlaps;
      analytics["localization"] = std::move(j);
    }
    if (requested("ergodicity")) {
      const DensityMatrix rho_s = time_averaged_asymptotic_state(sys, rho0);
      const ErgodicityReport report = mean_fidelity(ensemble, rho_s);
      json j;
      j["fidelities"] = report.fidelities;
      j["mean_fidelity"] = report.mean_fidelity;
      j["predicted_participation"] = report.predicted_participation;
      analytics["ergodicity"] = std::move(j);
    }
    if (requested("update-rule")) {
      const UpdateRuleReport report =
          verify_update_rule(sys, rho0, ensemble.records, dec);
      json j;
      j["terminal_subspace"] = report.terminal_subspace;
      j["average_distances"] = report.average_distances;
      j["selection_frequencies"] = report.selection_frequencies;
      j["predicted_frequencies"] = report.predicted_frequencies;
      j["restricted_systems_valid"] = report.restricted_systems_valid;
      j["passed"] = report.passed;
      analytics["update_rule"] = std::move(j);
    }
    if (!analytics.empty() && want_json) {
      write_text("analytics.json", analytics.dump(2));
    }

    json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = json::parse(serialize_config(spec));
    manifest["effective_dt"] = dt;
    manifest["seed_policy"] =
        "trajectory i uses splitmix64(base_seed xor splitmix64(i))";
    json tolerances;
    tolerances["density_trace"] = 1e-8;
    tolerances["density_hermiticity"] = 1e-10;
    tolerances["projector"] = 1e-8;
    tolerances["stationary_residual"] = 1e-7;
    tolerances["block_epsilon"] = dec.blocks.empty() ? 1e-9 : dec.epsilon;
    manifest["tolerances"] = std::move(tolerances);
    write_text("manifest.json", manifest.dump(2));
    return 0;
  } catch (const ParseError& e) {
    return fail("parse", e.what(), 1);
  } catch (const ValidationError& e) {
    return fail("validation", e.what(), 1);
  } catch (const Error& e) {
    return fail("numerical", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 2);
  }
}

}  // namespace unravel
