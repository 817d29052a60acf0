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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "unravel/errors.hpp"
#include "unravel/io.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = -1;
  std::vector<std::string> formats;
};

void add_common_flags(CLI::App* cmd, CommonFlags* flags, bool config_required) {
  auto* config = cmd->add_option("--config", flags->config, "JSON run config");
  if (config_required) config->required();
  cmd->add_option("--out", flags->out, "output directory override");
  cmd->add_option("--seed", flags->seed, "base seed override")
      ->each([flags](const std::string&) { flags->seed_set = true; });
  cmd->add_option("--threads", flags->threads,
                  "trajectory worker threads (TRAJ_THREADS as fallback)");
  cmd->add_option("--format", flags->formats, "artifact formats: csv, json");
}

unravel::RunSpec load_spec(const CommonFlags& flags) {
  unravel::RunSpec spec = unravel::parse_config(flags.config);
  if (!flags.out.empty()) spec.out_dir = flags.out;
  if (flags.seed_set) spec.base_seed = flags.seed;
  if (flags.threads >= 0) spec.threads = flags.threads;
  if (!flags.formats.empty()) spec.formats = flags.formats;
  return spec;
}

int run_with_analyses(const CommonFlags& flags,
                      const std::vector<std::string>& analyses) {
  unravel::RunSpec spec = load_spec(flags);
  if (!analyses.empty()) spec.analyses = analyses;
  return unravel::run(spec);
}

// Bundled figure pipelines: run the preset end to end and verify the headline
// statistic, returning 3 when the check fails. Every figure checks the
// conservation law (mean terminal overlap per minimal block equals the
// predicted weight within 5 sigma); the per-figure headline reflects how the
// trajectories actually localize:
//   fig7 / fig9  complete localization: settled-frequency z-scores <= 3
//                (fig7 additionally checks the ergodicity identity)
//   fig8         parity classification by the larger terminal overlap: 1/2
//   fig11        the protected mode pair never settles: unsettled fraction 1/2
//   two-qubit    both dark states are click-silent, so only clicking
//                trajectories settle: zero-click fraction 3/8
int reproduce(const std::string& figure, const CommonFlags& flags, int n_traj) {
  unravel::RunSpec spec;
  spec.out_dir = flags.out.empty() ? "reproduce-" + figure : flags.out;
  spec.n_traj = n_traj;
  bool check_z = false, check_ergodicity = false, check_classification = false,
       check_unsettled = false, check_zero_click = false;
  if (figure == "fig7") {
    spec.preset = "qubit";
    spec.scheme = unravel::Scheme::kDiffusive;
    spec.t_final = 40.0;
    spec.dt = 1e-3;
    spec.analyses = {"structure", "localization", "ergodicity"};
    check_z = check_ergodicity = true;
  } else if (figure == "two-qubit") {
    spec.preset = "two-qubit-dark";
    spec.scheme = unravel::Scheme::kJump;
    spec.t_final = 40.0;
    spec.dt = 5e-4;
    spec.analyses = {"structure", "ensemble", "localization"};
    check_zero_click = true;
  } else if (figure == "fig8") {
    spec.preset = "kerr";
    spec.scheme = unravel::Scheme::kDiffusive;
    spec.t_final = 10.0;
    spec.dt = 2e-5;
    spec.analyses = {"structure", "localization"};
    check_classification = true;
  } else if (figure == "fig9") {
    spec.preset = "scar";
    spec.scheme = unravel::Scheme::kDiffusive;
    spec.t_final = 50.0;
    spec.dt = 2e-4;
    spec.analyses = {"structure", "localization"};
    check_z = true;
  } else if (figure == "fig11") {
    spec.preset = "xx-ring";
    spec.scheme = unravel::Scheme::kDiffusive;
    spec.t_final = 40.0;
    spec.dt = 2.5e-4;
    spec.analyses = {"structure", "localization"};
    check_unsettled = true;
  } else {
    std::cerr << "unknown figure id '" << figure
              << "' (expected fig7, fig8, fig9, fig11, two-qubit)\n";
    return 1;
  }
  if (flags.seed_set) spec.base_seed = flags.seed;
  if (flags.threads >= 0) spec.threads = flags.threads;

  const int rc = unravel::run(spec);
  if (rc != 0) {
    std::cerr << "reproduce " << figure << ": run failed with exit code " << rc
              << " (see error.json)\n";
    return rc;
  }
  std::ifstream in(std::filesystem::path(spec.out_dir) / "analytics.json");
  nlohmann::json analytics;
  in >> analytics;
  const auto& loc = analytics.at("localization");
  const auto terminal =
      loc.at("terminal_overlaps").get<std::vector<std::vector<double>>>();
  const auto predicted = loc.at("predicted_weights").get<std::vector<double>>();
  const double n = terminal.empty() ? 0.0 : double(terminal.front().size());
  bool ok = n > 0.0;

  auto fail = [&ok, &figure](const std::string& what) {
    std::cerr << "reproduce " << figure << ": " << what << '\n';
    ok = false;
  };

  // Conservation law: the mean terminal overlap with each minimal block obeys
  // the initial conserved weight. Overlaps live in [0, 1], so the binomial
  // variance bounds the true one; a small floor keeps zero-weight bands open.
  for (std::size_t p = 0; ok && p < terminal.size(); ++p) {
    double mean = 0.0;
    for (double v : terminal[p]) mean += v;
    mean /= n;
    const double w = predicted[p];
    const double band = 5.0 * std::sqrt(std::max(w * (1.0 - w), 1e-4) / n);
    if (std::abs(mean - w) > band) {
      fail("mean overlap " + std::to_string(mean) + " of block " +
           std::to_string(p) + " drifted from conserved weight " +
           std::to_string(w));
    }
  }
  if (check_z) {
    for (const auto& z : loc.at("z_scores")) {
      if (!(std::abs(z.get<double>()) <= 3.0)) {
        fail("settled-frequency z-score " + std::to_string(z.get<double>()) +
             " beyond 3 sigma");
      }
    }
  }
  if (check_ergodicity) {
    const double f = analytics.at("ergodicity").at("mean_fidelity").get<double>();
    const double part =
        analytics.at("ergodicity").at("predicted_participation").get<double>();
    if (!(std::abs(f - part) <= 0.05)) {
      fail("mean fidelity " + std::to_string(f) +
           " misses the participation ratio " + std::to_string(part));
    }
  }
  if (check_classification && ok) {
    if (terminal.size() != 2) {
      fail("expected exactly two minimal blocks, found " +
           std::to_string(terminal.size()));
      return 3;
    }
    int first = 0;
    for (std::size_t i = 0; i < terminal.front().size(); ++i) {
      first += terminal[0][i] > terminal[1][i] ? 1 : 0;
    }
    const double freq = first / n;
    if (std::abs(freq - 0.5) > 3.0 * std::sqrt(0.25 / n)) {
      fail("parity classification frequency " + std::to_string(freq) +
           " beyond 3 sigma of 1/2");
    }
  }
  if (check_unsettled && ok) {
    int unsettled = 0;
    for (const auto& s : loc.at("terminal_subspace")) {
      unsettled += s.get<int>() < 0 ? 1 : 0;
    }
    const double freq = unsettled / n;
    if (std::abs(freq - 0.5) > 3.0 * std::sqrt(0.25 / n)) {
      fail("protected-pair fraction " + std::to_string(freq) +
           " beyond 3 sigma of 1/2");
    }
  }
  if (check_zero_click && ok) {
    int silent = 0;
    const auto clicks =
        analytics.at("ensemble").at("click_counts").get<std::vector<int>>();
    for (int c : clicks) silent += c == 0 ? 1 : 0;
    const double freq = silent / n;
    if (std::abs(freq - 0.375) > 3.0 * std::sqrt(0.375 * 0.625 / n)) {
      fail("zero-click fraction " + std::to_string(freq) +
           " beyond 3 sigma of 3/8");
    }
  }
  std::cout << "reproduce " << figure << ": " << (ok ? "PASS" : "FAIL")
            << " (artifacts in " << spec.out_dir << ")\n";
  return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "unravel: quantum trajectory unravelings, Hilbert-space structure, and "
      "asymptotic statistics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  CommonFlags flags;
  auto* structure = app.add_subcommand("structure", "block structure + DFS report");
  add_common_flags(structure, &flags, true);
  auto* steady =
      app.add_subcommand("steady-states", "all extremal stationary states");
  add_common_flags(steady, &flags, true);
  auto* trajectory = app.add_subcommand("trajectory", "single trajectory run");
  add_common_flags(trajectory, &flags, true);
  auto* ensemble = app.add_subcommand("ensemble", "trajectory ensemble run");
  add_common_flags(ensemble, &flags, true);
  auto* analyze =
      app.add_subcommand("analyze", "run every analysis listed in the config");
  add_common_flags(analyze, &flags, true);
  auto* repro = app.add_subcommand(
      "reproduce", "bundled preset pipeline with a headline statistic check");
  std::string figure;
  int repro_n_traj = 300;
  repro->add_option("figure", figure, "fig7, fig8, fig9, fig11, or two-qubit")
      ->required();
  repro->add_option("--n-traj", repro_n_traj, "trajectories for the ensemble");
  add_common_flags(repro, &flags, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (structure->parsed()) {
      return run_with_analyses(flags, {"structure", "steady-states"});
    }
    if (steady->parsed()) return run_with_analyses(flags, {"steady-states"});
    if (trajectory->parsed()) return run_with_analyses(flags, {"trajectory"});
    if (ensemble->parsed()) return run_with_analyses(flags, {"ensemble"});
    if (analyze->parsed()) return run_with_analyses(flags, {});
    if (repro->parsed()) return reproduce(figure, flags, repro_n_traj);
  } catch (const unravel::ParseError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const unravel::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const unravel::Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  return 0;
}
