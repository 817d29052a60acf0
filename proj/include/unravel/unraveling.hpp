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

#ifndef UNRAVEL_UNRAVELING_HPP_
#define UNRAVEL_UNRAVELING_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "unravel/linalg.hpp"
#include "unravel/system.hpp"

namespace unravel {

// Stochastic integrators for the two measurement unravelings: photodetection
// (jump) and homodyne detection (diffusive). Euler-Maruyama order-1/2 steps
// with post-step renormalization; ensembles use counter-based seed derivation
// so they are reproducible and order-independent under parallel execution.

enum class Scheme { kJump, kDiffusive };

std::string scheme_name(Scheme scheme);
Scheme scheme_from_name(const std::string& name);

struct JumpEvent {
  double time = 0.0;
  int channel = 0;
};

struct TrajectoryRecord {
  Scheme scheme = Scheme::kDiffusive;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::vector<double> times;                  // sample grid
  std::vector<DensityMatrix> states;          // sampled states (optional)
  std::vector<JumpEvent> jump_events;         // jump scheme only
  DensityMatrix running_average;              // trapezoid average over samples
  std::vector<std::vector<double>> overlaps;  // [projector][sample]
  DensityMatrix final_state;
};

struct EnsembleStats {
  int n_traj = 0;
  Scheme scheme = Scheme::kDiffusive;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<DensityMatrix> mean_state_series;              // [sample]
  std::vector<std::vector<double>> terminal_overlap_samples;  // [projector][traj]
  std::vector<DensityMatrix> mean_fidelity_inputs;  // per-traj burned averages
  std::vector<std::vector<std::vector<double>>> overlap_series;  // [traj][proj][sample]
  std::vector<int> click_counts;             // per-traj clicks (jump scheme)
  std::vector<TrajectoryRecord> records;     // kept only on request
};

struct TrajectoryOptions {
  int sample_stride = 100;
  bool store_states = true;
};

struct EnsembleOptions {
  int sample_stride = 100;
  bool store_states = false;          // per-trajectory states inside records
  double burn_fraction = 0.7;         // burn-in share for per-traj averages
  bool store_mean_series = true;
  bool store_overlap_series = true;
  bool keep_records = false;
  int threads = 0;                    // 0: $TRAJ_THREADS or 1
};

// Result of one jump step: posterior state plus channels that clicked.
struct JumpStepResult {
  DensityMatrix state;
  std::vector<int> clicks;
};

// splitmix64-based derivation of per-trajectory seeds from a base seed.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

// Conservative step suggestion: 1e-3 / max(|H|, sum_k |L_k^dag L_k|).
double default_dt(const QuantumSystem& sys);

// One Euler-Maruyama step of the homodyne stochastic master equation with the
// externally supplied Wiener increments dW_k (one per channel), followed by
// trace renormalization and a positivity clip. Throws StepRejected when the
// pre-renormalization trace deviates from one by more than 0.1.
DensityMatrix step_diffusive(const QuantumSystem& sys, const DensityMatrix& rho,
                             double dt, const std::vector<double>& noise);

// One step of the photodetection unraveling driven by externally supplied
// uniform draws in [0,1) (one per channel). Channel k clicks when
// draw_k < <L_k^dag L_k> dt, collapsing the state; otherwise the no-click
// drift (including the nonlinear rate term) is applied. Throws DtTooLarge
// when any click probability reaches 0.05.
JumpStepResult step_jump(const QuantumSystem& sys, const DensityMatrix& rho,
                         double dt, const std::vector<double>& uniform_draws);

// Integrates one trajectory. Reproducible given (seed, dt, scheme). Pure
// initial states follow an equivalent rank-1 path so purity is preserved to
// machine precision. Overlaps are recorded for each supplied projector
// (validated as orthogonal idempotents) at every sample time.
TrajectoryRecord run_trajectory(const QuantumSystem& sys, const DensityMatrix& rho0,
                                Scheme scheme, double t_final, double dt,
                                std::uint64_t seed,
                                const std::vector<ComplexMatrix>& projectors,
                                const TrajectoryOptions& options = {});

// Runs n_traj independent trajectories with seeds derive_seed(base_seed, i)
// and assembles ensemble statistics with a fixed-order reduction, so results
// are identical for any thread count.
EnsembleStats run_ensemble(const QuantumSystem& sys, const DensityMatrix& rho0,
                           Scheme scheme, int n_traj, double t_final, double dt,
                           std::uint64_t base_seed,
                           const std::vector<ComplexMatrix>& projectors,
                           const EnsembleOptions& options = {});

// Trapezoid time average of the sampled states with times >= t_burn,
// revalidated as a density matrix. Requires stored states.
DensityMatrix time_average(const TrajectoryRecord& record, double t_burn);

}  // namespace unravel

#endif  // UNRAVEL_UNRAVELING_HPP_
