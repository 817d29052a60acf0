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

#ifndef UNRAVEL_ANALYTICS_HPP_
#define UNRAVEL_ANALYTICS_HPP_

#include <string>
#include <vector>

#include "unravel/linalg.hpp"
#include "unravel/structure.hpp"
#include "unravel/system.hpp"
#include "unravel/unraveling.hpp"

namespace unravel {

// Asymptotic diagnostics: localization statistics against predicted weights,
// invariant-state predicates, incomplete-localization classification,
// ergodicity measures, coherence and entanglement witnesses.

struct LocalizationReport {
  std::vector<std::string> projector_ids;
  std::vector<std::vector<double>> terminal_overlaps;  // [projector][traj]
  std::vector<double> frequencies;      // share of trajectories settled per id
  std::vector<double> predicted_weights;
  std::vector<double> z_scores;         // binomial z per projector
  std::vector<bool> localization_complete;  // per trajectory
  std::vector<int> terminal_subspace;   // per trajectory; -1 when unsettled
};

struct InvariantCheck {
  bool invariant = false;
  double lindblad_residual = 0.0;
  double condition_residual = 0.0;
};

enum class LocalizationClass {
  kCaseI,
  kCaseIINoiseless,
  kCompleteExpected,
  kUndetermined
};

std::string localization_class_name(LocalizationClass value);

struct ErgodicityReport {
  std::vector<double> fidelities;  // per trajectory, F(time average, rho_s)
  double mean_fidelity = 0.0;
  double predicted_participation = 0.0;
};

struct UpdateRuleReport {
  std::vector<int> terminal_subspace;       // per localized record
  std::vector<double> average_distances;    // to the matching extremal state
  std::vector<double> selection_frequencies;
  std::vector<double> predicted_frequencies;  // tr[P_inf rho0]
  bool restricted_systems_valid = false;
  bool passed = false;  // distances <= 2e-2 and frequencies within 3 sigma
};

// tr[rho P] clamped to [0, 1]; P must be a Hermitian idempotent.
double subspace_overlap(const DensityMatrix& rho, const ComplexMatrix& p);

// Terminal localization statistics for an ensemble whose overlap series were
// registered per projector; a trajectory counts as settled in a subspace when
// its overlap exceeds 0.99 over the final tenth of the samples. Frequencies
// are compared to predicted weights with binomial z-scores.
LocalizationReport localization_statistics(const EnsembleStats& ensemble,
                                           const SubspaceDecomposition& dec,
                                           const std::vector<double>& predicted_weights);

// Scheme-specific invariance predicates: the state must be stationary under
// the Lindblad generator and satisfy the scheme's measurement-backaction
// condition (quadrature for homodyne, rate for photodetection), both within
// 1e-8.
InvariantCheck check_invariant_diffusive(const QuantumSystem& sys,
                                         const DensityMatrix& rho);
InvariantCheck check_invariant_jump(const QuantumSystem& sys,
                                    const DensityMatrix& rho);

// Decides whether localization between two orthogonal blocks is expected to
// stall: case (i) when every channel's restricted record observable is the
// same scalar on both blocks; case (ii) when the joint commutant contains an
// off-diagonal intertwiner (noiseless coupling); complete-expected when
// neither obstruction exists. Jump records are phase-blind, so near-misses
// that only a phase redressing could reconcile return undetermined unless the
// restricted Hamiltonian spectra already rule the equivalence out.
LocalizationClass classify_incomplete_localization(const QuantumSystem& sys,
                                                   const ComplexMatrix& p_q,
                                                   const ComplexMatrix& p_p,
                                                   Scheme scheme);

// Uhlmann fidelity of each trajectory's burned time average against the
// supplied asymptotic state, plus the ensemble mean and the participation
// ratio predicted from the eigenweights of rho_s.
ErgodicityReport mean_fidelity(const EnsembleStats& ensemble,
                               const DensityMatrix& rho_s);

// Sum of squared weights; weights must be nonnegative and sum to one.
double participation_ratio(const std::vector<double>& weights);

// l1 coherence sum_{n != m} |<s_n|rho|s_m>| in an orthonormal basis.
double l1_coherence(const DensityMatrix& rho, const std::vector<PureState>& basis);

// Two-qubit concurrence (spin-flip construction) of a 4x4 state.
double concurrence(const DensityMatrix& rho_two_qubit);

// Reduced state of qubit pair (i, j) from an n-qubit register state.
DensityMatrix reduce_to_qubit_pair(const DensityMatrix& rho, int qubit_i,
                                   int qubit_j);

// Checks the asymptotic update rule on localized trajectories: each record's
// post-localization average must match the extremal state of its terminal
// block, selection frequencies must follow tr[P_inf rho0], and the restricted
// block systems must validate.
UpdateRuleReport verify_update_rule(const QuantumSystem& sys,
                                    const DensityMatrix& rho0,
                                    const std::vector<TrajectoryRecord>& records,
                                    const SubspaceDecomposition& dec);

}  // namespace unravel

#endif  // UNRAVEL_ANALYTICS_HPP_
