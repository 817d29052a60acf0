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

#ifndef UNRAVEL_STRUCTURE_HPP_
#define UNRAVEL_STRUCTURE_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include "unravel/linalg.hpp"
#include "unravel/system.hpp"
#include "unravel/unraveling.hpp"

namespace unravel {

// Hilbert-space structure resolution: minimal orthogonal subspaces of the
// operator family {H, L_k, L_k^dag}, the decaying/asymptotic split, all
// extremal stationary states, decoherence-free subspaces, and infinite-time
// projectors.

enum class BlockRole { kDecaying, kMinimalAsymptotic, kUnresolved };

struct Block {
  Index start = 0;  // column offset inside the transform
  Index size = 0;
};

struct SubspaceDecomposition {
  ComplexMatrix transform;           // unitary T; columns grouped by block
  std::vector<Block> blocks;
  std::vector<BlockRole> roles;
  std::vector<int> family_ids;       // -1: not in a degenerate family
  double epsilon = 1e-9;
  std::uint64_t seed = 0;
};

struct StationarySet {
  std::vector<DensityMatrix> states;     // extremal stationary states
  std::vector<ComplexMatrix> supports;   // support projectors
  Eigen::MatrixXd pairwise_overlaps;     // tr[rho_i rho_j]
};

struct DfsReport {
  std::vector<PureState> dfs_states;
  std::vector<double> hamiltonian_eigenvalues;        // omega_n
  std::vector<std::vector<Complex>> jump_eigenvalues;  // [state][channel]
  std::vector<std::vector<int>> grouping;  // states sharing one c-vector
};

struct FinderBudget {
  int max_trajectories = 0;    // 0: 4 * dim
  double t_final = 60.0;
  double dt = 0.0;             // 0: default_dt(sys)
  double burn_fraction = 0.7;
  int sample_stride = 100;     // lower bound; widened to cap sample count
  std::uint64_t base_seed = 777;
};

// Finds the finest decomposition into orthogonal subspaces left invariant by
// every operator in ops together with its adjoint. A random Hermitian element
// of the joint commutant is diagonalized and its eigenvalue clusters define
// the blocks; two independent draws must agree on the block-size multiset
// (disagreeing pairs are re-drawn a few times, then ConvergenceFailure).
// Blocks belonging to a degenerate family
// (non-abelian commutant) share a family id and are never silently split
// further; all roles are kUnresolved until a caller classifies them.
SubspaceDecomposition simultaneous_block_diagonalize(
    const std::vector<ComplexMatrix>& ops, double epsilon = 1e-9,
    std::uint64_t seed = 20260815ULL);

// Projector onto one block, expressed in the original basis.
ComplexMatrix block_projector(const SubspaceDecomposition& dec, std::size_t index);

// Largest relative off-block mass of transform^dag * A * transform over the
// given operators; small for a valid adjoint-closed decomposition.
double max_off_block_mass(const SubspaceDecomposition& dec,
                          const std::vector<ComplexMatrix>& ops);

// Splits the space into the decaying part D and the asymptotic part R that
// carries all stationary states. Returns (P_D, P_R) in the original basis.
// The limit of the propagated identity is evaluated spectrally (long-time
// average) so persistent oscillations do not spoil convergence.
std::pair<ComplexMatrix, ComplexMatrix> split_decaying_asymptotic(
    const QuantumSystem& sys);

// Resolves the full structure and extracts the unique stationary state of
// every minimal asymptotic block: block-diagonalize {H, L_k, L_k^dag}, strip
// each block's decaying part, re-diagonalize the restriction, then solve the
// restricted generator's null space (Hermitized, PSD-projected, normalized,
// residual <= 1e-7). Degenerate-family blocks are reported kUnresolved and
// skipped; an unflagged block with a multi-dimensional null space raises
// DegenerateBlock.
std::pair<SubspaceDecomposition, StationarySet> find_all_stationary_states(
    const QuantumSystem& sys, double epsilon = 1e-9);

// Trajectory-driven stationary-state search: evolve remaining basis states,
// time-average each run, project the discovered joint support out, and repeat
// until the space is exhausted. Duplicate averages are merged; partially
// overlapping averages are resolved by re-running the block analysis on the
// invariant closure of their joint support, so every returned state satisfies
// the stationarity residual. Raises BudgetExceeded beyond max_trajectories.
StationarySet trajectory_steady_state_finder(const QuantumSystem& sys,
                                             Scheme scheme,
                                             const FinderBudget& budget = {});

// Unique stationary state carried by one minimal-asymptotic block of a
// decomposition, embedded in the full space. Raises ValidationError for
// blocks of any other role.
DensityMatrix extremal_state_on_block(const QuantumSystem& sys,
                                      const SubspaceDecomposition& dec,
                                      std::size_t index);

// Finds all unit vectors that are simultaneous eigenvectors of H and every
// L_k (within 1e-8, verified against the original operators), grouped by
// equal jump-eigenvalue vectors.
DfsReport detect_dfs(const QuantumSystem& sys);

// Heisenberg-picture limit of a minimal-block projector; satisfies
// L^dag(P_inf) = 0 within 1e-7 (ConvergenceFailure otherwise).
ComplexMatrix infinite_time_projector(const QuantumSystem& sys,
                                      const ComplexMatrix& p_q);

}  // namespace unravel

#endif  // UNRAVEL_STRUCTURE_HPP_
