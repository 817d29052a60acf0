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

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "unravel/errors.hpp"
#include "unravel/lindblad.hpp"
#include "unravel/models.hpp"
#include "unravel/structure.hpp"

namespace unravel {
namespace {

std::vector<Index> sorted_sizes(const SubspaceDecomposition& dec) {
  std::vector<Index> sizes;
  for (const Block& b : dec.blocks) sizes.push_back(b.size);
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

// Smallest Frobenius distance between target and any state in the set.
double best_match(const StationarySet& set, const ComplexMatrix& target) {
  double best = 1e300;
  for (const DensityMatrix& rho : set.states) {
    best = std::min(best, (rho.matrix - target).norm());
  }
  return best;
}

ComplexMatrix projector_on(const ComplexVector& v) {
  return v * v.adjoint() / v.squaredNorm();
}

TEST_CASE("block diagonalization of a diagonal family") {
  const SubspaceDecomposition dec = simultaneous_block_diagonalize({sigma_z()});
  CHECK(dec.blocks.size() == 2);
  CHECK(sorted_sizes(dec) == std::vector<Index>{1, 1});
  CHECK((dec.transform.adjoint() * dec.transform -
         ComplexMatrix::Identity(2, 2))
            .norm() <= 1e-10);
  for (int id : dec.family_ids) CHECK(id == -1);
  CHECK(max_off_block_mass(dec, {sigma_z()}) <= 1e-8);
  // Projectors resolve the identity.
  ComplexMatrix sum = ComplexMatrix::Zero(2, 2);
  for (std::size_t b = 0; b < dec.blocks.size(); ++b) {
    sum += block_projector(dec, b);
  }
  CHECK((sum - ComplexMatrix::Identity(2, 2)).norm() <= 1e-10);
}

TEST_CASE("degenerate families are flagged instead of split") {
  const SubspaceDecomposition dec =
      simultaneous_block_diagonalize({ComplexMatrix::Identity(2, 2)});
  CHECK(dec.blocks.size() == 2);
  CHECK(dec.family_ids[0] >= 0);
  CHECK(dec.family_ids[0] == dec.family_ids[1]);

  const SubspaceDecomposition zero =
      simultaneous_block_diagonalize({ComplexMatrix::Zero(3, 3)});
  CHECK(zero.blocks.size() == 3);
  CHECK(zero.family_ids[0] >= 0);
  CHECK(zero.family_ids[1] == zero.family_ids[0]);
  CHECK(zero.family_ids[2] == zero.family_ids[0]);
}

TEST_CASE("two-qubit operators split into a singlet and a cascade block") {
  const QuantumSystem sys = build_two_qubit_dark(1.0, 0.2);
  const SubspaceDecomposition dec =
      simultaneous_block_diagonalize({sys.hamiltonian, sys.jumps[0]});
  CHECK(sorted_sizes(dec) == std::vector<Index>{1, 3});
  CHECK(max_off_block_mass(dec, {sys.hamiltonian, sys.jumps[0]}) <= 1e-8);
  for (int id : dec.family_ids) CHECK(id == -1);
  // The singlet spans the one-dimensional block.
  ComplexVector q2(4);
  q2 << 0.0, -1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  const std::size_t small = dec.blocks[0].size == 1 ? 0 : 1;
  const ComplexMatrix p = block_projector(dec, small);
  CHECK((p * q2 - q2).norm() <= 1e-8);
}

TEST_CASE("mismatched inputs are rejected") {
  CHECK_THROWS_AS(simultaneous_block_diagonalize({}), ValidationError);
  CHECK_THROWS_AS(
      simultaneous_block_diagonalize({ComplexMatrix::Identity(2, 3)}),
      DimensionMismatch);
  CHECK_THROWS_AS(simultaneous_block_diagonalize(
                      {sigma_z(), ComplexMatrix::Identity(3, 3)}),
                  DimensionMismatch);
}

TEST_CASE("decaying/asymptotic split of the collective-decay pair") {
  const QuantumSystem sys = build_two_qubit_dark(1.0, 0.2);
  const auto [p_d, p_r] = split_decaying_asymptotic(sys);
  CHECK(std::abs(p_d.trace().real() - 2.0) <= 1e-7);
  CHECK((p_d + p_r - ComplexMatrix::Identity(4, 4)).norm() <= 1e-9);
  ComplexVector bright(4);
  bright << 0.0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  ComplexVector top = ComplexVector::Zero(4);
  top(3) = 1.0;
  CHECK((p_d * bright - bright).norm() <= 1e-7);
  CHECK((p_d * top - top).norm() <= 1e-7);
}

TEST_CASE("all stationary states of the monitored qubit") {
  const QuantumSystem sys = build_monitored_qubit(1.0, 0.7);
  const auto [dec, set] = find_all_stationary_states(sys);
  REQUIRE(set.states.size() == 2);
  ComplexMatrix p0 = ComplexMatrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  ComplexMatrix p1 = ComplexMatrix::Zero(2, 2);
  p1(1, 1) = 1.0;
  CHECK(best_match(set, p0) <= 1e-9);
  CHECK(best_match(set, p1) <= 1e-9);
  int minimal = 0;
  for (BlockRole role : dec.roles) {
    minimal += role == BlockRole::kMinimalAsymptotic ? 1 : 0;
  }
  CHECK(minimal == 2);
  CHECK(set.pairwise_overlaps.rows() == 2);
  CHECK(std::abs(set.pairwise_overlaps(0, 1)) <= 1e-9);
}

TEST_CASE("all stationary states of the two-qubit dark pair") {
  const QuantumSystem sys = build_two_qubit_dark(1.0, 0.2);
  const auto [dec, set] = find_all_stationary_states(sys);
  REQUIRE(set.states.size() == 2);
  ComplexVector q1 = ComplexVector::Zero(4);
  q1(0) = 1.0;
  ComplexVector q2(4);
  q2 << 0.0, -1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  CHECK(best_match(set, projector_on(q1)) <= 1e-7);
  CHECK(best_match(set, projector_on(q2)) <= 1e-7);
  for (const DensityMatrix& rho : set.states) {
    CHECK(apply_generator(sys, rho.matrix).norm() <= 1e-7);
  }
  Index covered = 0;
  for (const Block& b : dec.blocks) covered += b.size;
  CHECK(covered == 4);
  CHECK((dec.transform.adjoint() * dec.transform -
         ComplexMatrix::Identity(4, 4))
            .norm() <= 1e-10);
}

TEST_CASE("scar chain: the dephasing steady states are the scar projectors") {
  const QuantumSystem sys = build_scar_chain(2, 1.0, 1.3, 1.0);
  const auto [dec, set] = find_all_stationary_states(sys);
  const std::vector<PureState> tower = scar_tower(2);
  REQUIRE(set.states.size() == tower.size());
  for (const PureState& s : tower) {
    CHECK(best_match(set, s.amplitudes * s.amplitudes.adjoint()) <= 1e-6);
  }
}

TEST_CASE("Kerr resonator: one asymptotic state per parity sector") {
  const QuantumSystem sys = build_kerr(2.0, 1.75, 1.0 / 3.0, 0.5, 20);
  const auto [dec, set] = find_all_stationary_states(sys);
  REQUIRE(set.states.size() == 2);
  const ComplexMatrix p_even = parity_projector(20, +1);
  // Residual scales with the generator norm; this system has rates ~1e2.
  const double res_tol = 1e-7 * std::max(1.0, max_rate(sys));
  std::vector<double> even_weight;
  for (const DensityMatrix& rho : set.states) {
    even_weight.push_back((p_even * rho.matrix).trace().real());
    CHECK(apply_generator(sys, rho.matrix).norm() <= res_tol);
  }
  std::sort(even_weight.begin(), even_weight.end());
  CHECK(even_weight[0] <= 1e-9);
  CHECK(even_weight[1] >= 1.0 - 1e-9);
}

TEST_CASE("undetuned Kerr resonator: the cat span is a degenerate family") {
  // At zero detuning both cats share one effective-Hamiltonian eigenvalue and
  // the loss acts as the same scalar on them, so the asymptotic sector is a
  // two-dimensional degenerate family (every state on the span is stationary)
  // rather than a pair of isolated extremal states.
  const double lambda = 1.75, kerr = 1.0 / 3.0, gamma = 0.5;
  const QuantumSystem sys = build_kerr(0.0, lambda, kerr, gamma, 25);
  const auto [dec, set] = find_all_stationary_states(sys);
  CHECK(set.states.empty());
  ComplexMatrix family_cols(25, 0);
  for (std::size_t b = 0; b < dec.blocks.size(); ++b) {
    if (dec.family_ids[b] < 0) continue;
    CHECK(dec.family_ids[b] == 0);
    const Index width = family_cols.cols();
    family_cols.conservativeResize(Eigen::NoChange, width + dec.blocks[b].size);
    family_cols.rightCols(dec.blocks[b].size) =
        dec.transform.middleCols(dec.blocks[b].start, dec.blocks[b].size);
  }
  REQUIRE(family_cols.cols() == 2);
  const ComplexMatrix p_family = family_cols * family_cols.adjoint();
  const Complex alpha = std::sqrt(Complex(0.0, -lambda) / Complex(gamma, kerr));
  for (const int parity : {+1, -1}) {
    const PureState cat = cat_state(alpha, parity, 25);
    CHECK((p_family * cat.amplitudes - cat.amplitudes).norm() <= 1e-5);
  }
}

TEST_CASE("trajectory finder reproduces the spectral answer") {
  const QuantumSystem qubit = build_monitored_qubit(1.0, 0.7);
  const auto [qdec, qset] = find_all_stationary_states(qubit);
  FinderBudget budget;
  budget.t_final = 40.0;
  const StationarySet jumped =
      trajectory_steady_state_finder(qubit, Scheme::kJump, budget);
  REQUIRE(jumped.states.size() == qset.states.size());
  for (const DensityMatrix& rho : qset.states) {
    CHECK(best_match(jumped, rho.matrix) <= 1e-6);
  }

  const QuantumSystem pair = build_two_qubit_dark(1.0, 0.2);
  const auto [pdec, pset] = find_all_stationary_states(pair);
  const StationarySet diffused =
      trajectory_steady_state_finder(pair, Scheme::kDiffusive, budget);
  REQUIRE(diffused.states.size() == pset.states.size());
  for (const DensityMatrix& rho : pset.states) {
    CHECK(best_match(diffused, rho.matrix) <= 1e-6);
  }
}

TEST_CASE("decoherence-free structure of the presets") {
  const DfsReport qubit = detect_dfs(build_monitored_qubit(1.0, 0.7));
  CHECK(qubit.dfs_states.size() == 2);
  CHECK(qubit.grouping.size() == 2);

  const DfsReport pair = detect_dfs(build_two_qubit_dark(1.0, 0.2));
  CHECK(pair.dfs_states.size() == 2);
  REQUIRE(pair.grouping.size() == 1);
  CHECK(pair.grouping[0].size() == 2);
  for (const auto& cs : pair.jump_eigenvalues) {
    for (Complex c : cs) CHECK(std::abs(c) <= 1e-8);
  }

  const DfsReport silent = detect_dfs(build_scar_chain(2, 1.0, 1.3, 0.0));
  CHECK(silent.dfs_states.size() == 3);
  CHECK(silent.grouping.size() == 1);

  const DfsReport dephased = detect_dfs(build_scar_chain(2, 1.0, 1.3, 1.0));
  CHECK(dephased.dfs_states.size() == 3);
  CHECK(dephased.grouping.size() == 3);
  std::vector<double> energies = dephased.hamiltonian_eigenvalues;
  std::sort(energies.begin(), energies.end());
  REQUIRE(energies.size() == 3);
  CHECK(energies[0] == doctest::Approx(0.6).epsilon(1e-7));
  CHECK(energies[1] == doctest::Approx(2.6).epsilon(1e-7));
  CHECK(energies[2] == doctest::Approx(4.6).epsilon(1e-7));
}

TEST_CASE("infinite-time projectors") {
  const QuantumSystem qubit = build_monitored_qubit(1.0, 0.7);
  ComplexMatrix p0 = ComplexMatrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  CHECK((infinite_time_projector(qubit, p0) - p0).norm() <= 1e-10);

  const QuantumSystem pair = build_two_qubit_dark(1.0, 0.2);
  ComplexVector q1 = ComplexVector::Zero(4);
  q1(0) = 1.0;
  ComplexVector q2(4);
  q2 << 0.0, -1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  const ComplexMatrix pinf1 = infinite_time_projector(pair, projector_on(q1));
  const ComplexMatrix pinf2 = infinite_time_projector(pair, projector_on(q2));
  CHECK((pinf2 - projector_on(q2)).norm() <= 1e-10);
  const DensityMatrix rho0 =
      to_density(two_qubit_product_state(M_PI / 4.0, M_PI / 3.0));
  const double w1 = (pinf1 * rho0.matrix).trace().real();
  const double w2 = (pinf2 * rho0.matrix).trace().real();
  CHECK(std::abs(w1 - 7.0 / 8.0) <= 1e-6);
  CHECK(std::abs(w2 - 1.0 / 8.0) <= 1e-6);
  CHECK_THROWS_AS(infinite_time_projector(qubit, sigma_x()), NotAProjector);
}

TEST_CASE("fully degenerate dynamics stays unresolved") {
  const ComplexMatrix h = ComplexMatrix::Zero(3, 3);
  const QuantumSystem sys = new_system(h, {ComplexMatrix::Zero(3, 3)}, {"L"});
  const auto [dec, set] = find_all_stationary_states(sys);
  CHECK(set.states.empty());
  REQUIRE(!dec.blocks.empty());
  for (std::size_t b = 0; b < dec.blocks.size(); ++b) {
    CHECK(dec.roles[b] == BlockRole::kUnresolved);
    CHECK(dec.family_ids[b] >= 0);
  }
  CHECK_THROWS_AS(extremal_state_on_block(sys, dec, 0), ValidationError);

  // A handcrafted block with a degenerate null space is reported as such.
  SubspaceDecomposition fake;
  fake.transform = ComplexMatrix::Identity(3, 3);
  fake.blocks = {Block{0, 3}};
  fake.roles = {BlockRole::kMinimalAsymptotic};
  fake.family_ids = {-1};
  CHECK_THROWS_AS(extremal_state_on_block(sys, fake, 0), DegenerateBlock);
}

}  // namespace
}  // namespace unravel
