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

#include "doctest.h"
#include "unravel/errors.hpp"
#include "unravel/lindblad.hpp"
#include "unravel/models.hpp"

namespace unravel {
namespace {

constexpr Complex kI{0.0, 1.0};

TEST_CASE("Pauli and spin-1 algebra") {
  CHECK(((sigma_x() * sigma_y() - sigma_y() * sigma_x()) - 2.0 * kI * sigma_z())
            .norm() <= 1e-14);
  CHECK((sigma_plus() * sigma_minus() -
         (ComplexMatrix(2, 2) << 1.0, 0.0, 0.0, 0.0).finished())
            .norm() <= 1e-14);
  CHECK(((spin1_sx() * spin1_sy() - spin1_sy() * spin1_sx()) - kI * spin1_sz())
            .norm() <= 1e-12);
  CHECK(spin1_sz()(0, 0) == Complex(-1.0, 0.0));
  CHECK(spin1_sz()(2, 2) == Complex(1.0, 0.0));
  CHECK(std::abs(spin1_sp()(1, 0) - Complex(std::sqrt(2.0), 0.0)) <= 1e-14);
}

TEST_CASE("boson operators and coherent states") {
  const int n = 30;
  const ComplexMatrix a = annihilation(n);
  const ComplexMatrix comm = a * a.adjoint() - a.adjoint() * a;
  for (Index i = 0; i < n - 1; ++i) {
    CHECK(std::abs(comm(i, i) - Complex(1.0, 0.0)) <= 1e-14);
  }
  // Truncation artifact in the last level only.
  CHECK(comm(n - 1, n - 1).real() == doctest::Approx(-(n - 1)).epsilon(1e-12));

  const Complex alpha(1.1, -0.4);
  const PureState coh = coherent_state(alpha, n);
  CHECK(std::abs(coh.amplitudes.norm() - 1.0) <= 1e-12);
  CHECK((a * coh.amplitudes - alpha * coh.amplitudes).norm() <= 1e-8);
}

TEST_CASE("cat states live in one parity sector") {
  const Complex alpha(1.3, 0.4);
  const PureState even = cat_state(alpha, +1, 24);
  const PureState odd = cat_state(alpha, -1, 24);
  CHECK(std::abs(even.amplitudes.norm() - 1.0) <= 1e-12);
  CHECK(std::abs(even.amplitudes.dot(odd.amplitudes)) <= 1e-12);
  const ComplexMatrix p_even = parity_projector(24, +1);
  CHECK((p_even * even.amplitudes - even.amplitudes).norm() <= 1e-12);
  CHECK((p_even * odd.amplitudes).norm() <= 1e-12);
}

TEST_CASE("monitored qubit preset") {
  const QuantumSystem sys = build_monitored_qubit(1.0, 0.7);
  CHECK(sys.dim == 2);
  CHECK((sys.hamiltonian - sigma_z()).norm() <= 1e-14);
  CHECK(std::abs(sys.jumps[0](0, 0) - Complex(std::sqrt(0.7), 0.0)) <= 1e-14);
  CHECK(std::abs(sys.jumps[0](1, 1)) <= 1e-14);
  // H and L commute: simultaneous eigenbasis.
  CHECK((sys.hamiltonian * sys.jumps[0] - sys.jumps[0] * sys.hamiltonian).norm() <=
        1e-14);
}

TEST_CASE("two-qubit dark states") {
  const QuantumSystem sys = build_two_qubit_dark(1.0, 0.2);
  CHECK(sys.dim == 4);
  ComplexVector q1 = ComplexVector::Zero(4);
  q1(0) = 1.0;
  ComplexVector q2(4);
  q2 << 0.0, -1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  CHECK((sys.jumps[0] * q1).norm() <= 1e-14);
  CHECK((sys.jumps[0] * q2).norm() <= 1e-14);
  CHECK((sys.hamiltonian * q2).norm() <= 1e-14);
  // The bright triplet cascades to the ground state.
  ComplexVector bright(4);
  bright << 0.0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  const ComplexVector dropped = sys.jumps[0] * bright;
  CHECK(std::abs(dropped(0) - Complex(std::sqrt(2.0 * 0.2), 0.0)) <= 1e-14);

  const PureState psi0 = two_qubit_product_state(M_PI / 4.0, M_PI / 3.0);
  CHECK(std::abs(std::norm(q1.dot(psi0.amplitudes)) - 0.25) <= 1e-12);
  CHECK(std::abs(std::norm(q2.dot(psi0.amplitudes)) - 0.125) <= 1e-12);
}

TEST_CASE("Kerr resonator conserves parity") {
  const QuantumSystem sys = build_kerr(2.0, 1.75, 1.0 / 3.0, 0.5, 20);
  CHECK(sys.dim == 20);
  const ComplexMatrix parity =
      parity_projector(20, +1) - parity_projector(20, -1);
  CHECK((sys.hamiltonian * parity - parity * sys.hamiltonian).norm() <= 1e-12);
  CHECK((sys.jumps[0] * parity - parity * sys.jumps[0]).norm() <= 1e-12);
}

TEST_CASE("undriven-detuning cat states are stationary") {
  // Two-photon pumping against two-photon loss pins a^2 -> alpha^2 with
  // alpha^2 = -i Lambda / (Gamma + i K); both cat projectors and their mutual
  // coherence are stationary up to truncation error.
  const double lambda = 1.75, kerr = 1.0 / 3.0, gamma = 0.5;
  const QuantumSystem sys = build_kerr(0.0, lambda, kerr, gamma, 32);
  const Complex alpha_sq = -kI * lambda / Complex(gamma, kerr);
  const Complex alpha = std::sqrt(alpha_sq);
  const PureState cp = cat_state(alpha, +1, 32);
  const PureState cm = cat_state(alpha, -1, 32);
  const ComplexMatrix rho_p = cp.amplitudes * cp.amplitudes.adjoint();
  const ComplexMatrix rho_m = cm.amplitudes * cm.amplitudes.adjoint();
  const ComplexMatrix coherence = cp.amplitudes * cm.amplitudes.adjoint();
  CHECK(apply_generator(sys, rho_p).norm() <= 1e-6);
  CHECK(apply_generator(sys, rho_m).norm() <= 1e-6);
  CHECK(apply_generator(sys, coherence).norm() <= 1e-6);

  // Same pinning formula at kerr = 0: alpha^2 = -i Lambda / Gamma.
  const QuantumSystem plain = build_kerr(0.0, lambda, 0.0, gamma, 32);
  const PureState flat = cat_state(std::sqrt(-kI * lambda / gamma), +1, 32);
  CHECK(apply_generator(plain, flat.amplitudes * flat.amplitudes.adjoint())
            .norm() <= 1e-6);
}

TEST_CASE("scar tower: orthonormal eigenstates annihilated by the bonds") {
  const QuantumSystem sys = build_scar_chain(2, 1.0, 1.3, 0.0);
  CHECK(sys.dim == 9);
  const std::vector<PureState> tower = scar_tower(2);
  REQUIRE(tower.size() == 3);
  const double expected_energy[3] = {0.6, 2.6, 4.6};
  for (std::size_t n = 0; n < tower.size(); ++n) {
    for (std::size_t m = 0; m < tower.size(); ++m) {
      const double target = n == m ? 1.0 : 0.0;
      CHECK(std::abs(std::abs(tower[n].amplitudes.dot(tower[m].amplitudes)) -
                     target) <= 1e-10);
    }
    CHECK((sys.hamiltonian * tower[n].amplitudes -
           expected_energy[n] * tower[n].amplitudes)
              .norm() <= 1e-8);
    for (const ComplexMatrix& l : sys.jumps) {
      CHECK((l * tower[n].amplitudes).norm() <= 1e-12);
    }
  }
}

TEST_CASE("scar dephasing rates") {
  const QuantumSystem sys = build_scar_chain(2, 1.0, 1.3, 1.0);
  REQUIRE(sys.jumps.size() == 3);  // two bond channels plus collective sz
  const ComplexMatrix lz = sys.jumps.back();
  const std::vector<PureState> tower = scar_tower(2);
  const double expected[3] = {4.0, 0.0, 4.0};
  for (int n = 0; n < 3; ++n) {
    const Complex value =
        tower[n].amplitudes.dot(lz.adjoint() * lz * tower[n].amplitudes);
    CHECK(std::abs(value - Complex(expected[n], 0.0)) <= 1e-10);
  }
  // s0 and s2 carry opposite collective polarization.
  const Complex c0 = tower[0].amplitudes.dot(lz * tower[0].amplitudes);
  const Complex c2 = tower[2].amplitudes.dot(lz * tower[2].amplitudes);
  CHECK(std::abs(c0 + c2) <= 1e-10);
  CHECK(std::abs(c0 - Complex(-2.0, 0.0)) <= 1e-10);
}

TEST_CASE("xx ring: protected single-flip modes at sites 1 and 4") {
  const QuantumSystem sys = build_xx_ring(6, 1.0, 1.0, 0.4, {1, 4});
  CHECK(sys.dim == 64);
  REQUIRE(sys.jumps.size() == 2);
  const auto flip = [](int site) { return Index(1) << (6 - site); };
  ComplexVector f1 = ComplexVector::Zero(64);
  f1(flip(2)) = 0.5;
  f1(flip(3)) = 0.5;
  f1(flip(5)) = -0.5;
  f1(flip(6)) = -0.5;
  ComplexVector f2 = ComplexVector::Zero(64);
  f2(flip(2)) = 0.5;
  f2(flip(3)) = -0.5;
  f2(flip(5)) = 0.5;
  f2(flip(6)) = -0.5;
  CHECK((sys.hamiltonian * f1 - (-3.0) * f1).norm() <= 1e-12);
  CHECK((sys.hamiltonian * f2 - (-5.0) * f2).norm() <= 1e-12);
  const double root_gamma = std::sqrt(0.4);
  for (const ComplexMatrix& l : sys.jumps) {
    CHECK((l * f1 + root_gamma * f1).norm() <= 1e-12);
    CHECK((l * f2 + root_gamma * f2).norm() <= 1e-12);
  }
  // Vacuum energy -6 at omega = 1.
  ComplexVector vac = ComplexVector::Zero(64);
  vac(0) = 1.0;
  CHECK((sys.hamiltonian * vac - (-6.0) * vac).norm() <= 1e-12);
}

TEST_CASE("ring placement rule") {
  CHECK(xx_ring_placement(6, {1, 4}).unique_modes);
  CHECK(xx_ring_placement(6, {2, 5}).unique_modes);
  CHECK_FALSE(xx_ring_placement(6, {1, 2}).unique_modes);
  CHECK(xx_ring_placement(5, {3}).unique_modes);
  CHECK_FALSE(xx_ring_placement(6, {1}).unique_modes);
  CHECK_FALSE(xx_ring_placement(7, {1, 4}).unique_modes);
}

TEST_CASE("presets materialize and validate") {
  const std::vector<std::pair<std::string, Index>> expected = {
      {"qubit", 2},          {"two-qubit-dark", 4}, {"kerr", 20},
      {"kerr-bistable", 20}, {"scar", 9},           {"xx-ring", 64}};
  const auto names = preset_names();
  CHECK(names.size() == expected.size());
  for (const auto& [name, dim] : expected) {
    const Preset preset = make_preset(name);
    CHECK(preset.system.dim == dim);
    CHECK(std::abs(preset.initial_state.matrix.trace() - Complex(1.0, 0.0)) <=
          1e-10);
  }
  CHECK_THROWS_AS(make_preset("nonesuch"), ValidationError);
  CHECK_THROWS_AS(make_preset("qubit", {{"bogus", 1.0}}), ValidationError);

  // Qubit preset starts in |+>.
  const Preset qubit = make_preset("qubit");
  CHECK(std::abs(qubit.initial_state.matrix(0, 1) - Complex(0.5, 0.0)) <= 1e-12);
  // Ring preset starts in the single-flip basis state at site 2.
  const Preset ring = make_preset("xx-ring");
  CHECK(std::abs(ring.initial_state.matrix(16, 16) - Complex(1.0, 0.0)) <= 1e-12);
  // Scar preset starts inside the scar manifold.
  const Preset scar = make_preset("scar");
  const auto tower = scar_tower(2);
  Complex weight = 0.0;
  for (const PureState& s : tower) {
    weight += s.amplitudes.dot(scar.initial_state.matrix * s.amplitudes);
  }
  CHECK(std::abs(weight - Complex(1.0, 0.0)) <= 1e-10);
  // Parameter overrides reach the operators.
  const Preset tuned = make_preset("qubit", {{"gamma", 0.9}});
  CHECK(std::abs(tuned.system.jumps[0](0, 0) - Complex(std::sqrt(0.9), 0.0)) <=
        1e-14);
}

}  // namespace
}  // namespace unravel
