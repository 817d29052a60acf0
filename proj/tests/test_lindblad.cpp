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
#include <random>

#include "doctest.h"
#include "unravel/errors.hpp"
#include "unravel/lindblad.hpp"
#include "unravel/models.hpp"

namespace unravel {
namespace {

constexpr Complex kI{0.0, 1.0};

DensityMatrix plus_state() {
  ComplexVector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return to_density(make_pure(v));
}

ComplexMatrix random_hermitian(Index d, unsigned seed) {
  std::mt19937 eng(seed);
  std::normal_distribution<double> normal;
  ComplexMatrix m(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) m(i, j) = Complex(normal(eng), normal(eng));
  }
  return 0.5 * (m + m.adjoint()).eval();
}

DensityMatrix random_density(Index d, unsigned seed) {
  ComplexMatrix m = random_hermitian(d, seed);
  m = (m * m.adjoint()).eval();
  m /= m.trace().real();
  return validate_density(m);
}

TEST_CASE("generator on the monitored qubit, fixed values") {
  const QuantumSystem sys = build_monitored_qubit(1.0, 0.7);
  const DensityMatrix rho = plus_state();
  const ComplexMatrix out = apply_generator(sys, rho.matrix);
  // Dephasing at gamma/4 on the coherence plus the -2i omega rotation.
  CHECK(std::abs(out(0, 0)) <= 1e-14);
  CHECK(std::abs(out(1, 1)) <= 1e-14);
  CHECK(std::abs(out(0, 1) - Complex(-0.175, -1.0)) <= 1e-12);
  CHECK(std::abs(out(1, 0) - Complex(-0.175, 1.0)) <= 1e-12);
}

TEST_CASE("dense Liouvillian matches the direct generator") {
  const QuantumSystem sys = build_two_qubit_dark(1.0, 0.2);
  const DensityMatrix rho = random_density(4, 31);
  const Liouvillian liou = build_liouvillian(sys);
  const ComplexVector lhs = liou.matrix * vectorize(rho.matrix);
  const ComplexVector rhs = vectorize(apply_generator(sys, rho.matrix));
  CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
}

TEST_CASE("Heisenberg duality") {
  const QuantumSystem sys = build_two_qubit_dark(1.0, 0.2);
  const DensityMatrix rho = random_density(4, 41);
  const ComplexMatrix x = random_hermitian(4, 42);
  const Complex lhs = (x * apply_generator(sys, rho.matrix)).trace();
  const Complex rhs = (apply_adjoint_generator(sys, x) * rho.matrix).trace();
  CHECK(std::abs(lhs - rhs) <= 1e-10);
}

TEST_CASE("propagation semigroup and trace preservation") {
  const QuantumSystem sys = build_monitored_qubit(1.0, 0.7);
  const DensityMatrix rho = plus_state();
  const DensityMatrix one = propagate(sys, rho, 0.7);
  const DensityMatrix two = propagate(sys, one, 0.5);
  const DensityMatrix direct = propagate(sys, rho, 1.2);
  CHECK((two.matrix - direct.matrix).norm() <= 1e-9);
  CHECK(std::abs(direct.matrix.trace() - Complex(1.0, 0.0)) <= 1e-10);
}

TEST_CASE("qubit dephasing closed form") {
  const double omega = 1.0;
  const double gamma = 0.7;
  const QuantumSystem sys = build_monitored_qubit(omega, gamma);
  const double t = 0.9;
  const DensityMatrix out = propagate(sys, plus_state(), t);
  const Complex expected =
      0.5 * std::exp(-0.5 * gamma * t) * std::exp(-2.0 * kI * omega * t);
  CHECK(std::abs(out.matrix(0, 1) - expected) <= 1e-9);
  CHECK(out.matrix(0, 0).real() == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("asymptotic state of the dephasing qubit") {
  const QuantumSystem sys = build_monitored_qubit(1.0, 0.7);
  const DensityMatrix limit = asymptotic_state(sys, plus_state());
  ComplexMatrix expected = 0.5 * ComplexMatrix::Identity(2, 2);
  CHECK((limit.matrix - expected).norm() <= 1e-8);
}

TEST_CASE("time-averaged asymptotic state is stationary and avoids decay") {
  const QuantumSystem sys = build_two_qubit_dark(1.0, 0.2);
  DensityMatrix uniform;
  uniform.dim = 4;
  uniform.matrix = 0.25 * ComplexMatrix::Identity(4, 4);
  const DensityMatrix avg = time_averaged_asymptotic_state(sys, uniform);
  CHECK(apply_generator(sys, avg.matrix).norm() <= 1e-8);
  // The excited product state and the bright triplet both decay.
  ComplexVector bright(4);
  bright << 0.0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  CHECK(std::abs(bright.dot(avg.matrix * bright)) <= 1e-8);
  CHECK(std::abs(avg.matrix(3, 3)) <= 1e-8);
}

TEST_CASE("Heisenberg limit of the singlet projector is conserved") {
  const QuantumSystem sys = build_two_qubit_dark(1.0, 0.2);
  ComplexVector q2(4);
  q2 << 0.0, -1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  const ComplexMatrix p2 = q2 * q2.adjoint();
  CHECK(apply_adjoint_generator(sys, p2).norm() <= 1e-12);
  const ComplexMatrix limit = asymptotic_adjoint(sys, p2);
  CHECK((limit - p2).norm() <= 1e-8);
}

TEST_CASE("asymptotic weights of the product state") {
  // theta = pi/4, phase pi/3: dark weights 1/4 (ground) and 1/8 (singlet);
  // the remaining 5/8 cascades into the ground state, so the infinite-time
  // ground weight is 7/8.
  const QuantumSystem sys = build_two_qubit_dark(1.0, 0.2);
  const DensityMatrix rho0 =
      to_density(two_qubit_product_state(M_PI / 4.0, M_PI / 3.0));
  ComplexMatrix p1 = ComplexMatrix::Zero(4, 4);
  p1(0, 0) = 1.0;
  const ComplexMatrix limit = asymptotic_adjoint(sys, p1);
  CHECK(std::abs((limit * rho0.matrix).trace().real() - 7.0 / 8.0) <= 1e-6);
}

TEST_CASE("adjoint propagation is dual to state propagation") {
  const QuantumSystem sys = build_monitored_qubit(1.0, 0.7);
  const DensityMatrix rho = random_density(2, 51);
  const ComplexMatrix x = random_hermitian(2, 52);
  const double t = 1.3;
  const Complex lhs = (x * propagate(sys, rho, t).matrix).trace();
  const Complex rhs = (propagate_adjoint(sys, x, t) * rho.matrix).trace();
  CHECK(std::abs(lhs - rhs) <= 1e-8);
}

TEST_CASE("convergence horizon is positive and finite") {
  const QuantumSystem sys = build_two_qubit_dark(1.0, 0.2);
  const double horizon = convergence_horizon(sys);
  CHECK(horizon > 0.0);
  CHECK(std::isfinite(horizon));
}

}  // namespace
}  // namespace unravel
