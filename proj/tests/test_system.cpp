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

#include "doctest.h"
#include "unravel/errors.hpp"
#include "unravel/system.hpp"

namespace unravel {
namespace {

TEST_CASE("new_system validates inputs") {
  ComplexMatrix h(2, 2);
  h << 1.0, 0.0, 0.0, -1.0;
  ComplexMatrix l(2, 2);
  l << 0.0, 1.0, 0.0, 0.0;
  const QuantumSystem sys = new_system(h, {l}, {"decay"});
  CHECK(sys.dim == 2);
  CHECK(sys.labels.size() == 1);

  ComplexMatrix bad = h;
  bad(0, 1) = Complex(0.0, 0.5);
  CHECK_THROWS_AS(new_system(bad, {l}, {}), NonHermitianHamiltonian);

  ComplexMatrix wrong(3, 3);
  wrong.setZero();
  CHECK_THROWS_AS(new_system(h, {wrong}, {}), DimensionMismatch);
  CHECK_THROWS_AS(new_system(h, {l}, {"a", "b"}), DimensionMismatch);
}

TEST_CASE("validate_density enforces trace, Hermiticity, positivity") {
  ComplexMatrix ok(2, 2);
  ok << 0.5, 0.25, 0.25, 0.5;
  const DensityMatrix rho = validate_density(ok);
  CHECK(rho.dim == 2);
  CHECK(std::abs(rho.matrix.trace() - Complex(1.0, 0.0)) <= 1e-12);

  CHECK_THROWS_AS(validate_density((2.0 * ok).eval()), TraceViolation);

  ComplexMatrix skew = ok;
  skew(0, 1) = Complex(0.25, 0.3);
  CHECK_THROWS_AS(validate_density(skew), NotHermitian);

  ComplexMatrix indefinite(2, 2);
  indefinite << 1.5, 0.0, 0.0, -0.5;
  CHECK_THROWS_AS(validate_density(indefinite), NotPositive);

  // A tiny negative eigenvalue is clipped, not rejected.
  ComplexMatrix nearly(2, 2);
  nearly << 1.0 + 1e-9, 0.0, 0.0, -1e-9;
  const DensityMatrix clipped = validate_density(nearly);
  CHECK(clipped.matrix(1, 1).real() >= 0.0);
  CHECK(std::abs(clipped.matrix.trace() - Complex(1.0, 0.0)) <= 1e-12);
}

TEST_CASE("pure states and purity") {
  ComplexVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const PureState psi = make_pure(plus);
  const DensityMatrix rho = to_density(psi);
  CHECK(purity(rho) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rho.matrix(0, 1).real() == doctest::Approx(0.5).epsilon(1e-12));

  ComplexVector unnormalized(2);
  unnormalized << 1.0, 1.0;
  CHECK_THROWS_AS(make_pure(unnormalized), ValidationError);

  ComplexMatrix mixed = 0.5 * ComplexMatrix::Identity(2, 2);
  CHECK(purity(validate_density(mixed)) == doctest::Approx(0.5).epsilon(1e-12));
}

}  // namespace
}  // namespace unravel
