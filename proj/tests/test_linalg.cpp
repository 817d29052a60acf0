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

#include <random>

#include "doctest.h"
#include "unravel/linalg.hpp"

namespace unravel {
namespace {

ComplexMatrix random_matrix(Index rows, Index cols, unsigned seed) {
  std::mt19937 eng(seed);
  std::normal_distribution<double> normal;
  ComplexMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = Complex(normal(eng), normal(eng));
  }
  return m;
}

TEST_CASE("vectorize stacks columns") {
  ComplexMatrix m(2, 2);
  m << 1.0, 3.0, 2.0, 4.0;
  const ComplexVector v = vectorize(m);
  CHECK(v(0) == Complex(1.0, 0.0));
  CHECK(v(1) == Complex(2.0, 0.0));
  CHECK(v(2) == Complex(3.0, 0.0));
  CHECK(v(3) == Complex(4.0, 0.0));
  CHECK((unvectorize(v, 2) - m).norm() == 0.0);
}

TEST_CASE("vec(AXB) equals (B^T kron A) vec(X)") {
  const ComplexMatrix a = random_matrix(3, 3, 11);
  const ComplexMatrix x = random_matrix(3, 3, 12);
  const ComplexMatrix b = random_matrix(3, 3, 13);
  const ComplexVector lhs = vectorize(a * x * b);
  const ComplexVector rhs = kron(b.transpose(), a) * vectorize(x);
  CHECK((lhs - rhs).norm() <= 1e-12 * lhs.norm());
}

TEST_CASE("kron of diagonal factors") {
  ComplexMatrix sz(2, 2);
  sz << 1.0, 0.0, 0.0, -1.0;
  const ComplexMatrix k = kron(sz, ComplexMatrix::Identity(2, 2));
  CHECK(k.rows() == 4);
  CHECK(k(0, 0) == Complex(1.0, 0.0));
  CHECK(k(1, 1) == Complex(1.0, 0.0));
  CHECK(k(2, 2) == Complex(-1.0, 0.0));
  CHECK(k(3, 3) == Complex(-1.0, 0.0));
  CHECK(std::abs(k.sum() - Complex(0.0, 0.0)) == 0.0);
}

TEST_CASE("hermitian_eig of sigma_x") {
  ComplexMatrix sx(2, 2);
  sx << 0.0, 1.0, 1.0, 0.0;
  const HermitianEig eig = hermitian_eig(sx);
  CHECK(eig.values(0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(eig.values(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((eig.vectors.adjoint() * eig.vectors - ComplexMatrix::Identity(2, 2))
            .norm() <= 1e-12);
  CHECK((sx * eig.vectors - eig.vectors * eig.values.asDiagonal().toDenseMatrix()
                                              .cast<Complex>())
            .norm() <= 1e-12);
}

TEST_CASE("hermitian_eig rejects non-Hermitian input") {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 0.0, 0.0;
  CHECK(hermiticity_deviation(m) > 0.1);
  CHECK_THROWS_AS(hermitian_eig(m), NonHermitianInput);
}

TEST_CASE("expm closed forms") {
  ComplexMatrix diag(2, 2);
  diag << Complex(0.3, 0.0), 0.0, 0.0, Complex(-1.2, 0.0);
  const ComplexMatrix e1 = expm(diag);
  CHECK(std::abs(e1(0, 0) - std::exp(Complex(0.3, 0.0))) <= 1e-13);
  CHECK(std::abs(e1(1, 1) - std::exp(Complex(-1.2, 0.0))) <= 1e-13);
  CHECK(std::abs(e1(0, 1)) <= 1e-15);

  // exp(t sigma_x) = cosh(t) I + sinh(t) sigma_x.
  ComplexMatrix sx(2, 2);
  sx << 0.0, 1.0, 1.0, 0.0;
  const double t = 0.3;
  const ComplexMatrix e2 = expm((t * sx).eval());
  ComplexMatrix expected = std::cosh(t) * ComplexMatrix::Identity(2, 2) +
                           std::sinh(t) * sx;
  CHECK((e2 - expected).norm() <= 1e-12);
}

TEST_CASE("operator norm") {
  ComplexMatrix up(2, 2);
  up << 0.0, 1.0, 0.0, 0.0;
  CHECK(operator_norm(up) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(operator_norm((2.0 * ComplexMatrix::Identity(3, 3)).eval()) ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("hermiticity deviation is zero for Hermitian matrices") {
  const ComplexMatrix y = random_matrix(4, 4, 21);
  const ComplexMatrix h = 0.5 * (y + y.adjoint());
  CHECK(hermiticity_deviation(h) <= 1e-15);
}

}  // namespace
}  // namespace unravel
