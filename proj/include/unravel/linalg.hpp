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

#ifndef UNRAVEL_LINALG_HPP_
#define UNRAVEL_LINALG_HPP_

#include <Eigen/Dense>
#include <complex>

#include "unravel/errors.hpp"

namespace unravel {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

struct HermitianEig {
  RealVector values;       // ascending
  ComplexMatrix vectors;   // columns, orthonormal
};

// Column-stacking vectorization: vec(M)[r + c*rows] = M(r, c), so that
// vec(A X B) = kron(B^T, A) vec(X).
ComplexVector vectorize(const ComplexMatrix& m);

// Inverse of vectorize for square matrices of dimension dim.
ComplexMatrix unvectorize(const ComplexVector& v, Index dim);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Relative Frobenius deviation from Hermiticity, ||X - X^dag||_F / ||X||_F.
double hermiticity_deviation(const ComplexMatrix& x);

// Eigendecomposition of a Hermitian matrix. Throws NonHermitianInput if
// ||X - X^dag||_F > 1e-8 * ||X||_F.
HermitianEig hermitian_eig(const ComplexMatrix& x);

// Matrix exponential of a general complex square matrix.
ComplexMatrix expm(const ComplexMatrix& a);

// Largest singular value.
double operator_norm(const ComplexMatrix& a);

}  // namespace unravel

#endif  // UNRAVEL_LINALG_HPP_
