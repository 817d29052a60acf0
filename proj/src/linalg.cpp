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

#include "unravel/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace unravel {

ComplexVector vectorize(const ComplexMatrix& m) {
  // MatrixXcd is column-major, so the flat data is already column-stacked.
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

ComplexMatrix unvectorize(const ComplexVector& v, Index dim) {
  if (v.size() != dim * dim) {
    throw DimensionMismatch("unvectorize: length " + std::to_string(v.size()) +
                            " is not dim^2 with dim " + std::to_string(dim));
  }
  return Eigen::Map<const ComplexMatrix>(v.data(), dim, dim);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double hermiticity_deviation(const ComplexMatrix& x) {
  const double nx = x.norm();
  if (nx == 0.0) return 0.0;
  return (x - x.adjoint().eval()).norm() / nx;
}

HermitianEig hermitian_eig(const ComplexMatrix& x) {
  if (x.rows() != x.cols()) {
    throw DimensionMismatch("hermitian_eig: matrix is not square");
  }
  if (hermiticity_deviation(x) > 1e-8) {
    throw NonHermitianInput("hermitian_eig: relative deviation " +
                            std::to_string(hermiticity_deviation(x)));
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(x);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("hermitian_eig: eigensolver did not converge");
  }
  return HermitianEig{solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix expm(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("expm: matrix is not square");
  }
  return a.exp();
}

double operator_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(0);
}

}  // namespace unravel
