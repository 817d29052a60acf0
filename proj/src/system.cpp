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

#include "unravel/system.hpp"

namespace unravel {

QuantumSystem new_system(const ComplexMatrix& hamiltonian,
                         const std::vector<ComplexMatrix>& jumps,
                         const std::vector<std::string>& labels) {
  const Index d = hamiltonian.rows();
  if (d == 0 || hamiltonian.cols() != d) {
    throw DimensionMismatch("new_system: Hamiltonian must be square and nonempty");
  }
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    if (jumps[k].rows() != d || jumps[k].cols() != d) {
      throw DimensionMismatch("new_system: jump operator " + std::to_string(k) +
                              " is " + std::to_string(jumps[k].rows()) + "x" +
                              std::to_string(jumps[k].cols()) + ", expected " +
                              std::to_string(d) + "x" + std::to_string(d));
    }
  }
  if (!labels.empty() && labels.size() != jumps.size()) {
    throw DimensionMismatch("new_system: label count does not match jump count");
  }
  if (hermiticity_deviation(hamiltonian) > 1e-10) {
    throw NonHermitianHamiltonian("new_system: relative deviation " +
                                  std::to_string(hermiticity_deviation(hamiltonian)));
  }
  QuantumSystem sys;
  sys.dim = d;
  sys.hamiltonian = (hamiltonian + hamiltonian.adjoint().eval()) / 2.0;
  sys.jumps = jumps;
  sys.labels = labels;
  if (sys.labels.empty()) {
    for (std::size_t k = 0; k < jumps.size(); ++k) {
      sys.labels.push_back("L" + std::to_string(k));
    }
  }
  return sys;
}

DensityMatrix validate_density(const ComplexMatrix& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw DimensionMismatch("validate_density: matrix must be square and nonempty");
  }
  const double tr_dev = std::abs(matrix.trace() - Complex(1.0, 0.0));
  if (tr_dev > 1e-8) {
    throw TraceViolation("validate_density: |tr - 1| = " + std::to_string(tr_dev));
  }
  if (hermiticity_deviation(matrix) > 1e-10) {
    throw NotHermitian("validate_density: relative deviation " +
                       std::to_string(hermiticity_deviation(matrix)));
  }
  const ComplexMatrix herm = (matrix + matrix.adjoint().eval()) / 2.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm);
  const RealVector& ev = solver.eigenvalues();
  if (ev(0) < -1e-8) {
    throw NotPositive("validate_density: min eigenvalue " + std::to_string(ev(0)));
  }
  DensityMatrix rho;
  rho.dim = matrix.rows();
  if (ev(0) < 0.0) {
    RealVector clipped = ev.cwiseMax(0.0);
    clipped /= clipped.sum();
    rho.matrix = solver.eigenvectors() * clipped.asDiagonal() *
                 solver.eigenvectors().adjoint();
  } else {
    rho.matrix = herm / herm.trace().real();
  }
  return rho;
}

PureState make_pure(const ComplexVector& amplitudes) {
  if (amplitudes.size() == 0) {
    throw DimensionMismatch("make_pure: empty amplitude vector");
  }
  const double n = amplitudes.norm();
  if (std::abs(n - 1.0) > 1e-10) {
    throw ValidationError("make_pure: norm deviates from 1 by " +
                          std::to_string(std::abs(n - 1.0)));
  }
  return PureState{amplitudes.size(), amplitudes / n};
}

DensityMatrix to_density(const PureState& psi) {
  DensityMatrix rho;
  rho.dim = psi.dim;
  rho.matrix = psi.amplitudes * psi.amplitudes.adjoint();
  return rho;
}

double purity(const DensityMatrix& rho) {
  return (rho.matrix * rho.matrix).trace().real();
}

}  // namespace unravel
