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

#ifndef UNRAVEL_SYSTEM_HPP_
#define UNRAVEL_SYSTEM_HPP_

#include <string>
#include <vector>

#include "unravel/linalg.hpp"

namespace unravel {

// A finite-dimensional system under continuous monitoring: Hamiltonian plus
// an arbitrary number of monitored jump channels.
struct QuantumSystem {
  Index dim = 0;
  ComplexMatrix hamiltonian;
  std::vector<ComplexMatrix> jumps;
  std::vector<std::string> labels;  // one per jump channel, optional
};

struct DensityMatrix {
  Index dim = 0;
  ComplexMatrix matrix;
};

struct PureState {
  Index dim = 0;
  ComplexVector amplitudes;  // normalized
};

// Validates dimensions and Hamiltonian Hermiticity (relative Frobenius
// deviation <= 1e-10 required). Throws DimensionMismatch or
// NonHermitianHamiltonian.
QuantumSystem new_system(const ComplexMatrix& hamiltonian,
                         const std::vector<ComplexMatrix>& jumps,
                         const std::vector<std::string>& labels = {});

// Checks trace (|tr - 1| <= 1e-8), Hermiticity (relative deviation <= 1e-10)
// and positivity. Eigenvalues in [-1e-8, 0) are clipped to zero and the state
// renormalized; anything more negative throws NotPositive. Throws
// TraceViolation / NotHermitian for the other violations.
DensityMatrix validate_density(const ComplexMatrix& matrix);

PureState make_pure(const ComplexVector& amplitudes);

DensityMatrix to_density(const PureState& psi);

double purity(const DensityMatrix& rho);

}  // namespace unravel

#endif  // UNRAVEL_SYSTEM_HPP_
