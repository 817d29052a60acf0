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

#ifndef UNRAVEL_LINDBLAD_HPP_
#define UNRAVEL_LINDBLAD_HPP_

#include <vector>

#include "unravel/system.hpp"

namespace unravel {

struct Liouvillian {
  Index dim = 0;         // Hilbert-space dimension d; matrix is d^2 x d^2
  ComplexMatrix matrix;  // column-stacking superoperator
};

// L(rho) = -i[H, rho] + sum_k (L_k rho L_k^dag - {L_k^dag L_k, rho}/2).
ComplexMatrix apply_generator(const QuantumSystem& sys, const ComplexMatrix& rho);

// Adjoint (Heisenberg) generator: L^dag(X) = i[H, X]
// + sum_k (L_k^dag X L_k - {L_k^dag L_k, X}/2).
ComplexMatrix apply_adjoint_generator(const QuantumSystem& sys, const ComplexMatrix& x);

// Dense superoperator such that vec(apply_generator(sys, rho)) = mat * vec(rho)
// under column-stacking.
Liouvillian build_liouvillian(const QuantumSystem& sys);

// exp(L t) applied to an arbitrary (not necessarily trace-one) matrix.
// Uses the dense exponential for dim <= 32 and adaptive RK4 on the d x d
// state otherwise; the RK4 path targets 1e-8 local error per step.
ComplexMatrix propagate_matrix(const QuantumSystem& sys, const ComplexMatrix& m0, double t);

// Propagates a density matrix and re-validates the result.
DensityMatrix propagate(const QuantumSystem& sys, const DensityMatrix& rho0, double t);

// Heisenberg-picture propagation of an observable, exp(L^dag t)(X).
ComplexMatrix propagate_adjoint(const QuantumSystem& sys, const ComplexMatrix& x0, double t);

// Smallest nonzero |Re(eigenvalue)| of the Liouvillian. Only computed densely
// for dim <= 32; returns 0 for larger systems (callers fall back to the
// rate-based horizon).
double liouvillian_gap(const QuantumSystem& sys);

// Largest jump rate, max_k ||L_k^dag L_k|| (falls back to ||H||, then 1).
double max_rate(const QuantumSystem& sys);

// Time horizon for asymptotic quantities: 50 / gap, or 1e4 / max_rate when
// the gap is unavailable or below 1e-10.
double convergence_horizon(const QuantumSystem& sys);

// Evolves rho0 to the asymptotic regime (step doubling until the projector
// overlaps stop changing, capped at the convergence horizon) and returns the
// weights tr[rho_inf P_j]. Throws ConvergenceFailure if the weights have not
// settled at the horizon, and WeightNormalization if they do not sum to 1
// within 1e-6. t_max_override > 0 replaces the automatic horizon.
RealVector asymptotic_weights(const QuantumSystem& sys, const DensityMatrix& rho0,
                              const std::vector<ComplexMatrix>& projectors,
                              double t_max_override = 0.0);

// The settled asymptotic state itself (same step-doubling convergence rule).
DensityMatrix asymptotic_state(const QuantumSystem& sys, const DensityMatrix& rho0);

// Heisenberg-picture limit of an observable under step doubling (used for
// conserved and infinite-time projectors).
ComplexMatrix asymptotic_adjoint(const QuantumSystem& sys, const ComplexMatrix& x0);

// Long-time average (1/T) int_0^T rho(t) dt for T -> infinity. Unlike
// asymptotic_state this also averages away persistent oscillations, so it is
// well defined even when the peripheral spectrum has nonzero frequencies.
// For dim <= 32 it projects onto the kernel of the generator spectrally;
// otherwise it window-averages with doubling horizons.
DensityMatrix time_averaged_asymptotic_state(const QuantumSystem& sys,
                                             const DensityMatrix& rho0);

}  // namespace unravel

#endif  // UNRAVEL_LINDBLAD_HPP_
