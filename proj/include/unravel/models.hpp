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

#ifndef UNRAVEL_MODELS_HPP_
#define UNRAVEL_MODELS_HPP_

#include <map>
#include <string>
#include <vector>

#include "unravel/system.hpp"

namespace unravel {

// ---- local operators ----

// Qubit basis convention: index 0 is the excited state (sigma_z = diag(1,-1)),
// sigma_minus lowers index 0 -> 1, so sigma_plus*sigma_minus = diag(1,0).
ComplexMatrix sigma_x();
ComplexMatrix sigma_y();
ComplexMatrix sigma_z();
ComplexMatrix sigma_plus();
ComplexMatrix sigma_minus();

// Spin-1 operators in the S^z basis ordered m = -1, 0, +1 (index 0 <-> m=-1).
ComplexMatrix spin1_sz();
ComplexMatrix spin1_sx();
ComplexMatrix spin1_sy();
ComplexMatrix spin1_sp();
ComplexMatrix spin1_sm();

// Embeds a single-site operator at (0-based) site within n sites of local
// dimension local_dim.
ComplexMatrix op_at(const ComplexMatrix& op, int site, int n_sites, int local_dim);

// Truncated bosonic annihilation operator, a|n> = sqrt(n)|n-1>, dim n_fock.
ComplexMatrix annihilation(int n_fock);

// Normalized truncated coherent state.
PureState coherent_state(Complex alpha, int n_fock);

// Normalized even (parity=+1) or odd (parity=-1) cat state at amplitude alpha.
PureState cat_state(Complex alpha, int parity, int n_fock);

// Projector onto the even (+1) or odd (-1) photon-number-parity subspace.
ComplexMatrix parity_projector(int n_fock, int parity);

// ---- monitored systems ----

// H = omega * sigma_z, L = sqrt(gamma) * sigma_plus * sigma_minus.
QuantumSystem build_monitored_qubit(double omega, double gamma);

/// Two qubits with a collective decay channel. Per-site basis here is
// ground-first (|0> = ground), so H = (omega0/2)(sz x 1 + 1 x sz) with
// sz = diag(-1,1) and L = sqrt(gamma)(s- x 1 + 1 x s-) with s-|1> = |0>;
// |00> and the singlet (|10>-|01>)/sqrt(2) are dark.
QuantumSystem build_two_qubit_dark(double omega0, double gamma);

// Companion product state (cos(theta)|0> + sin(theta)|1>) x (cos(theta)|0>
// + e^{-i phi} sin(theta)|1>).
PureState two_qubit_product_state(double theta, double phi);

/// Kerr resonator with two-photon drive and two-photon loss:
// H = -delta a^dag a + (lambda/2)(a^dag^2 + a^2) + (kerr/2) a^dag^2 a^2,
// L = sqrt(gamma) a^2 in an n_fock-dimensional truncation.
QuantumSystem build_kerr(double delta, double lambda, double kerr, double gamma, int n_fock);

// Spin-1 chain with periodic XY coupling, field and single-ion anisotropy:
// H = sum_j (Sx_j Sx_{j+1} + Sy_j Sy_{j+1}) + h sum_j Sz_j + d sum_j (Sz_j)^2.
// Jump channels L_j = Sx_j (Sx_j Sx_{j+1} + Sy_j Sy_{j+1}) for each bond; when
// gamma_dephasing > 0 an extra collective channel sqrt(gamma) sum_j Sz_j is
// appended.
QuantumSystem build_scar_chain(int n_sites, double h, double d, double gamma_dephasing);

// The tower (Q^dag)^n |-1,...,-1> (normalized), with
// Q^dag = sum_j (-1)^j (S^+_j)^2. Contains n_sites + 1 states.
std::vector<PureState> scar_tower(int n_sites);

// Spin-1/2 XX ring: H = omega sum_k sigma_z_k + j_hop sum_k (sigma_plus_k
// sigma_minus_{k+1} + h.c.), dephasing channels L = sqrt(gamma) sigma_z_u at
// the given 1-based sites.
QuantumSystem build_xx_ring(int n_sites, double omega, double j_hop, double gamma,
                            const std::vector<int>& sites);

struct PlacementReport {
  bool unique_modes = false;
  std::string detail;
};

// Checks whether the monitored-site placement leaves exactly one protected
// mode pair: a single site on a 5-site ring, or two sites at circular
// distance 3 on a ring whose length is a multiple of 6.
PlacementReport xx_ring_placement(int n_sites, const std::vector<int>& sites);

// ---- presets ----

struct Preset {
  std::string name;
  QuantumSystem system;
  DensityMatrix initial_state;
  std::map<std::string, double> parameters;
};

// Known names: "qubit", "two-qubit-dark", "kerr", "kerr-bistable", "scar",
// "xx-ring". Parameter overrides are applied on top of the documented
// defaults. Throws ValidationError for unknown names or parameters.
Preset make_preset(const std::string& name,
                   const std::map<std::string, double>& overrides = {});

std::vector<std::string> preset_names();

}  // namespace unravel

#endif  // UNRAVEL_MODELS_HPP_
