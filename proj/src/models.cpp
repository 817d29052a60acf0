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

#include "unravel/models.hpp"

#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "unravel/errors.hpp"
#include "unravel/linalg.hpp"

namespace unravel {

namespace {

constexpr Complex kI{0.0, 1.0};

ComplexMatrix identity(Index d) { return ComplexMatrix::Identity(d, d); }

}  // namespace

ComplexMatrix sigma_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

ComplexMatrix sigma_y() {
  ComplexMatrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}

ComplexMatrix sigma_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

ComplexMatrix sigma_plus() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

ComplexMatrix sigma_minus() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}

ComplexMatrix spin1_sz() {
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m(0, 0) = -1.0;
  m(2, 2) = 1.0;
  return m;
}

ComplexMatrix spin1_sp() {
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  const double r2 = std::sqrt(2.0);
  m(1, 0) = r2;
  m(2, 1) = r2;
  return m;
}

ComplexMatrix spin1_sm() { return spin1_sp().adjoint(); }

ComplexMatrix spin1_sx() { return 0.5 * (spin1_sp() + spin1_sm()); }

ComplexMatrix spin1_sy() { return (spin1_sp() - spin1_sm()) / (2.0 * kI); }

ComplexMatrix op_at(const ComplexMatrix& op, int site, int n_sites, int local_dim) {
  if (site < 0 || site >= n_sites) {
    throw DimensionMismatch("op_at: site index out of range");
  }
  if (op.rows() != local_dim || op.cols() != local_dim) {
    throw DimensionMismatch("op_at: operator does not match local dimension");
  }
  ComplexMatrix out = identity(1);
  for (int s = 0; s < n_sites; ++s) {
    out = kron(out, s == site ? op : identity(local_dim));
  }
  return out;
}

ComplexMatrix annihilation(int n_fock) {
  if (n_fock < 1) throw DimensionMismatch("annihilation: n_fock must be positive");
  ComplexMatrix a = ComplexMatrix::Zero(n_fock, n_fock);
  for (int n = 1; n < n_fock; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

PureState coherent_state(Complex alpha, int n_fock) {
  ComplexVector v(n_fock);
  Complex amp = 1.0;
  v(0) = amp;
  for (int n = 1; n < n_fock; ++n) {
    amp *= alpha / std::sqrt(static_cast<double>(n));
    v(n) = amp;
  }
  v.normalize();
  return make_pure(v);
}

PureState cat_state(Complex alpha, int parity, int n_fock) {
  if (parity != 1 && parity != -1) {
    throw ValidationError("cat_state: parity must be +1 or -1");
  }
  ComplexVector plus = coherent_state(alpha, n_fock).amplitudes;
  ComplexVector minus = coherent_state(-alpha, n_fock).amplitudes;
  ComplexVector v = plus + static_cast<double>(parity) * minus;
  const double norm = v.norm();
  if (norm < 1e-12) {
    throw ValidationError("cat_state: degenerate superposition at tiny alpha");
  }
  v /= norm;
  return make_pure(v);
}

ComplexMatrix parity_projector(int n_fock, int parity) {
  if (parity != 1 && parity != -1) {
    throw ValidationError("parity_projector: parity must be +1 or -1");
  }
  ComplexMatrix p = ComplexMatrix::Zero(n_fock, n_fock);
  for (int n = (parity == 1 ? 0 : 1); n < n_fock; n += 2) p(n, n) = 1.0;
  return p;
}

QuantumSystem build_monitored_qubit(double omega, double gamma) {
  if (gamma < 0) throw ValidationError("build_monitored_qubit: gamma must be >= 0");
  ComplexMatrix h = omega * sigma_z();
  std::vector<ComplexMatrix> jumps;
  if (gamma > 0) {
    jumps.push_back(std::sqrt(gamma) * sigma_plus() * sigma_minus());
  }
  return new_system(h, jumps, jumps.empty() ? std::vector<std::string>{}
                                            : std::vector<std::string>{"L"});
}

QuantumSystem build_two_qubit_dark(double omega0, double gamma) {
  if (gamma < 0) throw ValidationError("build_two_qubit_dark: gamma must be >= 0");
  // Per-site basis: index 0 = ground, index 1 = excited.
  ComplexMatrix sz = ComplexMatrix::Zero(2, 2);
  sz(0, 0) = -1.0;
  sz(1, 1) = 1.0;
  ComplexMatrix lower = ComplexMatrix::Zero(2, 2);
  lower(0, 1) = 1.0;
  ComplexMatrix h = 0.5 * omega0 * (op_at(sz, 0, 2, 2) + op_at(sz, 1, 2, 2));
  std::vector<ComplexMatrix> jumps;
  if (gamma > 0) {
    jumps.push_back(std::sqrt(gamma) * (op_at(lower, 0, 2, 2) + op_at(lower, 1, 2, 2)));
  }
  return new_system(h, jumps, jumps.empty() ? std::vector<std::string>{}
                                            : std::vector<std::string>{"L"});
}

PureState two_qubit_product_state(double theta, double phi) {
  ComplexVector site1(2), site2(2);
  site1 << std::cos(theta), std::sin(theta);
  site2 << std::cos(theta), std::exp(-kI * phi) * std::sin(theta);
  ComplexVector v(4);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) v(2 * a + b) = site1(a) * site2(b);
  }
  v.normalize();
  return make_pure(v);
}

QuantumSystem build_kerr(double delta, double lambda, double kerr, double gamma,
                         int n_fock) {
  if (n_fock < 4) throw ValidationError("build_kerr: n_fock must be >= 4");
  if (gamma < 0) throw ValidationError("build_kerr: gamma must be >= 0");
  ComplexMatrix a = annihilation(n_fock);
  ComplexMatrix ad = a.adjoint();
  ComplexMatrix h = -delta * ad * a + 0.5 * lambda * (ad * ad + a * a) +
                    0.5 * kerr * ad * ad * a * a;
  std::vector<ComplexMatrix> jumps{std::sqrt(gamma) * a * a};
  return new_system(h, jumps, {"L"});
}

QuantumSystem build_scar_chain(int n_sites, double h, double d, double gamma_dephasing) {
  if (n_sites < 2) throw ValidationError("build_scar_chain: n_sites must be >= 2");
  if (gamma_dephasing < 0) {
    throw ValidationError("build_scar_chain: gamma_dephasing must be >= 0");
  }
  const Index dim = static_cast<Index>(std::pow(3.0, n_sites) + 0.5);
  ComplexMatrix ham = ComplexMatrix::Zero(dim, dim);
  ComplexMatrix sz_total = ComplexMatrix::Zero(dim, dim);
  std::vector<ComplexMatrix> jumps;
  std::vector<std::string> labels;
  for (int j = 0; j < n_sites; ++j) {
    const int jn = (j + 1) % n_sites;
    ComplexMatrix sxj = op_at(spin1_sx(), j, n_sites, 3);
    ComplexMatrix syj = op_at(spin1_sy(), j, n_sites, 3);
    ComplexMatrix szj = op_at(spin1_sz(), j, n_sites, 3);
    ComplexMatrix bond = sxj * op_at(spin1_sx(), jn, n_sites, 3) +
                         syj * op_at(spin1_sy(), jn, n_sites, 3);
    ham += bond + h * szj + d * szj * szj;
    sz_total += szj;
    jumps.push_back(sxj * bond);
    labels.push_back("L" + std::to_string(j + 1));
  }
  if (gamma_dephasing > 0) {
    jumps.push_back(std::sqrt(gamma_dephasing) * sz_total);
    labels.push_back("Lz");
  }
  return new_system(ham, jumps, labels);
}

std::vector<PureState> scar_tower(int n_sites) {
  if (n_sites < 2) throw ValidationError("scar_tower: n_sites must be >= 2");
  const Index dim = static_cast<Index>(std::pow(3.0, n_sites) + 0.5);
  ComplexMatrix qdag = ComplexMatrix::Zero(dim, dim);
  ComplexMatrix sp2 = spin1_sp() * spin1_sp();
  for (int j = 0; j < n_sites; ++j) {
    const double sign = ((j + 1) % 2 == 0) ? 1.0 : -1.0;
    qdag += sign * op_at(sp2, j, n_sites, 3);
  }
  std::vector<PureState> tower;
  ComplexVector v = ComplexVector::Zero(dim);
  v(0) = 1.0;  // |-1,...,-1>
  tower.push_back(make_pure(v));
  for (int n = 1; n <= n_sites; ++n) {
    v = qdag * v;
    const double norm = v.norm();
    if (norm < 1e-12) {
      throw ConvergenceFailure("scar_tower: ladder terminated early");
    }
    v /= norm;
    tower.push_back(make_pure(v));
  }
  return tower;
}

QuantumSystem build_xx_ring(int n_sites, double omega, double j_hop, double gamma,
                            const std::vector<int>& sites) {
  if (n_sites < 3) throw ValidationError("build_xx_ring: n_sites must be >= 3");
  if (gamma < 0) throw ValidationError("build_xx_ring: gamma must be >= 0");
  for (int s : sites) {
    if (s < 1 || s > n_sites) {
      throw ValidationError("build_xx_ring: monitored site out of range (1-based)");
    }
  }
  // Per-site basis: index 0 = ground ("0"), index 1 = flipped ("1").
  ComplexMatrix sz = ComplexMatrix::Zero(2, 2);
  sz(0, 0) = -1.0;
  sz(1, 1) = 1.0;
  ComplexMatrix raise = ComplexMatrix::Zero(2, 2);
  raise(1, 0) = 1.0;
  ComplexMatrix lower = raise.adjoint();
  const Index dim = Index{1} << n_sites;
  ComplexMatrix ham = ComplexMatrix::Zero(dim, dim);
  for (int k = 0; k < n_sites; ++k) {
    const int kn = (k + 1) % n_sites;
    ham += omega * op_at(sz, k, n_sites, 2);
    ham += j_hop * (op_at(raise, k, n_sites, 2) * op_at(lower, kn, n_sites, 2) +
                    op_at(lower, k, n_sites, 2) * op_at(raise, kn, n_sites, 2));
  }
  std::vector<ComplexMatrix> jumps;
  std::vector<std::string> labels;
  for (int s : sites) {
    jumps.push_back(std::sqrt(gamma) * op_at(sz, s - 1, n_sites, 2));
    labels.push_back("Lz" + std::to_string(s));
  }
  return new_system(ham, jumps, labels);
}

PlacementReport xx_ring_placement(int n_sites, const std::vector<int>& sites) {
  PlacementReport report;
  std::set<int> unique(sites.begin(), sites.end());
  std::ostringstream detail;
  if (n_sites == 5 && unique.size() == 1) {
    report.unique_modes = true;
    detail << "five-site ring with single-site monitoring protects one mode pair";
  } else if (n_sites % 6 == 0 && unique.size() == 2) {
    auto it = unique.begin();
    const int u = *it++;
    const int v = *it;
    const int dist = std::min((v - u + n_sites) % n_sites, (u - v + n_sites) % n_sites);
    if (dist == 3) {
      report.unique_modes = true;
      detail << "ring length divisible by 6 with monitors three sites apart";
    } else {
      detail << "two monitors must sit three sites apart (circular distance " << dist
             << ")";
    }
  } else {
    detail << "configuration does not match the single protected-mode rules";
  }
  report.detail = detail.str();
  return report;
}

namespace {

DensityMatrix pure_density(const PureState& psi) { return to_density(psi); }

std::map<std::string, double> merge_params(std::map<std::string, double> defaults,
                                           const std::map<std::string, double>& overrides,
                                           const std::string& name) {
  for (const auto& [key, value] : overrides) {
    auto it = defaults.find(key);
    if (it == defaults.end()) {
      throw ValidationError("make_preset: unknown parameter '" + key + "' for preset '" +
                            name + "'");
    }
    it->second = value;
  }
  return defaults;
}

}  // namespace

Preset make_preset(const std::string& name,
                   const std::map<std::string, double>& overrides) {
  Preset preset;
  preset.name = name;
  if (name == "qubit") {
    auto p = merge_params({{"omega", 1.0}, {"gamma", 0.7}}, overrides, name);
    preset.system = build_monitored_qubit(p.at("omega"), p.at("gamma"));
    ComplexVector v(2);
    v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    preset.initial_state = pure_density(make_pure(v));
    preset.parameters = p;
  } else if (name == "two-qubit-dark") {
    auto p = merge_params(
        {{"omega0", 1.0}, {"gamma", 0.2}, {"theta", M_PI / 4.0}, {"phi", M_PI / 3.0}},
        overrides, name);
    preset.system = build_two_qubit_dark(p.at("omega0"), p.at("gamma"));
    preset.initial_state = pure_density(two_qubit_product_state(p.at("theta"), p.at("phi")));
    preset.parameters = p;
  } else if (name == "kerr" || name == "kerr-bistable") {
    auto p = merge_params({{"delta", name == "kerr" ? 2.0 : 0.0},
                           {"lambda", 1.75},
                           {"kerr", 1.0 / 3.0},
                           {"gamma", 0.5},
                           {"n_fock", 20.0}},
                          overrides, name);
    const int n_fock = static_cast<int>(p.at("n_fock") + 0.5);
    preset.system =
        build_kerr(p.at("delta"), p.at("lambda"), p.at("kerr"), p.at("gamma"), n_fock);
    ComplexVector v = ComplexVector::Zero(n_fock);
    v(8) = 1.0 / std::sqrt(2.0);
    v(9) = 1.0 / std::sqrt(2.0);
    preset.initial_state = pure_density(make_pure(v));
    preset.parameters = p;
  } else if (name == "scar") {
    auto p = merge_params({{"n_sites", 2.0}, {"h", 1.0}, {"d", 1.3}, {"gamma", 1.0}},
                          overrides, name);
    const int n_sites = static_cast<int>(p.at("n_sites") + 0.5);
    preset.system = build_scar_chain(n_sites, p.at("h"), p.at("d"), p.at("gamma"));
    // Uniform superposition over the scar tower: equal asymptotic weights,
    // full initial coherence in the scar basis.
    const std::vector<PureState> tower = scar_tower(n_sites);
    ComplexVector v = ComplexVector::Zero(preset.system.dim);
    for (const PureState& s : tower) v += s.amplitudes;
    v /= std::sqrt(double(tower.size()));
    preset.initial_state = pure_density(make_pure(v));
    preset.parameters = p;
  } else if (name == "xx-ring") {
    auto p = merge_params({{"n_sites", 6.0},
                           {"omega", 1.0},
                           {"j", 1.0},
                           {"gamma", 0.4},
                           {"site_u", 1.0},
                           {"site_v", 4.0}},
                          overrides, name);
    const int n_sites = static_cast<int>(p.at("n_sites") + 0.5);
    std::vector<int> sites{static_cast<int>(p.at("site_u") + 0.5)};
    const int site_v = static_cast<int>(p.at("site_v") + 0.5);
    if (site_v > 0) sites.push_back(site_v);
    preset.system = build_xx_ring(n_sites, p.at("omega"), p.at("j"), p.at("gamma"), sites);
    // |010...0>: the second site flipped (sites are most-significant-first).
    const Index dim = Index{1} << n_sites;
    ComplexVector v = ComplexVector::Zero(dim);
    v(Index{1} << (n_sites - 2)) = 1.0;
    preset.initial_state = pure_density(make_pure(v));
    preset.parameters = p;
  } else {
    throw ValidationError("make_preset: unknown preset '" + name + "'");
  }
  return preset;
}

std::vector<std::string> preset_names() {
  return {"qubit", "two-qubit-dark", "kerr", "kerr-bistable", "scar", "xx-ring"};
}

}  // namespace unravel
