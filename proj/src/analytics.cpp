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

#include "unravel/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "unravel/errors.hpp"
#include "unravel/lindblad.hpp"

namespace unravel {

namespace {

constexpr double kInvariantTolerance = 1e-8;
constexpr double kSettleThreshold = 0.99;

void check_projector(const ComplexMatrix& p, const char* who) {
  if ((p - p.adjoint()).norm() > 1e-8 || (p * p - p).norm() > 1e-8) {
    throw NotAProjector(std::string(who) + ": operator is not a Hermitian idempotent");
  }
}

ComplexMatrix projector_isometry(const ComplexMatrix& p) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(p);
  std::vector<Index> keep;
  for (Index i = 0; i < p.rows(); ++i) {
    if (es.eigenvalues()(i) > 0.5) keep.push_back(i);
  }
  ComplexMatrix iso(p.rows(), static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) iso.col(c) = es.eigenvectors().col(keep[c]);
  return iso;
}

ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
  const RealVector clipped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clipped.cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

double uhlmann_fidelity(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
  const ComplexMatrix root = psd_sqrt(rho);
  ComplexMatrix inner = root * sigma * root;
  inner = 0.5 * (inner + inner.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(inner);
  const RealVector clipped = es.eigenvalues().cwiseMax(0.0);
  const double trace_root = clipped.cwiseSqrt().sum();
  return std::min(1.0, trace_root * trace_root);
}

// True when a - c*I vanishes for the scalar c = tr(a)/n; returns c.
bool is_scalar_block(const ComplexMatrix& a, double tol, Complex* scalar) {
  const Index n = a.rows();
  *scalar = a.trace() / static_cast<double>(n);
  return (a - *scalar * ComplexMatrix::Identity(n, n)).norm() <= tol;
}

}  // namespace

std::string localization_class_name(LocalizationClass value) {
  switch (value) {
    case LocalizationClass::kCaseI:
      return "case-i";
    case LocalizationClass::kCaseIINoiseless:
      return "case-ii-noiseless";
    case LocalizationClass::kCompleteExpected:
      return "complete-expected";
    case LocalizationClass::kUndetermined:
      return "undetermined";
  }
  return "undetermined";
}

double subspace_overlap(const DensityMatrix& rho, const ComplexMatrix& p) {
  if (p.rows() != rho.dim || p.cols() != rho.dim) {
    throw DimensionMismatch("subspace_overlap: projector size mismatch");
  }
  check_projector(p, "subspace_overlap");
  const double value = (rho.matrix * p).trace().real();
  return std::clamp(value, 0.0, 1.0);
}

LocalizationReport localization_statistics(
    const EnsembleStats& ensemble, const SubspaceDecomposition& dec,
    const std::vector<double>& predicted_weights) {
  if (ensemble.overlap_series.empty()) {
    throw ValidationError(
        "localization_statistics: ensemble carries no overlap series");
  }
  const std::size_t n_proj = ensemble.overlap_series.front().size();
  if (n_proj == 0) {
    throw ValidationError("localization_statistics: no projectors were tracked");
  }
  if (predicted_weights.size() != n_proj) {
    throw DimensionMismatch(
        "localization_statistics: predicted weight count does not match the "
        "tracked projectors");
  }
  double weight_sum = 0.0;
  for (double w : predicted_weights) {
    if (w < -1e-12) {
      throw WeightNormalization("localization_statistics: negative weight");
    }
    weight_sum += w;
  }
  if (std::abs(weight_sum - 1.0) > 1e-6) {
    throw WeightNormalization("localization_statistics: weights sum to " +
                              std::to_string(weight_sum));
  }

  const std::size_t n_traj = ensemble.overlap_series.size();
  LocalizationReport report;
  report.predicted_weights = predicted_weights;
  report.terminal_overlaps.assign(n_proj, std::vector<double>(n_traj, 0.0));
  report.frequencies.assign(n_proj, 0.0);
  report.z_scores.assign(n_proj, 0.0);
  report.localization_complete.assign(n_traj, false);
  report.terminal_subspace.assign(n_traj, -1);
  for (std::size_t p = 0; p < n_proj; ++p) {
    report.projector_ids.push_back("block-" + std::to_string(p));
  }

  for (std::size_t t = 0; t < n_traj; ++t) {
    const auto& per_proj = ensemble.overlap_series[t];
    if (per_proj.size() != n_proj) {
      throw DimensionMismatch("localization_statistics: ragged overlap series");
    }
    for (std::size_t p = 0; p < n_proj; ++p) {
      const auto& series = per_proj[p];
      if (series.empty()) {
        throw ValidationError("localization_statistics: empty overlap series");
      }
      report.terminal_overlaps[p][t] = series.back();
      const std::size_t tail =
          std::max<std::size_t>(1, series.size() / 10);
      bool settled = true;
      for (std::size_t s = series.size() - tail; s < series.size(); ++s) {
        if (series[s] <= kSettleThreshold) {
          settled = false;
          break;
        }
      }
      if (settled) {
        report.localization_complete[t] = true;
        report.terminal_subspace[t] = static_cast<int>(p);
        report.frequencies[p] += 1.0;
      }
    }
  }
  for (std::size_t p = 0; p < n_proj; ++p) {
    report.frequencies[p] /= static_cast<double>(n_traj);
    const double w = predicted_weights[p];
    const double var = w * (1.0 - w);
    if (var <= 0.0) {
      report.z_scores[p] = std::abs(report.frequencies[p] - w) < 1e-12
                               ? 0.0
                               : std::numeric_limits<double>::infinity();
    } else {
      report.z_scores[p] = (report.frequencies[p] - w) *
                           std::sqrt(static_cast<double>(n_traj)) /
                           std::sqrt(var);
    }
  }
  (void)dec;  // ids follow the tracked projector order, one per block supplied
  return report;
}

InvariantCheck check_invariant_diffusive(const QuantumSystem& sys,
                                         const DensityMatrix& rho) {
  if (rho.dim != sys.dim) {
    throw DimensionMismatch("check_invariant_diffusive: state size mismatch");
  }
  InvariantCheck out;
  out.lindblad_residual = apply_generator(sys, rho.matrix).norm();
  for (const ComplexMatrix& l : sys.jumps) {
    const Complex mean = ((l + l.adjoint()) * rho.matrix).trace();
    const double res =
        (l * rho.matrix + rho.matrix * l.adjoint() - mean * rho.matrix).norm();
    out.condition_residual = std::max(out.condition_residual, res);
  }
  out.invariant = out.lindblad_residual <= kInvariantTolerance &&
                  out.condition_residual <= kInvariantTolerance;
  return out;
}

InvariantCheck check_invariant_jump(const QuantumSystem& sys,
                                    const DensityMatrix& rho) {
  if (rho.dim != sys.dim) {
    throw DimensionMismatch("check_invariant_jump: state size mismatch");
  }
  InvariantCheck out;
  out.lindblad_residual = apply_generator(sys, rho.matrix).norm();
  for (const ComplexMatrix& l : sys.jumps) {
    const Complex rate = (l.adjoint() * l * rho.matrix).trace();
    const double res = (l * rho.matrix * l.adjoint() - rate * rho.matrix).norm();
    out.condition_residual = std::max(out.condition_residual, res);
  }
  out.invariant = out.lindblad_residual <= kInvariantTolerance &&
                  out.condition_residual <= kInvariantTolerance;
  return out;
}

LocalizationClass classify_incomplete_localization(const QuantumSystem& sys,
                                                   const ComplexMatrix& p_q,
                                                   const ComplexMatrix& p_p,
                                                   Scheme scheme) {
  if (p_q.rows() != sys.dim || p_p.rows() != sys.dim) {
    throw DimensionMismatch("classify_incomplete_localization: size mismatch");
  }
  check_projector(p_q, "classify_incomplete_localization");
  check_projector(p_p, "classify_incomplete_localization");
  if ((p_q * p_p).norm() > 1e-8) {
    throw ValidationError(
        "classify_incomplete_localization: projectors are not orthogonal");
  }
  const ComplexMatrix vq = projector_isometry(p_q);
  const ComplexMatrix vp = projector_isometry(p_p);
  const Index nq = vq.cols();
  const Index np = vp.cols();
  if (nq == 0 || np == 0) {
    throw ValidationError("classify_incomplete_localization: empty subspace");
  }

  // Case (i): every record observable restricts to the same scalar on both
  // blocks, so the records cannot distinguish them.
  bool case_i = true;
  for (const ComplexMatrix& l : sys.jumps) {
    const ComplexMatrix record = scheme == Scheme::kDiffusive
                                     ? ComplexMatrix(l + l.adjoint())
                                     : ComplexMatrix(l.adjoint() * l);
    const double tol = 1e-8 * std::max(1.0, record.norm());
    Complex cq, cp;
    if (!is_scalar_block((vq.adjoint() * record * vq).eval(), tol, &cq) ||
        !is_scalar_block((vp.adjoint() * record * vp).eval(), tol, &cp) ||
        std::abs(cq - cp) > tol) {
      case_i = false;
      break;
    }
  }
  if (case_i) return LocalizationClass::kCaseI;

  // Case (ii): an intertwiner X with O_pp X = X O_qq for every operator in
  // the closed family marks the blocks as noiselessly coupled.
  std::vector<ComplexMatrix> family{sys.hamiltonian};
  for (const ComplexMatrix& l : sys.jumps) {
    family.push_back(l);
    family.push_back(l.adjoint());
  }
  ComplexMatrix stacked(static_cast<Index>(family.size()) * nq * np, nq * np);
  Index row = 0;
  for (const ComplexMatrix& op : family) {
    const ComplexMatrix oqq = vq.adjoint() * op * vq;
    const ComplexMatrix opp = vp.adjoint() * op * vp;
    stacked.middleRows(row, nq * np) =
        kron(ComplexMatrix::Identity(nq, nq), opp) -
        kron(oqq.transpose(), ComplexMatrix::Identity(np, np));
    row += nq * np;
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(stacked);
  const RealVector& sv = svd.singularValues();
  const double smax = std::max(sv(0), 1e-300);
  if (sv(sv.size() - 1) < 1e-7 * smax) {
    return LocalizationClass::kCaseIINoiseless;
  }

  if (scheme == Scheme::kDiffusive) return LocalizationClass::kCompleteExpected;

  // Photodetection records are blind to a uniform phase redressing; only call
  // the outcome when the restricted Hamiltonian spectra cannot be reconciled
  // by a constant shift.
  if (nq != np) return LocalizationClass::kCompleteExpected;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eq((vq.adjoint() * sys.hamiltonian * vq).eval());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> ep((vp.adjoint() * sys.hamiltonian * vp).eval());
  RealVector sq = eq.eigenvalues();
  RealVector sp = ep.eigenvalues();
  sq.array() -= sq.mean();
  sp.array() -= sp.mean();
  if ((sq - sp).cwiseAbs().maxCoeff() > 1e-6) {
    return LocalizationClass::kCompleteExpected;
  }
  return LocalizationClass::kUndetermined;
}

ErgodicityReport mean_fidelity(const EnsembleStats& ensemble,
                               const DensityMatrix& rho_s) {
  if (ensemble.mean_fidelity_inputs.empty()) {
    throw ValidationError("mean_fidelity: ensemble carries no time averages");
  }
  ErgodicityReport report;
  for (const DensityMatrix& avg : ensemble.mean_fidelity_inputs) {
    if (avg.dim != rho_s.dim) {
      throw DimensionMismatch("mean_fidelity: state size mismatch");
    }
    report.fidelities.push_back(uhlmann_fidelity(avg.matrix, rho_s.matrix));
    report.mean_fidelity += report.fidelities.back();
  }
  report.mean_fidelity /= static_cast<double>(report.fidelities.size());

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho_s.matrix);
  RealVector weights = es.eigenvalues().cwiseMax(0.0);
  const double total = weights.sum();
  if (total > 0.0) weights /= total;
  report.predicted_participation = weights.squaredNorm();
  return report;
}

double participation_ratio(const std::vector<double>& weights) {
  double sum = 0.0;
  double sq = 0.0;
  for (double w : weights) {
    if (w < -1e-12) {
      throw WeightNormalization("participation_ratio: negative weight");
    }
    sum += w;
    sq += w * w;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw WeightNormalization("participation_ratio: weights sum to " +
                              std::to_string(sum));
  }
  return sq;
}

double l1_coherence(const DensityMatrix& rho, const std::vector<PureState>& basis) {
  for (std::size_t n = 0; n < basis.size(); ++n) {
    if (basis[n].dim != rho.dim) {
      throw DimensionMismatch("l1_coherence: basis state size mismatch");
    }
    for (std::size_t m = 0; m <= n; ++m) {
      const Complex overlap = basis[m].amplitudes.dot(basis[n].amplitudes);
      const double expected = n == m ? 1.0 : 0.0;
      if (std::abs(overlap - expected) > 1e-8) {
        throw ValidationError("l1_coherence: basis is not orthonormal");
      }
    }
  }
  double total = 0.0;
  for (std::size_t n = 0; n < basis.size(); ++n) {
    for (std::size_t m = 0; m < basis.size(); ++m) {
      if (n == m) continue;
      total += std::abs(basis[n].amplitudes.dot(rho.matrix * basis[m].amplitudes));
    }
  }
  return total;
}

double concurrence(const DensityMatrix& rho_two_qubit) {
  if (rho_two_qubit.dim != 4) {
    throw DimensionMismatch("concurrence: state is not a two-qubit state");
  }
  ComplexMatrix yy = ComplexMatrix::Zero(4, 4);
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const ComplexMatrix flipped =
      yy * rho_two_qubit.matrix.conjugate() * yy;
  const ComplexMatrix product = rho_two_qubit.matrix * flipped;
  Eigen::ComplexEigenSolver<ComplexMatrix> es(product);
  std::vector<double> roots;
  for (Index i = 0; i < 4; ++i) {
    roots.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(i).real())));
  }
  std::sort(roots.begin(), roots.end(), std::greater<>());
  return std::max(0.0, roots[0] - roots[1] - roots[2] - roots[3]);
}

DensityMatrix reduce_to_qubit_pair(const DensityMatrix& rho, int qubit_i,
                                   int qubit_j) {
  int n_qubits = 0;
  while ((Index(1) << n_qubits) < rho.dim) ++n_qubits;
  if ((Index(1) << n_qubits) != rho.dim) {
    throw DimensionMismatch("reduce_to_qubit_pair: dimension is not a power of two");
  }
  if (qubit_i == qubit_j || qubit_i < 0 || qubit_j < 0 || qubit_i >= n_qubits ||
      qubit_j >= n_qubits) {
    throw ValidationError("reduce_to_qubit_pair: invalid qubit indices");
  }
  const auto bit = [&](Index a, int site) {
    return static_cast<Index>((a >> (n_qubits - 1 - site)) & 1);
  };
  DensityMatrix out;
  out.dim = 4;
  out.matrix = ComplexMatrix::Zero(4, 4);
  const Index mask_i = Index(1) << (n_qubits - 1 - qubit_i);
  const Index mask_j = Index(1) << (n_qubits - 1 - qubit_j);
  const Index rest_mask = rho.dim - 1 - mask_i - mask_j;
  for (Index a = 0; a < rho.dim; ++a) {
    for (Index b = 0; b < rho.dim; ++b) {
      if ((a & rest_mask) != (b & rest_mask)) continue;
      const Index r = 2 * bit(a, qubit_i) + bit(a, qubit_j);
      const Index c = 2 * bit(b, qubit_i) + bit(b, qubit_j);
      out.matrix(r, c) += rho.matrix(a, b);
    }
  }
  return out;
}

UpdateRuleReport verify_update_rule(const QuantumSystem& sys,
                                    const DensityMatrix& rho0,
                                    const std::vector<TrajectoryRecord>& records,
                                    const SubspaceDecomposition& dec) {
  if (records.empty()) {
    throw ValidationError("verify_update_rule: no trajectory records supplied");
  }
  std::vector<std::size_t> minimal_blocks;
  for (std::size_t b = 0; b < dec.blocks.size(); ++b) {
    if (dec.roles[b] == BlockRole::kMinimalAsymptotic) minimal_blocks.push_back(b);
  }
  if (minimal_blocks.empty()) {
    throw ValidationError("verify_update_rule: decomposition has no minimal blocks");
  }

  UpdateRuleReport report;
  report.restricted_systems_valid = true;
  std::vector<ComplexMatrix> projectors;
  std::vector<DensityMatrix> extremal;
  std::vector<double> predicted;
  for (std::size_t b : minimal_blocks) {
    const ComplexMatrix p = block_projector(dec, b);
    projectors.push_back(p);
    predicted.push_back(
        std::clamp((infinite_time_projector(sys, p) * rho0.matrix).trace().real(),
                   0.0, 1.0));
    try {
      extremal.push_back(extremal_state_on_block(sys, dec, b));
      const ComplexMatrix complement =
          ComplexMatrix::Identity(sys.dim, sys.dim) - p;
      if ((complement * sys.hamiltonian * p).norm() >
          1e-8 * std::max(1.0, sys.hamiltonian.norm())) {
        report.restricted_systems_valid = false;
      }
      for (const ComplexMatrix& l : sys.jumps) {
        if ((complement * l * p).norm() > 1e-8 * std::max(1.0, l.norm())) {
          report.restricted_systems_valid = false;
        }
      }
    } catch (const Error&) {
      report.restricted_systems_valid = false;
      extremal.push_back(DensityMatrix{});
    }
  }
  report.predicted_frequencies = predicted;
  report.selection_frequencies.assign(projectors.size(), 0.0);

  bool all_localized = true;
  bool distances_ok = true;
  for (const TrajectoryRecord& record : records) {
    if (record.states.empty()) {
      throw ValidationError("verify_update_rule: record carries no stored states");
    }
    const std::size_t n_samples = record.states.size();
    const std::size_t tail = std::max<std::size_t>(1, n_samples / 10);
    int terminal = -1;
    for (std::size_t p = 0; p < projectors.size(); ++p) {
      bool settled = true;
      for (std::size_t s = n_samples - tail; s < n_samples; ++s) {
        if (subspace_overlap(record.states[s], projectors[p]) <= kSettleThreshold) {
          settled = false;
          break;
        }
      }
      if (settled) {
        terminal = static_cast<int>(p);
        break;
      }
    }
    report.terminal_subspace.push_back(terminal);
    if (terminal < 0) {
      all_localized = false;
      report.average_distances.push_back(
          std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    report.selection_frequencies[terminal] += 1.0;
    const double t_burn = record.times.front() +
                          0.7 * (record.times.back() - record.times.front());
    const DensityMatrix avg = time_average(record, t_burn);
    const double dist =
        extremal[terminal].dim > 0
            ? (avg.matrix - extremal[terminal].matrix).norm()
            : std::numeric_limits<double>::infinity();
    report.average_distances.push_back(dist);
    if (!(dist <= 2e-2)) distances_ok = false;
  }
  const double n = static_cast<double>(records.size());
  bool frequencies_ok = true;
  for (std::size_t p = 0; p < projectors.size(); ++p) {
    report.selection_frequencies[p] /= n;
    const double w = predicted[p];
    const double sigma = std::sqrt(std::max(w * (1.0 - w), 0.0) / n);
    if (std::abs(report.selection_frequencies[p] - w) > 3.0 * sigma + 1e-9) {
      frequencies_ok = false;
    }
  }
  report.passed = report.restricted_systems_valid && all_localized &&
                  distances_ok && frequencies_ok;
  return report;
}

}  // namespace unravel
