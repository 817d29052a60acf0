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

#include "unravel/structure.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <string>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "unravel/errors.hpp"
#include "unravel/lindblad.hpp"

namespace unravel {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr Index kLapackThreshold = 1024;  // matrix size where LAPACK takes over
constexpr double kSupportEigThreshold = 1e-8;
constexpr double kStationaryResidual = 1e-7;

// Hermitian eigendecomposition that stays fast for the d^2 x d^2 commutant
// matrices: LAPACK zheev for big sizes, Eigen otherwise. Ascending values.
void hermitian_eig_adaptive(ComplexMatrix& matrix, RealVector& values) {
  const Index n = matrix.rows();
  if (n >= kLapackThreshold) {
    values.resize(n);
    const lapack_int info = LAPACKE_zheev(
        LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
        matrix.data(), static_cast<lapack_int>(n), values.data());
    if (info != 0) {
      throw ConvergenceFailure("hermitian eigensolver failed with info " +
                               std::to_string(info));
    }
    return;  // matrix now holds the eigenvectors
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(matrix);
  if (es.info() != Eigen::Success) {
    throw ConvergenceFailure("hermitian eigensolver failed");
  }
  values = es.eigenvalues();
  matrix = es.eigenvectors();
}

double normal_draw(std::mt19937_64& eng) {
  const double u1 = static_cast<double>(eng() >> 11) * 0x1.0p-53;
  const double u2 = static_cast<double>(eng() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2);
}

// Accumulates the commutant penalty of A into m: a PSD form whose kernel is
// {X : [A, X] = 0 and [A^dag, X] = 0} under column-stacking vectorization.
void accumulate_commutant_penalty(ComplexMatrix& m, const ComplexMatrix& a) {
  const Index d = a.rows();
  const ComplexMatrix adj = a.adjoint();
  const ComplexMatrix s = adj * a + a * adj;
  const ComplexMatrix s_conj = s.conjugate();
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      auto block = m.block(i * d, j * d, d, d);
      block.noalias() -= 2.0 * a(j, i) * adj;
      block.noalias() -= 2.0 * std::conj(a(i, j)) * a;
      if (i == j) block += s;
      block.diagonal().array() += s_conj(i, j);
    }
  }
}

struct Clustering {
  std::vector<Index> sizes;
};

Clustering cluster_ascending(const RealVector& values) {
  const Index n = values.size();
  const double spread = values(n - 1) - values(0);
  const double cut = std::max(1e-6, 1e-3 * spread);
  Clustering out;
  Index run = 1;
  for (Index i = 1; i < n; ++i) {
    if (values(i) - values(i - 1) > cut) {
      out.sizes.push_back(run);
      run = 1;
    } else {
      ++run;
    }
  }
  out.sizes.push_back(run);
  return out;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void join(int a, int b) { parent[find(a)] = find(b); }
};

ComplexMatrix random_hermitian_combination(const std::vector<ComplexMatrix>& kernel,
                                           std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  ComplexMatrix y = ComplexMatrix::Zero(kernel.front().rows(), kernel.front().cols());
  for (const ComplexMatrix& z : kernel) {
    const double re = normal_draw(eng);
    const double im = normal_draw(eng);
    y += Complex(re, im) * z;
  }
  return 0.5 * (y + y.adjoint()).eval();
}

// Orthonormal columns spanning the range of a Hermitian PSD matrix.
ComplexMatrix support_isometry(const ComplexMatrix& p, double rel_threshold) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(p);
  const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
  std::vector<Index> keep;
  for (Index i = 0; i < p.rows(); ++i) {
    if (es.eigenvalues()(i) > rel_threshold * std::max(top, 1e-300)) keep.push_back(i);
  }
  ComplexMatrix iso(p.rows(), static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) iso.col(c) = es.eigenvectors().col(keep[c]);
  return iso;
}

QuantumSystem restricted_system(const QuantumSystem& sys, const ComplexMatrix& iso) {
  ComplexMatrix h = iso.adjoint() * sys.hamiltonian * iso;
  h = 0.5 * (h + h.adjoint()).eval();
  std::vector<ComplexMatrix> jumps;
  jumps.reserve(sys.jumps.size());
  for (const ComplexMatrix& l : sys.jumps) jumps.push_back(iso.adjoint() * l * iso);
  return new_system(h, jumps, sys.labels);
}

std::vector<ComplexMatrix> closed_family(const QuantumSystem& sys) {
  std::vector<ComplexMatrix> ops{sys.hamiltonian};
  for (const ComplexMatrix& l : sys.jumps) ops.push_back(l);
  return ops;
}

// Unique stationary state of a minimal fully-asymptotic system via the null
// space of its Liouvillian.
DensityMatrix stationary_on_minimal(const QuantumSystem& sys) {
  DensityMatrix out;
  out.dim = sys.dim;
  if (sys.dim == 1) {
    out.matrix = ComplexMatrix::Ones(1, 1);
    return out;
  }
  const ComplexMatrix liou = build_liouvillian(sys).matrix;
  Eigen::JacobiSVD<ComplexMatrix> svd(liou, Eigen::ComputeFullV);
  const RealVector& sv = svd.singularValues();
  const double smax = sv(0);
  const double tol = std::max(1e-8 * smax, 1e-13);
  Index null_dim = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) < tol) ++null_dim;
  }
  if (null_dim == 0) {
    throw ConvergenceFailure("minimal block has no numerical null space");
  }
  if (null_dim > 1) {
    throw DegenerateBlock("claimed-minimal block has a null space of dimension " +
                          std::to_string(null_dim));
  }
  const ComplexMatrix raw = unvectorize(svd.matrixV().col(sv.size() - 1), sys.dim);
  const ComplexMatrix herm = 0.5 * (raw + raw.adjoint());
  const ComplexMatrix anti = (raw - raw.adjoint()) / (2.0 * kI);
  ComplexMatrix z = herm.norm() >= anti.norm() ? herm : anti;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(z);
  RealVector evals = es.eigenvalues();
  if (evals.sum() < 0.0) evals = -evals;
  evals = evals.cwiseMax(0.0);
  const double total = evals.sum();
  if (total <= 0.0) {
    throw ConvergenceFailure("stationary null vector collapsed under PSD projection");
  }
  evals /= total;
  out.matrix = es.eigenvectors() * evals.asDiagonal() * es.eigenvectors().adjoint();
  const double residual = apply_generator(sys, out.matrix).norm();
  if (residual > kStationaryResidual) {
    throw ConvergenceFailure("stationary state residual " + std::to_string(residual) +
                             " above tolerance");
  }
  return out;
}

// Smallest subspace containing the given columns that is invariant under H
// and every L_k, L_k^dag. Built from the exact operators, so restricting the
// system to it is numerically safe.
ComplexMatrix invariant_closure(const QuantumSystem& sys, const ComplexMatrix& seed_cols) {
  std::vector<ComplexMatrix> generators{sys.hamiltonian};
  for (const ComplexMatrix& l : sys.jumps) {
    generators.push_back(l);
    generators.push_back(l.adjoint());
  }
  ComplexMatrix basis = seed_cols;
  Index rank = 0;
  for (Index round = 0; round <= sys.dim; ++round) {
    ComplexMatrix grown(sys.dim, basis.cols() * (1 + static_cast<Index>(generators.size())));
    grown.leftCols(basis.cols()) = basis;
    Index offset = basis.cols();
    for (const ComplexMatrix& g : generators) {
      grown.middleCols(offset, basis.cols()) = g * basis;
      offset += basis.cols();
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(grown, Eigen::ComputeThinU);
    const RealVector& sv = svd.singularValues();
    Index new_rank = 0;
    for (Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > 1e-10 * sv(0)) ++new_rank;
    }
    basis = svd.matrixU().leftCols(new_rank);
    if (new_rank == rank) break;
    rank = new_rank;
  }
  return basis;
}

// Assembles the output of the structure resolution.
struct ResolutionAccumulator {
  Index dim;
  ComplexMatrix columns;
  Index used = 0;
  std::vector<Block> blocks;
  std::vector<BlockRole> roles;
  std::vector<int> family_ids;
  std::vector<DensityMatrix> states;
  std::vector<ComplexMatrix> supports;
  int next_family = 0;

  explicit ResolutionAccumulator(Index d) : dim(d), columns(ComplexMatrix::Zero(d, d)) {}

  void add_chunk(const ComplexMatrix& cols, BlockRole role, int family) {
    columns.middleCols(used, cols.cols()) = cols;
    blocks.push_back({used, cols.cols()});
    roles.push_back(role);
    family_ids.push_back(family);
    used += cols.cols();
  }
};

void resolve_invariant_subspace(const QuantumSystem& sys, const ComplexMatrix& iso,
                                double epsilon, std::uint64_t seed,
                                ResolutionAccumulator& acc, int depth) {
  if (depth > 6) {
    throw ConvergenceFailure("structure resolution exceeded nesting limit");
  }
  const QuantumSystem sub = restricted_system(sys, iso);
  ComplexMatrix active = iso;

  const auto [p_d, p_r] = split_decaying_asymptotic(sub);
  const Index r = std::lround(p_r.trace().real());
  if (r < sub.dim) {
    acc.add_chunk(iso * support_isometry(p_d, 0.5), BlockRole::kDecaying, -1);
    active = iso * support_isometry(p_r, 0.5);
  }
  if (r == 0) return;

  const QuantumSystem asym = restricted_system(sys, active);
  const SubspaceDecomposition dec =
      simultaneous_block_diagonalize(closed_family(asym), epsilon, seed);
  if (dec.blocks.size() == 1 && dec.family_ids[0] < 0 &&
      static_cast<Index>(r) == sub.dim) {
    // Minimal and fully asymptotic: extract the unique stationary state.
    const DensityMatrix small = stationary_on_minimal(asym);
    DensityMatrix embedded;
    embedded.dim = sys.dim;
    embedded.matrix = active * small.matrix * active.adjoint();
    acc.states.push_back(std::move(embedded));
    acc.supports.push_back(active * active.adjoint());
    acc.add_chunk(active, BlockRole::kMinimalAsymptotic, -1);
    return;
  }
  std::vector<int> family_map;  // local family id -> global id
  for (std::size_t b = 0; b < dec.blocks.size(); ++b) {
    const ComplexMatrix cols =
        active * dec.transform.middleCols(dec.blocks[b].start, dec.blocks[b].size);
    if (dec.family_ids[b] >= 0) {
      while (static_cast<int>(family_map.size()) <= dec.family_ids[b]) {
        family_map.push_back(acc.next_family++);
      }
      acc.add_chunk(cols, BlockRole::kUnresolved, family_map[dec.family_ids[b]]);
      continue;
    }
    if (dec.blocks.size() == 1) {
      // Single non-family block after a decay strip was removed: minimal.
      const QuantumSystem block_sys = restricted_system(sys, cols);
      const DensityMatrix small = stationary_on_minimal(block_sys);
      DensityMatrix embedded;
      embedded.dim = sys.dim;
      embedded.matrix = cols * small.matrix * cols.adjoint();
      acc.states.push_back(std::move(embedded));
      acc.supports.push_back(cols * cols.adjoint());
      acc.add_chunk(cols, BlockRole::kMinimalAsymptotic, -1);
      continue;
    }
    resolve_invariant_subspace(sys, cols, epsilon, seed + 1 + b, acc, depth + 1);
  }
}

Eigen::MatrixXd overlap_matrix(const std::vector<DensityMatrix>& states) {
  const int n = static_cast<int>(states.size());
  Eigen::MatrixXd overlaps(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      overlaps(i, j) = (states[i].matrix * states[j].matrix).trace().real();
    }
  }
  return overlaps;
}

}  // namespace

SubspaceDecomposition simultaneous_block_diagonalize(
    const std::vector<ComplexMatrix>& ops, double epsilon, std::uint64_t seed) {
  if (ops.empty()) throw ValidationError("simultaneous_block_diagonalize: no operators");
  if (epsilon <= 0.0) {
    throw ValidationError("simultaneous_block_diagonalize: epsilon must be positive");
  }
  const Index d = ops.front().rows();
  for (const ComplexMatrix& a : ops) {
    if (a.rows() != d || a.cols() != d) {
      throw DimensionMismatch("simultaneous_block_diagonalize: operator size mismatch");
    }
  }

  ComplexMatrix m = ComplexMatrix::Zero(d * d, d * d);
  for (const ComplexMatrix& a : ops) accumulate_commutant_penalty(m, a);

  RealVector lambda;
  hermitian_eig_adaptive(m, lambda);
  const double lam_max = std::max(lambda.maxCoeff(), 0.0);
  const double floor = std::max(epsilon * epsilon, 1e-11 * std::max(lam_max, 1.0));
  std::vector<ComplexMatrix> kernel;
  for (Index i = 0; i < d * d && lambda(i) < floor; ++i) {
    kernel.push_back(unvectorize(m.col(i), d));
  }
  m.resize(0, 0);
  if (kernel.empty()) {
    throw ConvergenceFailure(
        "simultaneous_block_diagonalize: empty commutant kernel (identity missing)");
  }

  SubspaceDecomposition dec;
  dec.epsilon = epsilon;
  dec.seed = seed;

  // Two independent random commutant elements must agree on the block-size
  // multiset. A draw can smear two blocks together when their eigenvalues
  // collide within the clustering cut, so disagreeing pairs are re-drawn a few
  // times before giving up.
  bool agreed = false;
  for (int attempt = 0; attempt < 4 && !agreed; ++attempt) {
    const std::uint64_t draw_seed =
        seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(attempt);
    const ComplexMatrix x = random_hermitian_combination(kernel, draw_seed);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(x);
    const Clustering primary = cluster_ascending(es.eigenvalues());

    const ComplexMatrix x2 =
        random_hermitian_combination(kernel, draw_seed ^ 0xABCDEF1234567890ULL);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es2(x2);
    const Clustering secondary = cluster_ascending(es2.eigenvalues());

    std::vector<Index> sizes1 = primary.sizes;
    std::vector<Index> sizes2 = secondary.sizes;
    std::sort(sizes1.begin(), sizes1.end());
    std::sort(sizes2.begin(), sizes2.end());
    if (sizes1 != sizes2) continue;

    agreed = true;
    dec.transform = es.eigenvectors();
    Index start = 0;
    for (Index size : primary.sizes) {
      dec.blocks.push_back({start, size});
      dec.roles.push_back(BlockRole::kUnresolved);
      dec.family_ids.push_back(-1);
      start += size;
    }
  }
  if (!agreed) {
    throw ConvergenceFailure(
        "simultaneous_block_diagonalize: independent random draws disagree on block "
        "sizes");
  }

  // A commutant larger than the block count signals degenerate families;
  // locate them through the off-block mass of the kernel elements.
  if (kernel.size() > dec.blocks.size()) {
    const int n_blocks = static_cast<int>(dec.blocks.size());
    UnionFind uf(n_blocks);
    for (const ComplexMatrix& z : kernel) {
      const ComplexMatrix w = dec.transform.adjoint() * z * dec.transform;
      const double scale = std::max(w.norm(), 1e-300);
      for (int a = 0; a < n_blocks; ++a) {
        for (int b = a + 1; b < n_blocks; ++b) {
          const double mass = w.block(dec.blocks[a].start, dec.blocks[b].start,
                                      dec.blocks[a].size, dec.blocks[b].size)
                                  .norm();
          if (mass > 1e-6 * scale) uf.join(a, b);
        }
      }
    }
    std::map<int, int> root_to_family;
    for (int b = 0; b < n_blocks; ++b) {
      const int root = uf.find(b);
      int mates = 0;
      for (int o = 0; o < n_blocks; ++o) {
        if (uf.find(o) == root) ++mates;
      }
      if (mates > 1) {
        auto [it, inserted] =
            root_to_family.try_emplace(root, static_cast<int>(root_to_family.size()));
        dec.family_ids[b] = it->second;
      }
    }
  }
  return dec;
}

ComplexMatrix block_projector(const SubspaceDecomposition& dec, std::size_t index) {
  if (index >= dec.blocks.size()) {
    throw DimensionMismatch("block_projector: block index out of range");
  }
  const auto& blk = dec.blocks[index];
  const ComplexMatrix cols = dec.transform.middleCols(blk.start, blk.size);
  return cols * cols.adjoint();
}

double max_off_block_mass(const SubspaceDecomposition& dec,
                          const std::vector<ComplexMatrix>& ops) {
  double worst = 0.0;
  for (const ComplexMatrix& a : ops) {
    const ComplexMatrix w = dec.transform.adjoint() * a * dec.transform;
    double diag_sq = 0.0;
    for (const Block& blk : dec.blocks) {
      diag_sq += w.block(blk.start, blk.start, blk.size, blk.size).squaredNorm();
    }
    const double off = std::sqrt(std::max(0.0, w.squaredNorm() - diag_sq));
    worst = std::max(worst, off / std::max(a.norm(), 1e-300));
  }
  return worst;
}

std::pair<ComplexMatrix, ComplexMatrix> split_decaying_asymptotic(
    const QuantumSystem& sys) {
  const Index d = sys.dim;
  const ComplexMatrix identity = ComplexMatrix::Identity(d, d);
  DensityMatrix uniform;
  uniform.dim = d;
  uniform.matrix = identity / static_cast<double>(d);

  if (d > 32) {
    // Unital shortcut: the identity is stationary, so nothing decays.
    const double drift = apply_generator(sys, uniform.matrix).norm();
    if (drift <= 1e-12 * std::max(1.0, max_rate(sys))) {
      return {ComplexMatrix::Zero(d, d), identity};
    }
  }
  const DensityMatrix settled = time_averaged_asymptotic_state(sys, uniform);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(settled.matrix);
  ComplexMatrix p_r = ComplexMatrix::Zero(d, d);
  Index rank = 0;
  for (Index i = 0; i < d; ++i) {
    if (es.eigenvalues()(i) > kSupportEigThreshold) {
      p_r.noalias() += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
      ++rank;
    }
  }
  if (rank == d) return {ComplexMatrix::Zero(d, d), identity};
  const ComplexMatrix p_d = identity - p_r;

  // Confirm the complement really drains: three seeded random states.
  const double horizon = convergence_horizon(sys);
  for (int trial = 0; trial < 3; ++trial) {
    std::mt19937_64 eng(9001ULL + static_cast<std::uint64_t>(trial));
    ComplexVector psi(d);
    for (Index i = 0; i < d; ++i) psi(i) = Complex(normal_draw(eng), normal_draw(eng));
    psi /= psi.norm();
    const ComplexMatrix evolved =
        propagate_matrix(sys, (psi * psi.adjoint()).eval(), horizon);
    const double leak = (p_d * evolved).trace().real();
    if (std::abs(leak) > 1e-6) {
      throw ConvergenceFailure("split_decaying_asymptotic: decaying subspace retains " +
                               std::to_string(leak));
    }
  }
  return {p_d, p_r};
}

std::pair<SubspaceDecomposition, StationarySet> find_all_stationary_states(
    const QuantumSystem& sys, double epsilon) {
  ResolutionAccumulator acc(sys.dim);
  resolve_invariant_subspace(sys, ComplexMatrix::Identity(sys.dim, sys.dim), epsilon,
                             20260815ULL, acc, 0);

  SubspaceDecomposition dec;
  dec.transform = acc.columns;
  dec.blocks = acc.blocks;
  dec.roles = acc.roles;
  dec.family_ids = acc.family_ids;
  dec.epsilon = epsilon;
  dec.seed = 20260815ULL;

  StationarySet set;
  set.states = acc.states;
  set.supports = acc.supports;
  set.pairwise_overlaps = overlap_matrix(set.states);
  return {dec, set};
}

StationarySet trajectory_steady_state_finder(const QuantumSystem& sys, Scheme scheme,
                                             const FinderBudget& budget) {
  const Index d = sys.dim;
  const int max_traj = budget.max_trajectories > 0 ? budget.max_trajectories
                                                   : 4 * static_cast<int>(d);
  const double dt = budget.dt > 0.0 ? budget.dt : default_dt(sys);
  const long n_steps = std::lround(std::ceil(budget.t_final / dt));
  TrajectoryOptions traj_options;
  traj_options.store_states = true;
  traj_options.sample_stride = std::max<long>(budget.sample_stride, n_steps / 512);

  std::vector<ComplexVector> queue;
  for (Index i = 0; i < d; ++i) {
    queue.push_back(ComplexVector::Unit(d, i));
  }
  std::vector<DensityMatrix> candidates;
  ComplexMatrix support_sum = ComplexMatrix::Zero(d, d);
  // Seed directions already launched count as covered even when their
  // trajectories decay away (their averages leave no support behind);
  // otherwise a decaying subspace would be re-queued until the budget trips.
  ComplexMatrix explored_sum = ComplexMatrix::Zero(d, d);
  int used = 0;

  const auto remaining_projector = [&]() {
    if (candidates.empty() && used == 0) {
      return ComplexMatrix::Identity(d, d).eval();
    }
    const ComplexMatrix iso = support_isometry(support_sum + explored_sum, 1e-3);
    return (ComplexMatrix::Identity(d, d) - iso * iso.adjoint()).eval();
  };

  for (int pass = 0; pass < 8; ++pass) {
    bool progressed = false;
    for (ComplexVector& v : queue) {
      const ComplexMatrix p_perp = remaining_projector();
      ComplexVector w = p_perp * v;
      if (w.norm() < 1e-3) continue;
      w /= w.norm();
      if (used >= max_traj) {
        throw BudgetExceeded("trajectory_steady_state_finder: budget of " +
                             std::to_string(max_traj) + " trajectories exhausted");
      }
      ++used;
      const TrajectoryRecord record = run_trajectory(
          sys, to_density(make_pure(w)), scheme, budget.t_final, dt,
          derive_seed(budget.base_seed, static_cast<std::uint64_t>(used)), {},
          traj_options);
      DensityMatrix avg =
          time_average(record, budget.burn_fraction * budget.t_final);
      support_sum += avg.matrix;
      explored_sum += w * w.adjoint();
      candidates.push_back(std::move(avg));
      progressed = true;
    }
    const ComplexMatrix p_perp = remaining_projector();
    if (p_perp.trace().real() < 0.5) break;
    if (!progressed) break;
    queue.clear();
    const ComplexMatrix iso = support_isometry(p_perp, 0.5);
    for (Index c = 0; c < iso.cols(); ++c) queue.push_back(iso.col(c));
  }
  if (candidates.empty()) {
    throw ConvergenceFailure("trajectory_steady_state_finder: no candidates gathered");
  }

  // Merge near-duplicates, then group partially overlapping averages.
  const auto normalized_overlap = [](const ComplexMatrix& a, const ComplexMatrix& b) {
    const double num = (a * b).trace().real();
    const double den =
        std::sqrt((a * a).trace().real() * (b * b).trace().real());
    return den > 0.0 ? num / den : 0.0;
  };
  std::vector<DensityMatrix> unique_candidates;
  for (DensityMatrix& cand : candidates) {
    bool duplicate = false;
    for (const DensityMatrix& kept : unique_candidates) {
      if (normalized_overlap(cand.matrix, kept.matrix) > 1.0 - 1e-4) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) unique_candidates.push_back(std::move(cand));
  }

  const int n_cand = static_cast<int>(unique_candidates.size());
  UnionFind uf(n_cand);
  for (int i = 0; i < n_cand; ++i) {
    for (int j = i + 1; j < n_cand; ++j) {
      if (normalized_overlap(unique_candidates[i].matrix,
                             unique_candidates[j].matrix) > 1e-4) {
        uf.join(i, j);
      }
    }
  }
  std::map<int, std::vector<int>> components;
  for (int i = 0; i < n_cand; ++i) components[uf.find(i)].push_back(i);

  // Resolve each component on the invariant closure of its joint support, so
  // the reconstructed states are exact stationary states of the block
  // structure the trajectories discovered.
  StationarySet set;
  for (const auto& [root, members] : components) {
    ComplexMatrix sum = ComplexMatrix::Zero(d, d);
    for (int idx : members) sum += unique_candidates[idx].matrix;
    const ComplexMatrix seed_cols = support_isometry(sum, 1e-3);
    const ComplexMatrix closure = invariant_closure(sys, seed_cols);
    ResolutionAccumulator acc(d);
    resolve_invariant_subspace(sys, closure, 1e-9, 20260815ULL, acc, 1);
    for (std::size_t s = 0; s < acc.states.size(); ++s) {
      bool duplicate = false;
      for (const DensityMatrix& kept : set.states) {
        if (normalized_overlap(acc.states[s].matrix, kept.matrix) > 1.0 - 1e-4) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) {
        set.states.push_back(acc.states[s]);
        set.supports.push_back(acc.supports[s]);
      }
    }
  }
  set.pairwise_overlaps = overlap_matrix(set.states);
  for (Index i = 0; i < set.pairwise_overlaps.rows(); ++i) {
    for (Index j = 0; j < set.pairwise_overlaps.cols(); ++j) {
      if (i != j && set.pairwise_overlaps(i, j) > 1e-7) {
        throw ConvergenceFailure(
            "trajectory_steady_state_finder: states are not orthogonal after "
            "reduction");
      }
    }
  }
  return set;
}

DensityMatrix extremal_state_on_block(const QuantumSystem& sys,
                                      const SubspaceDecomposition& dec,
                                      std::size_t index) {
  if (index >= dec.blocks.size()) {
    throw DimensionMismatch("extremal_state_on_block: block index out of range");
  }
  if (dec.roles[index] != BlockRole::kMinimalAsymptotic) {
    throw ValidationError("extremal_state_on_block: block is not minimal-asymptotic");
  }
  const ComplexMatrix cols =
      dec.transform.middleCols(dec.blocks[index].start, dec.blocks[index].size);
  const DensityMatrix small = stationary_on_minimal(restricted_system(sys, cols));
  DensityMatrix out;
  out.dim = sys.dim;
  out.matrix = cols * small.matrix * cols.adjoint();
  return out;
}

DfsReport detect_dfs(const QuantumSystem& sys) {
  const auto [p_d, p_r] = split_decaying_asymptotic(sys);
  const ComplexMatrix iso = support_isometry(p_r, 0.5);
  if (iso.cols() == 0) return {};
  const QuantumSystem restricted = restricted_system(sys, iso);
  const SubspaceDecomposition dec =
      simultaneous_block_diagonalize(closed_family(restricted), 1e-9, 20260815ULL);

  DfsReport report;
  for (std::size_t b = 0; b < dec.blocks.size(); ++b) {
    if (dec.blocks[b].size != 1) continue;
    ComplexVector q = iso * dec.transform.col(dec.blocks[b].start);
    q /= q.norm();
    const Complex omega = q.dot(sys.hamiltonian * q);
    if (std::abs(omega.imag()) > 1e-8) continue;
    if ((sys.hamiltonian * q - omega * q).norm() > 1e-8) continue;
    std::vector<Complex> c(sys.jumps.size());
    bool simultaneous = true;
    for (std::size_t k = 0; k < sys.jumps.size(); ++k) {
      c[k] = q.dot(sys.jumps[k] * q);
      if ((sys.jumps[k] * q - c[k] * q).norm() > 1e-8) {
        simultaneous = false;
        break;
      }
    }
    if (!simultaneous) continue;
    report.dfs_states.push_back(make_pure(q));
    report.hamiltonian_eigenvalues.push_back(omega.real());
    report.jump_eigenvalues.push_back(std::move(c));
  }

  std::vector<bool> grouped(report.dfs_states.size(), false);
  for (std::size_t i = 0; i < report.dfs_states.size(); ++i) {
    if (grouped[i]) continue;
    std::vector<int> group{static_cast<int>(i)};
    grouped[i] = true;
    for (std::size_t j = i + 1; j < report.dfs_states.size(); ++j) {
      if (grouped[j]) continue;
      bool same = true;
      for (std::size_t k = 0; k < sys.jumps.size(); ++k) {
        if (std::abs(report.jump_eigenvalues[i][k] - report.jump_eigenvalues[j][k]) >
            1e-6) {
          same = false;
          break;
        }
      }
      if (same) {
        group.push_back(static_cast<int>(j));
        grouped[j] = true;
      }
    }
    report.grouping.push_back(std::move(group));
  }
  return report;
}

ComplexMatrix infinite_time_projector(const QuantumSystem& sys,
                                      const ComplexMatrix& p_q) {
  if (p_q.rows() != sys.dim || p_q.cols() != sys.dim) {
    throw DimensionMismatch("infinite_time_projector: projector size mismatch");
  }
  if ((p_q - p_q.adjoint()).norm() > 1e-8 || (p_q * p_q - p_q).norm() > 1e-8) {
    throw NotAProjector("infinite_time_projector: input is not a projector");
  }
  const double scale = std::max(1.0, max_rate(sys));
  if (apply_adjoint_generator(sys, p_q).norm() <= 1e-9 * scale) {
    return p_q;  // already conserved (empty decaying subspace case)
  }
  const ComplexMatrix limit = asymptotic_adjoint(sys, p_q);
  const double residual = apply_adjoint_generator(sys, limit).norm();
  if (residual > kStationaryResidual) {
    throw ConvergenceFailure("infinite_time_projector: residual " +
                             std::to_string(residual));
  }
  return 0.5 * (limit + limit.adjoint());
}

}  // namespace unravel
