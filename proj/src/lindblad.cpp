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

#include "unravel/lindblad.hpp"

#include <algorithm>
#include <cmath>

namespace unravel {

namespace {

constexpr Index kDenseExpmLimit = 32;   // dim above which propagation is RK4
constexpr double kRk4LocalError = 1e-8;

// Cached pieces of the generator: L(rho) = G rho + rho G^dag + sum L rho L^dag
// with G = -iH - (1/2) sum L^dag L.
struct GeneratorCache {
  ComplexMatrix drift;  // G
  const std::vector<ComplexMatrix>* jumps;

  explicit GeneratorCache(const QuantumSystem& sys) : jumps(&sys.jumps) {
    drift = Complex(0.0, -1.0) * sys.hamiltonian;
    for (const ComplexMatrix& l : sys.jumps) {
      drift.noalias() -= 0.5 * (l.adjoint() * l);
    }
  }

  ComplexMatrix apply(const ComplexMatrix& rho) const {
    ComplexMatrix out = drift * rho;
    out.noalias() += rho * drift.adjoint();
    for (const ComplexMatrix& l : *jumps) {
      out.noalias() += l * rho * l.adjoint();
    }
    return out;
  }
};

// One classical RK4 step of m' = f(m).
template <typename F>
ComplexMatrix rk4_step(const F& f, const ComplexMatrix& m, double h) {
  ComplexMatrix k1 = f(m);
  ComplexMatrix k2 = f(m + (h / 2.0) * k1);
  ComplexMatrix k3 = f(m + (h / 2.0) * k2);
  ComplexMatrix k4 = f(m + h * k3);
  return m + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Adaptive RK4 with step-doubling error control.
template <typename F>
ComplexMatrix rk4_adaptive(const F& f, ComplexMatrix m, double t) {
  if (t <= 0.0) return m;
  double h = t / 16.0;
  double elapsed = 0.0;
  while (elapsed < t) {
    h = std::min(h, t - elapsed);
    ComplexMatrix full = rk4_step(f, m, h);
    ComplexMatrix half = rk4_step(f, rk4_step(f, m, h / 2.0), h / 2.0);
    const double scale = std::max(half.norm(), 1e-300);
    const double err = (full - half).norm() / (15.0 * scale);
    if (err <= kRk4LocalError) {
      m = std::move(half);
      elapsed += h;
      const double grow = err > 0.0 ? 0.9 * std::pow(kRk4LocalError / err, 0.2) : 2.0;
      h *= std::clamp(grow, 0.2, 2.0);
    } else {
      h *= std::max(0.9 * std::pow(kRk4LocalError / err, 0.25), 0.1);
    }
  }
  return m;
}

ComplexMatrix propagate_cached(const QuantumSystem& sys, const GeneratorCache& cache,
                               const ComplexMatrix& m0, double t) {
  if (t == 0.0) return m0;
  if (sys.dim <= kDenseExpmLimit) {
    const Liouvillian liou = build_liouvillian(sys);
    return unvectorize(expm(liou.matrix * t) * vectorize(m0), sys.dim);
  }
  return rk4_adaptive([&cache](const ComplexMatrix& m) { return cache.apply(m); }, m0, t);
}

// Step-doubling limit under a matrix evolution map: checkpoints at
// t_k = t0 * 2^k, declared converged after two consecutive relative changes
// below tol. Returns true on convergence.
template <typename Evolve>
bool doubling_limit(ComplexMatrix& state, const Evolve& evolve, double t0, double t_max,
                    double tol) {
  double span = t0;      // time to advance in the next round
  double elapsed = 0.0;
  int quiet = 0;
  for (int round = 0; round < 256 && elapsed < t_max; ++round) {
    span = std::min(span, t_max - elapsed);
    ComplexMatrix next = evolve(state, span);
    const double scale = std::max(next.norm(), 1e-300);
    const double change = (next - state).norm() / scale;
    elapsed += span;
    span *= 2.0;
    state = std::move(next);
    if (change <= tol) {
      if (++quiet >= 2) return true;
    } else {
      quiet = 0;
    }
  }
  return false;
}

}  // namespace

ComplexMatrix apply_generator(const QuantumSystem& sys, const ComplexMatrix& rho) {
  if (rho.rows() != sys.dim || rho.cols() != sys.dim) {
    throw DimensionMismatch("apply_generator: state dimension mismatch");
  }
  return GeneratorCache(sys).apply(rho);
}

ComplexMatrix apply_adjoint_generator(const QuantumSystem& sys, const ComplexMatrix& x) {
  if (x.rows() != sys.dim || x.cols() != sys.dim) {
    throw DimensionMismatch("apply_adjoint_generator: observable dimension mismatch");
  }
  ComplexMatrix out = Complex(0.0, 1.0) * (sys.hamiltonian * x - x * sys.hamiltonian);
  for (const ComplexMatrix& l : sys.jumps) {
    const ComplexMatrix ldl = l.adjoint() * l;
    out.noalias() += l.adjoint() * x * l;
    out.noalias() -= 0.5 * (ldl * x + x * ldl);
  }
  return out;
}

Liouvillian build_liouvillian(const QuantumSystem& sys) {
  const Index d = sys.dim;
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  ComplexMatrix mat = Complex(0.0, -1.0) *
                      (kron(id, sys.hamiltonian) - kron(sys.hamiltonian.transpose(), id));
  for (const ComplexMatrix& l : sys.jumps) {
    const ComplexMatrix ldl = l.adjoint() * l;
    mat.noalias() += kron(l.conjugate(), l);
    mat.noalias() -= 0.5 * (kron(id, ldl) + kron(ldl.transpose(), id));
  }
  return Liouvillian{d, std::move(mat)};
}

ComplexMatrix propagate_matrix(const QuantumSystem& sys, const ComplexMatrix& m0, double t) {
  if (m0.rows() != sys.dim || m0.cols() != sys.dim) {
    throw DimensionMismatch("propagate_matrix: state dimension mismatch");
  }
  GeneratorCache cache(sys);
  return propagate_cached(sys, cache, m0, t);
}

DensityMatrix propagate(const QuantumSystem& sys, const DensityMatrix& rho0, double t) {
  return validate_density(propagate_matrix(sys, rho0.matrix, t));
}

ComplexMatrix propagate_adjoint(const QuantumSystem& sys, const ComplexMatrix& x0, double t) {
  if (x0.rows() != sys.dim || x0.cols() != sys.dim) {
    throw DimensionMismatch("propagate_adjoint: observable dimension mismatch");
  }
  if (sys.dim <= kDenseExpmLimit) {
    const Liouvillian liou = build_liouvillian(sys);
    return unvectorize(expm(liou.matrix.adjoint() * t) * vectorize(x0), sys.dim);
  }
  return rk4_adaptive(
      [&sys](const ComplexMatrix& x) { return apply_adjoint_generator(sys, x); }, x0, t);
}

double liouvillian_gap(const QuantumSystem& sys) {
  if (sys.dim > kDenseExpmLimit) return 0.0;
  const Liouvillian liou = build_liouvillian(sys);
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(liou.matrix, false);
  double gap = 0.0;
  for (Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const double re = std::abs(solver.eigenvalues()(i).real());
    if (re > 1e-10 && (gap == 0.0 || re < gap)) gap = re;
  }
  return gap;
}

double max_rate(const QuantumSystem& sys) {
  double rate = 0.0;
  for (const ComplexMatrix& l : sys.jumps) {
    rate = std::max(rate, operator_norm(l.adjoint() * l));
  }
  if (rate == 0.0) rate = operator_norm(sys.hamiltonian);
  if (rate == 0.0) rate = 1.0;
  return rate;
}

double convergence_horizon(const QuantumSystem& sys) {
  const double gap = liouvillian_gap(sys);
  if (gap > 1e-10) return 50.0 / gap;
  return 1e4 / max_rate(sys);
}

RealVector asymptotic_weights(const QuantumSystem& sys, const DensityMatrix& rho0,
                              const std::vector<ComplexMatrix>& projectors,
                              double t_max_override) {
  for (const ComplexMatrix& p : projectors) {
    if (p.rows() != sys.dim || p.cols() != sys.dim) {
      throw DimensionMismatch("asymptotic_weights: projector dimension mismatch");
    }
  }
  const double t_max =
      t_max_override > 0.0 ? t_max_override : convergence_horizon(sys);
  GeneratorCache cache(sys);
  const auto weights_of = [&](const ComplexMatrix& m) {
    RealVector w(static_cast<Index>(projectors.size()));
    for (std::size_t j = 0; j < projectors.size(); ++j) {
      w(static_cast<Index>(j)) = (projectors[j] * m).trace().real();
    }
    return w;
  };

  ComplexMatrix state = rho0.matrix;
  RealVector w = weights_of(state);
  double span = std::min(1.0 / max_rate(sys), t_max / 1024.0);
  double elapsed = 0.0;
  int quiet = 0;
  bool converged = false;
  for (int round = 0; round < 256 && elapsed < t_max; ++round) {
    span = std::min(span, t_max - elapsed);
    state = propagate_cached(sys, cache, state, span);
    elapsed += span;
    span *= 2.0;
    RealVector w_next = weights_of(state);
    const double change = (w_next - w).cwiseAbs().maxCoeff();
    w = std::move(w_next);
    if (change <= 1e-8) {
      if (++quiet >= 2) {
        converged = true;
        break;
      }
    } else {
      quiet = 0;
    }
  }
  if (!converged) {
    throw ConvergenceFailure("asymptotic_weights: weights still changing at t = " +
                             std::to_string(t_max));
  }
  const double total = w.sum();
  if (std::abs(total - 1.0) > 1e-6) {
    throw WeightNormalization("asymptotic_weights: weights sum to " + std::to_string(total));
  }
  return w;
}

DensityMatrix asymptotic_state(const QuantumSystem& sys, const DensityMatrix& rho0) {
  const double t_max = convergence_horizon(sys);
  GeneratorCache cache(sys);
  ComplexMatrix state = rho0.matrix;
  const bool ok = doubling_limit(
      state,
      [&](const ComplexMatrix& m, double span) { return propagate_cached(sys, cache, m, span); },
      std::min(1.0 / max_rate(sys), t_max / 1024.0), t_max, 1e-9);
  if (!ok) {
    throw ConvergenceFailure("asymptotic_state: state still changing at t = " +
                             std::to_string(t_max));
  }
  return validate_density(state);
}

DensityMatrix time_averaged_asymptotic_state(const QuantumSystem& sys,
                                             const DensityMatrix& rho0) {
  const Index d = sys.dim;
  if (d <= kDenseExpmLimit) {
    // Spectral route: the long-time average keeps exactly the zero-eigenvalue
    // modes of the generator (strictly decaying and purely oscillating modes
    // both average to zero). The zero eigenvalue is always semisimple, so the
    // average is the spectral projector P0 = R (Q^H R)^{-1} Q^H applied to
    // vec(rho0), with R and Q spanning the kernels of the generator and its
    // adjoint. An eigenvector expansion would fail on defective generators.
    const ComplexMatrix liou = build_liouvillian(sys).matrix;
    Eigen::BDCSVD<ComplexMatrix> svd(liou, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVector& sv = svd.singularValues();
    const double tol = 1e-10 * std::max(1.0, sv(0));
    Index kernel = 0;
    for (Index j = sv.size(); j-- > 0 && sv(j) <= tol;) ++kernel;
    if (kernel == 0) {
      throw ConvergenceFailure("time_averaged_asymptotic_state: no stationary mode found");
    }
    const ComplexMatrix right = svd.matrixV().rightCols(kernel);
    const ComplexMatrix left = svd.matrixU().rightCols(kernel);
    Eigen::FullPivLU<ComplexMatrix> lu(left.adjoint() * right);
    if (!lu.isInvertible()) {
      throw ConvergenceFailure("time_averaged_asymptotic_state: stationary sector is degenerate");
    }
    const ComplexVector kept = right * lu.solve(left.adjoint() * vectorize(rho0.matrix));
    ComplexMatrix avg = unvectorize(kept, d);
    avg = 0.5 * (avg + avg.adjoint()).eval();
    return validate_density(avg);
  }
  // Window-averaging fallback: accumulate the running mean over doubling
  // horizons until two consecutive doublings agree. Purely oscillating modes
  // decay only like 1/T here, so stubborn cases raise ConvergenceFailure.
  GeneratorCache cache(sys);
  ComplexMatrix state = rho0.matrix;
  ComplexMatrix integral = ComplexMatrix::Zero(d, d);
  double elapsed = 0.0;
  double span = 1.0 / max_rate(sys);
  ComplexMatrix mean = state;
  int quiet = 0;
  for (int round = 0; round < 40; ++round) {
    const int n_sub = 32;
    const double h = span / n_sub;
    for (int s = 0; s < n_sub; ++s) {
      ComplexMatrix next = propagate_cached(sys, cache, state, h);
      integral += (h / 2.0) * (state + next);
      state = std::move(next);
    }
    elapsed += span;
    span *= 2.0;
    ComplexMatrix mean_next = integral / elapsed;
    const double change = (mean_next - mean).norm();
    mean = std::move(mean_next);
    if (change <= 1e-6) {
      if (++quiet >= 2) {
        mean = 0.5 * (mean + mean.adjoint()).eval();
        return validate_density(mean);
      }
    } else {
      quiet = 0;
    }
  }
  throw ConvergenceFailure(
      "time_averaged_asymptotic_state: running mean still changing");
}

ComplexMatrix asymptotic_adjoint(const QuantumSystem& sys, const ComplexMatrix& x0) {
  const double t_max = convergence_horizon(sys);
  ComplexMatrix x = x0;
  const bool ok = doubling_limit(
      x, [&](const ComplexMatrix& m, double span) { return propagate_adjoint(sys, m, span); },
      std::min(1.0 / max_rate(sys), t_max / 1024.0), t_max, 1e-9);
  if (!ok) {
    throw ConvergenceFailure("asymptotic_adjoint: observable still changing at t = " +
                             std::to_string(t_max));
  }
  return x;
}

}  // namespace unravel
