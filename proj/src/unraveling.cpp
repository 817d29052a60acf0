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

#include "unravel/unraveling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <random>
#include <thread>
#include <utility>

#include "unravel/errors.hpp"
#include "unravel/lindblad.hpp"

namespace unravel {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kMaxClickProbability = 0.05;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic, platform-independent draws built from raw mt19937_64 words.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; always consumes exactly two words.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 eng_;
};

void check_projector_family(const std::vector<ComplexMatrix>& projectors, Index dim) {
  for (std::size_t i = 0; i < projectors.size(); ++i) {
    const ComplexMatrix& p = projectors[i];
    if (p.rows() != dim || p.cols() != dim) {
      throw DimensionMismatch("projector dimension mismatch");
    }
    if ((p - p.adjoint()).norm() > 1e-8 || (p * p - p).norm() > 1e-8) {
      throw NotAProjector("projector " + std::to_string(i) +
                          " is not a Hermitian idempotent");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if ((projectors[i] * projectors[j]).norm() > 1e-8) {
        throw NotAProjector("projectors " + std::to_string(j) + " and " +
                            std::to_string(i) + " are not orthogonal");
      }
    }
  }
}

double real_trace(const ComplexMatrix& m) { return m.trace().real(); }

// Shared precomputation for the rank-1 (pure-state) fast path. Diagonal jump
// operators are applied elementwise, which matters for dephasing channels.
struct PureStepper {
  const QuantumSystem* sys;
  ComplexMatrix drift;  // -iH - (1/2) sum L^dag L
  std::vector<ComplexVector> diagonal_jumps;  // empty vector: not diagonal

  explicit PureStepper(const QuantumSystem& s) : sys(&s) {
    drift = -kI * s.hamiltonian;
    for (const ComplexMatrix& l : s.jumps) {
      drift.noalias() -= 0.5 * (l.adjoint() * l);
      ComplexVector d = l.diagonal();
      const bool diag = (l - ComplexMatrix(d.asDiagonal())).norm() == 0.0;
      diagonal_jumps.push_back(diag ? d : ComplexVector());
    }
  }

  ComplexVector apply_jump_op(std::size_t k, const ComplexVector& psi) const {
    if (diagonal_jumps[k].size() > 0) {
      return diagonal_jumps[k].cwiseProduct(psi);
    }
    return sys->jumps[k] * psi;
  }
};

// Euler-Maruyama step of the normalized rank-1 homodyne equation.
void pure_step_diffusive(const PureStepper& stepper, ComplexVector& psi, double dt,
                         const std::vector<double>& dw) {
  const std::size_t n_ch = stepper.sys->jumps.size();
  ComplexVector next = psi + dt * (stepper.drift * psi);
  double scalar = 0.0;
  for (std::size_t k = 0; k < n_ch; ++k) {
    const ComplexVector lpsi = stepper.apply_jump_op(k, psi);
    const double q = 2.0 * (psi.dot(lpsi)).real();  // <L_k + L_k^dag>
    next.noalias() += (dw[k] + 0.5 * q * dt) * lpsi;
    scalar += 0.5 * q * dw[k] + 0.125 * q * q * dt;
  }
  next.noalias() -= scalar * psi;
  psi = next / next.norm();
}

// One photodetection step on a pure state; returns clicked channels.
std::vector<int> pure_step_jump(const PureStepper& stepper, ComplexVector& psi,
                                double dt, const std::vector<double>& draws) {
  const std::size_t n_ch = stepper.sys->jumps.size();
  std::vector<ComplexVector> lpsi(n_ch);
  std::vector<int> clicks;
  for (std::size_t k = 0; k < n_ch; ++k) {
    lpsi[k] = stepper.apply_jump_op(k, psi);
    const double p = lpsi[k].squaredNorm() * dt;
    if (p >= kMaxClickProbability) {
      throw DtTooLarge("jump probability " + std::to_string(p) +
                       " reached the 0.05 cap; reduce dt");
    }
    if (draws[k] < p) clicks.push_back(static_cast<int>(k));
  }
  if (clicks.empty()) {
    psi += dt * (stepper.drift * psi);
  } else {
    for (int k : clicks) psi = stepper.apply_jump_op(static_cast<std::size_t>(k), psi);
  }
  psi /= psi.norm();
  return clicks;
}

// Clip negative eigenvalues and rescale to unit trace. Leaves the matrix
// untouched when it is already positive to tolerance, preserving exactness
// of the plain Euler-Maruyama update.
ComplexMatrix clip_positive(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
  if (es.eigenvalues().minCoeff() >= -1e-12) return m;
  RealVector clipped = es.eigenvalues().cwiseMax(0.0);
  const double total = clipped.sum();
  if (total <= 0.0) throw NotPositive("state vanished under positivity clip");
  clipped /= total;
  return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
}

DensityMatrix outer(const ComplexVector& psi) {
  DensityMatrix rho;
  rho.dim = psi.size();
  rho.matrix = psi * psi.adjoint();
  return rho;
}

std::vector<double> overlaps_of(const std::vector<ComplexMatrix>& projectors,
                                const ComplexMatrix& rho) {
  std::vector<double> out(projectors.size());
  for (std::size_t j = 0; j < projectors.size(); ++j) {
    out[j] = real_trace(projectors[j] * rho);
  }
  return out;
}

std::vector<double> overlaps_of_pure(const std::vector<ComplexMatrix>& projectors,
                                     const ComplexVector& psi) {
  std::vector<double> out(projectors.size());
  for (std::size_t j = 0; j < projectors.size(); ++j) {
    out[j] = (psi.dot(projectors[j] * psi)).real();
  }
  return out;
}

int env_threads() {
  const char* raw = std::getenv("TRAJ_THREADS");
  if (raw == nullptr) return 1;
  const int parsed = std::atoi(raw);
  return parsed > 0 ? parsed : 1;
}

}  // namespace

std::string scheme_name(Scheme scheme) {
  return scheme == Scheme::kJump ? "jump" : "diffusive";
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "jump") return Scheme::kJump;
  if (name == "diffusive" || name == "homodyne") return Scheme::kDiffusive;
  throw ValidationError("unknown scheme '" + name + "'");
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  return splitmix64(base_seed ^ splitmix64(index));
}

double default_dt(const QuantumSystem& sys) {
  double scale = operator_norm(sys.hamiltonian);
  double rates = 0.0;
  for (const ComplexMatrix& l : sys.jumps) {
    rates += operator_norm(l.adjoint() * l);
  }
  return 1e-3 / std::max({scale, rates, 1e-12});
}

DensityMatrix step_diffusive(const QuantumSystem& sys, const DensityMatrix& rho,
                             double dt, const std::vector<double>& noise) {
  if (dt <= 0.0) throw ValidationError("step_diffusive: dt must be positive");
  if (noise.size() != sys.jumps.size()) {
    throw DimensionMismatch("step_diffusive: one noise increment per channel required");
  }
  ComplexMatrix next = rho.matrix + dt * apply_generator(sys, rho.matrix);
  for (std::size_t k = 0; k < sys.jumps.size(); ++k) {
    const ComplexMatrix& l = sys.jumps[k];
    ComplexMatrix meas = l * rho.matrix;
    meas += rho.matrix * l.adjoint();
    meas -= real_trace(meas) * rho.matrix;
    next.noalias() += noise[k] * meas;
  }
  const double trace = real_trace(next);
  if (std::abs(trace - 1.0) > 0.1) {
    throw StepRejected("step_diffusive: trace drifted to " + std::to_string(trace) +
                       "; reduce dt");
  }
  next = (0.5 / trace) * (next + next.adjoint()).eval();
  DensityMatrix out;
  out.dim = rho.dim;
  out.matrix = clip_positive(next);
  return out;
}

JumpStepResult step_jump(const QuantumSystem& sys, const DensityMatrix& rho,
                         double dt, const std::vector<double>& uniform_draws) {
  if (dt <= 0.0) throw ValidationError("step_jump: dt must be positive");
  if (uniform_draws.size() != sys.jumps.size()) {
    throw DimensionMismatch("step_jump: one uniform draw per channel required");
  }
  std::vector<int> clicks;
  std::vector<double> rates(sys.jumps.size());
  for (std::size_t k = 0; k < sys.jumps.size(); ++k) {
    const ComplexMatrix& l = sys.jumps[k];
    rates[k] = real_trace(l.adjoint() * l * rho.matrix);
    const double p = rates[k] * dt;
    if (p >= kMaxClickProbability) {
      throw DtTooLarge("jump probability " + std::to_string(p) +
                       " reached the 0.05 cap; reduce dt");
    }
    if (uniform_draws[k] < p) clicks.push_back(static_cast<int>(k));
  }
  ComplexMatrix next;
  if (clicks.empty()) {
    next = rho.matrix - dt * kI * (sys.hamiltonian * rho.matrix -
                                   rho.matrix * sys.hamiltonian);
    for (std::size_t k = 0; k < sys.jumps.size(); ++k) {
      const ComplexMatrix ldl = sys.jumps[k].adjoint() * sys.jumps[k];
      next.noalias() -= 0.5 * dt * (ldl * rho.matrix + rho.matrix * ldl);
      next.noalias() += dt * rates[k] * rho.matrix;
    }
  } else {
    next = rho.matrix;
    for (int k : clicks) {
      next = sys.jumps[k] * next * sys.jumps[k].adjoint();
      const double trace = real_trace(next);
      if (trace <= 0.0) throw NotPositive("step_jump: click annihilated the state");
      next /= trace;
    }
  }
  const double trace = real_trace(next);
  next = (0.5 / trace) * (next + next.adjoint()).eval();
  JumpStepResult result;
  result.state.dim = rho.dim;
  result.state.matrix = std::move(next);
  result.clicks = std::move(clicks);
  return result;
}

TrajectoryRecord run_trajectory(const QuantumSystem& sys, const DensityMatrix& rho0,
                                Scheme scheme, double t_final, double dt,
                                std::uint64_t seed,
                                const std::vector<ComplexMatrix>& projectors,
                                const TrajectoryOptions& options) {
  if (t_final <= 0.0) throw ValidationError("run_trajectory: t_final must be positive");
  if (dt <= 0.0) throw ValidationError("run_trajectory: dt must be positive");
  if (options.sample_stride < 1) {
    throw ValidationError("run_trajectory: sample_stride must be >= 1");
  }
  if (rho0.dim != sys.dim) {
    throw DimensionMismatch("run_trajectory: initial state dimension mismatch");
  }
  check_projector_family(projectors, sys.dim);

  const long n_steps = std::max<long>(1, std::lround(std::ceil(t_final / dt - 1e-9)));
  const std::size_t n_ch = sys.jumps.size();
  Rng rng(seed);

  TrajectoryRecord record;
  record.scheme = scheme;
  record.seed = seed;
  record.dt = dt;
  record.overlaps.resize(projectors.size());

  const bool pure_path = purity(rho0) >= 1.0 - 1e-10;
  ComplexVector psi;
  DensityMatrix rho = rho0;
  PureStepper stepper(sys);
  if (pure_path) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho0.matrix);
    Index top;
    es.eigenvalues().maxCoeff(&top);
    psi = es.eigenvectors().col(top);
    psi /= psi.norm();
  }

  ComplexMatrix average_acc = ComplexMatrix::Zero(sys.dim, sys.dim);
  double average_span = 0.0;
  ComplexMatrix prev_sample;
  double prev_time = 0.0;
  bool have_prev = false;

  const auto emit_sample = [&](double t) {
    ComplexMatrix current = pure_path ? (psi * psi.adjoint()).eval() : rho.matrix;
    record.times.push_back(t);
    if (options.store_states) {
      DensityMatrix snapshot;
      snapshot.dim = sys.dim;
      snapshot.matrix = current;
      record.states.push_back(std::move(snapshot));
    }
    const std::vector<double> ov =
        pure_path ? overlaps_of_pure(projectors, psi) : overlaps_of(projectors, rho.matrix);
    for (std::size_t j = 0; j < projectors.size(); ++j) {
      record.overlaps[j].push_back(ov[j]);
    }
    if (have_prev) {
      const double h = t - prev_time;
      average_acc += (h / 2.0) * (prev_sample + current);
      average_span += h;
    }
    prev_sample = std::move(current);
    prev_time = t;
    have_prev = true;
  };

  emit_sample(0.0);
  std::vector<double> draws(n_ch);
  for (long step = 1; step <= n_steps; ++step) {
    if (scheme == Scheme::kDiffusive) {
      const double root_dt = std::sqrt(dt);
      for (std::size_t k = 0; k < n_ch; ++k) draws[k] = root_dt * rng.normal();
      if (pure_path) {
        pure_step_diffusive(stepper, psi, dt, draws);
      } else {
        rho = step_diffusive(sys, rho, dt, draws);
      }
    } else {
      for (std::size_t k = 0; k < n_ch; ++k) draws[k] = rng.uniform();
      std::vector<int> clicks;
      if (pure_path) {
        clicks = pure_step_jump(stepper, psi, dt, draws);
      } else {
        JumpStepResult res = step_jump(sys, rho, dt, draws);
        rho = std::move(res.state);
        clicks = std::move(res.clicks);
      }
      for (int channel : clicks) {
        record.jump_events.push_back({static_cast<double>(step) * dt, channel});
      }
    }
    if (step % options.sample_stride == 0 || step == n_steps) {
      emit_sample(static_cast<double>(step) * dt);
    }
  }

  record.final_state.dim = sys.dim;
  record.final_state.matrix = pure_path ? (psi * psi.adjoint()).eval() : rho.matrix;
  record.running_average.dim = sys.dim;
  if (average_span > 0.0) {
    ComplexMatrix avg = average_acc / average_span;
    record.running_average.matrix = 0.5 * (avg + avg.adjoint());
  } else {
    record.running_average.matrix = record.final_state.matrix;
  }
  return record;
}

EnsembleStats run_ensemble(const QuantumSystem& sys, const DensityMatrix& rho0,
                           Scheme scheme, int n_traj, double t_final, double dt,
                           std::uint64_t base_seed,
                           const std::vector<ComplexMatrix>& projectors,
                           const EnsembleOptions& options) {
  if (n_traj < 1) throw ValidationError("run_ensemble: n_traj must be >= 1");
  if (options.burn_fraction < 0.0 || options.burn_fraction >= 1.0) {
    throw ValidationError("run_ensemble: burn_fraction must be in [0, 1)");
  }
  const int threads =
      std::max(1, options.threads > 0 ? options.threads : env_threads());

  EnsembleStats stats;
  stats.n_traj = n_traj;
  stats.scheme = scheme;
  stats.dt = dt;
  stats.terminal_overlap_samples.resize(projectors.size());

  TrajectoryOptions traj_options;
  traj_options.sample_stride = options.sample_stride;
  traj_options.store_states = true;  // needed for mean series and averages

  std::vector<ComplexMatrix> mean_acc;
  const double t_burn = options.burn_fraction * t_final;

  const auto absorb = [&](TrajectoryRecord& record) {
    if (stats.times.empty()) stats.times = record.times;
    if (options.store_mean_series) {
      if (mean_acc.empty()) {
        mean_acc.assign(record.states.size(),
                        ComplexMatrix::Zero(sys.dim, sys.dim));
      }
      for (std::size_t s = 0; s < record.states.size(); ++s) {
        mean_acc[s] += record.states[s].matrix;
      }
    }
    stats.mean_fidelity_inputs.push_back(time_average(record, t_burn));
    for (std::size_t j = 0; j < projectors.size(); ++j) {
      stats.terminal_overlap_samples[j].push_back(record.overlaps[j].back());
    }
    if (options.store_overlap_series) {
      stats.overlap_series.push_back(record.overlaps);
    }
    stats.click_counts.push_back(static_cast<int>(record.jump_events.size()));
    if (options.keep_records) {
      if (!options.store_states) {
        record.states.clear();
        record.states.shrink_to_fit();
      }
      stats.records.push_back(std::move(record));
    }
  };

  for (int start = 0; start < n_traj; start += threads) {
    const int batch = std::min(threads, n_traj - start);
    std::vector<TrajectoryRecord> results(batch);
    std::vector<std::exception_ptr> failures(batch);
    if (batch == 1) {
      results[0] = run_trajectory(sys, rho0, scheme, t_final, dt,
                                  derive_seed(base_seed, start), projectors,
                                  traj_options);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(batch);
      for (int j = 0; j < batch; ++j) {
        pool.emplace_back([&, j]() {
          try {
            results[j] = run_trajectory(sys, rho0, scheme, t_final, dt,
                                        derive_seed(base_seed, start + j),
                                        projectors, traj_options);
          } catch (...) {
            failures[j] = std::current_exception();
          }
        });
      }
      for (std::thread& t : pool) t.join();
      for (int j = 0; j < batch; ++j) {
        if (failures[j]) std::rethrow_exception(failures[j]);
      }
    }
    for (int j = 0; j < batch; ++j) absorb(results[j]);
  }

  if (options.store_mean_series) {
    stats.mean_state_series.reserve(mean_acc.size());
    for (ComplexMatrix& acc : mean_acc) {
      DensityMatrix mean;
      mean.dim = sys.dim;
      acc /= static_cast<double>(n_traj);
      mean.matrix = 0.5 * (acc + acc.adjoint());
      stats.mean_state_series.push_back(std::move(mean));
    }
  }
  return stats;
}

DensityMatrix time_average(const TrajectoryRecord& record, double t_burn) {
  if (record.states.empty()) {
    throw ValidationError("time_average: record has no stored states");
  }
  if (record.times.empty() || t_burn >= record.times.back()) {
    throw ValidationError("time_average: t_burn must precede the final sample");
  }
  ComplexMatrix acc =
      ComplexMatrix::Zero(record.states.front().dim, record.states.front().dim);
  double span = 0.0;
  bool have_prev = false;
  std::size_t prev = 0;
  for (std::size_t s = 0; s < record.states.size(); ++s) {
    if (record.times[s] < t_burn - 1e-12) continue;
    if (have_prev) {
      const double h = record.times[s] - record.times[prev];
      acc += (h / 2.0) * (record.states[prev].matrix + record.states[s].matrix);
      span += h;
    }
    prev = s;
    have_prev = true;
  }
  if (span <= 0.0) return validate_density(record.states.back().matrix);
  return validate_density(acc / span);
}

}  // namespace unravel
