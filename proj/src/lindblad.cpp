// Copyright 2026 The catsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "catsim/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace catsim {

void EvolutionSpec::validate() const {
  const SpaceSig& sig = hamiltonian.sig;
  for (const auto& l : loss_ops)
    if (l.sig != sig) throw std::invalid_argument("EvolutionSpec: loss op sig mismatch");
  for (const auto& [name, obs] : observables)
    if (obs.sig != sig)
      throw std::invalid_argument("EvolutionSpec: observable '" + name + "' sig mismatch");
  if (t_grid.empty()) throw std::invalid_argument("EvolutionSpec: empty t_grid");
  if (t_grid.front() < 0.0) throw std::invalid_argument("EvolutionSpec: t_grid[0] < 0");
  for (size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw std::invalid_argument("EvolutionSpec: t_grid not strictly increasing");
  if (!(tol.rel_step_tol > 0.0))
    throw std::invalid_argument("EvolutionSpec: rel_step_tol must be > 0");
  if (tol.herm_resym_period < 1)
    throw std::invalid_argument("EvolutionSpec: herm_resym_period must be >= 1");
}

const std::vector<Cplx>& TimeSeries::column(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return columns[i];
  throw std::invalid_argument("TimeSeries: no column named '" + name + "'");
}

void TimeSeries::write_csv(std::ostream& os) const {
  os << "t";
  for (const auto& n : names) os << "," << n << "_re," << n << "_im";
  os << "\n";
  char buf[64];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf;
  };
  for (size_t k = 0; k < times.size(); ++k) {
    put(times[k]);
    for (size_t i = 0; i < columns.size(); ++i) {
      os << ",";
      put(columns[i][k].real());
      os << ",";
      put(columns[i][k].imag());
    }
    os << "\n";
  }
}

void TimeSeries::write_csv_file(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("TimeSeries: cannot open " + path);
  write_csv(f);
}

Mat liouvillian_apply(const Operator& hamiltonian, const std::vector<Operator>& loss_ops,
                      const DensityMatrix& rho) {
  if (rho.sig != hamiltonian.sig)
    throw std::invalid_argument("liouvillian_apply: sig mismatch");
  const Mat& h = hamiltonian.data;
  const Mat& r = rho.data;
  Mat out = Cplx(0.0, -1.0) * (h * r - r * h);
  for (const auto& l : loss_ops) {
    if (l.sig != rho.sig) throw std::invalid_argument("liouvillian_apply: loss sig mismatch");
    Mat lr = l.data * r;
    Mat ldl = l.data.adjoint() * l.data;
    out += lr * l.data.adjoint() - 0.5 * (ldl * r + r * ldl);
  }
  return out;
}

namespace {

// The integrator hot path. Model operators are overwhelmingly sparse
// (ladder structure tensored with identities) while rho is dense, so each
// operator is scanned once into triplets and applied in O(nnz * dim)
// instead of O(dim^3).
struct Triplets {
  std::vector<int> row, col;
  std::vector<Cplx> val;

  static Triplets scan(const Mat& m, double drop = 0.0) {
    Triplets t;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        if (std::abs(m(i, j)) > drop) {
          t.row.push_back(static_cast<int>(i));
          t.col.push_back(static_cast<int>(j));
          t.val.push_back(m(i, j));
        }
    return t;
  }
  size_t size() const { return val.size(); }
};

// Y += T * X, column by column (all matrices column-major).
void apply_left(const Triplets& t, const Mat& x, Mat& y) {
  const Eigen::Index dim = x.rows();
  const size_t nnz = t.size();
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Cplx* xc = x.data() + j * dim;
    Cplx* yc = y.data() + j * dim;
    for (size_t k = 0; k < nnz; ++k) yc[t.row[k]] += t.val[k] * xc[t.col[k]];
  }
}

// Y += X * R for R given in triplet form: column axpys.
void apply_right(const Triplets& r, const Mat& x, Mat& y) {
  const size_t nnz = r.size();
  for (size_t k = 0; k < nnz; ++k) y.col(r.col[k]) += r.val[k] * x.col(r.row[k]);
}

struct CompiledLindblad {
  int dim = 0;
  Triplets gen, gen_adj;                   // G = -iH - 1/2 sum L^dag L and G^dag
  std::vector<Triplets> loss, loss_adj;    // L_k and L_k^dag (as right factor)
  double max_rate = 0.0;
  mutable Mat work;                        // scratch for L rho

  CompiledLindblad(const Operator& hamiltonian, const std::vector<Operator>& loss_ops) {
    dim = hamiltonian.sig.total_dim();
    Mat g = Cplx(0.0, -1.0) * hamiltonian.data;
    for (const auto& l : loss_ops) {
      g -= 0.5 * (l.data.adjoint() * l.data);
      loss.push_back(Triplets::scan(l.data));
      loss_adj.push_back(Triplets::scan(l.data.adjoint()));
    }
    gen = Triplets::scan(g);
    gen_adj = Triplets::scan(Mat(g.adjoint()));
    max_rate = g.cwiseAbs().maxCoeff();
    work = Mat::Zero(dim, dim);
  }

  void rhs(const Mat& rho, Mat& out) const {
    out.setZero();
    apply_left(gen, rho, out);
    apply_right(gen_adj, rho, out);
    for (size_t k = 0; k < loss.size(); ++k) {
      work.setZero();
      apply_left(loss[k], rho, work);
      apply_right(loss_adj[k], work, out);
    }
  }
};

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
constexpr double kE1 = 35.0 / 384 - 5179.0 / 57600, kE3 = 500.0 / 1113 - 7571.0 / 16695,
                 kE4 = 125.0 / 192 - 393.0 / 640, kE5 = -2187.0 / 6784 + 92097.0 / 339200,
                 kE6 = 11.0 / 84 - 187.0 / 2100, kE7 = -1.0 / 40;

struct Stepper {
  const CompiledLindblad& sys;
  EvolveTolerances tol;
  Mat k1, k2, k3, k4, k5, k6, k7, stage, next;
  double h = 0.0;
  double err_prev = 1.0;
  bool have_k1 = false;
  EvolveStats stats;

  Stepper(const CompiledLindblad& s, const EvolveTolerances& t, double span)
      : sys(s), tol(t) {
    const int d = sys.dim;
    k1 = k2 = k3 = k4 = k5 = k6 = k7 = stage = next = Mat::Zero(d, d);
    h = (sys.max_rate > 0.0) ? 1e-3 / sys.max_rate : span / 100.0;
    h = std::min(h, span);
  }

  // Advances rho from t toward t_target, landing exactly on it.
  void integrate_to(Mat& rho, double& t, double t_target) {
    while (t < t_target) {
      double h_try = std::min(h, t_target - t);
      bool landed = h_try >= t_target - t - 1e-15 * std::max(1.0, std::abs(t_target));
      if (!have_k1) {
        sys.rhs(rho, k1);
        have_k1 = true;
      }
      stage = rho + h_try * (kA21 * k1);
      sys.rhs(stage, k2);
      stage = rho + h_try * (kA31 * k1 + kA32 * k2);
      sys.rhs(stage, k3);
      stage = rho + h_try * (kA41 * k1 + kA42 * k2 + kA43 * k3);
      sys.rhs(stage, k4);
      stage = rho + h_try * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4);
      sys.rhs(stage, k5);
      stage = rho + h_try * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5);
      sys.rhs(stage, k6);
      next = rho + h_try * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
      sys.rhs(next, k7);  // FSAL

      double err_abs =
          (h_try * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7))
              .cwiseAbs()
              .maxCoeff();
      double scale = tol.rel_step_tol * std::max(1.0, rho.cwiseAbs().maxCoeff());
      double err = err_abs / scale;

      if (err <= 1.0) {
        rho.swap(next);
        k1.swap(k7);  // FSAL: first stage of the next step
        t = landed ? t_target : t + h_try;
        ++stats.accepted_steps;
        double e = std::max(err, 1e-10);
        double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
        h = h_try * std::clamp(fac, 0.2, 5.0);
        err_prev = e;
        if (stats.accepted_steps % tol.herm_resym_period == 0) {
          rho = 0.5 * (rho + rho.adjoint()).eval();
          renormalize_trace(rho);
          sys.rhs(rho, k1);  // state changed; refresh FSAL stage
        }
        if (landed) return;
      } else {
        ++stats.rejected_steps;
        double fac = std::isfinite(err) ? 0.9 * std::pow(err, -1.0 / 5.0) : 0.1;
        h = h_try * std::clamp(fac, 0.1, 0.9);
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
          throw NumericError("evolve: step size underflow at t=" + std::to_string(t));
      }
    }
  }

  void renormalize_trace(Mat& rho) {
    double tr = rho.trace().real();
    double drift = std::abs(tr - 1.0);
    stats.max_trace_drift = std::max(stats.max_trace_drift, drift);
    if (drift >= tol.trace_tol)
      throw NumericError(
          "evolve: trace drift " + std::to_string(drift) +
          " exceeds trace_tol (truncation too small or step tolerance too loose)");
    rho /= tr;
  }
};

Cplx sparse_expectation(const Triplets& obs, const Mat& rho) {
  // Tr[rho O] = sum over nonzeros O(r,c) of rho(c,r) * O(r,c).
  Cplx acc = 0.0;
  for (size_t k = 0; k < obs.size(); ++k) acc += rho(obs.col[k], obs.row[k]) * obs.val[k];
  return acc;
}

}  // namespace

TimeSeries evolve(const EvolutionSpec& spec, const DensityMatrix& rho0) {
  spec.validate();
  if (rho0.sig != spec.hamiltonian.sig)
    throw std::invalid_argument("evolve: rho0 sig mismatch");

  CompiledLindblad sys(spec.hamiltonian, spec.loss_ops);
  std::vector<Triplets> obs;
  obs.reserve(spec.observables.size());
  for (const auto& [name, op] : spec.observables) obs.push_back(Triplets::scan(op.data));

  TimeSeries ts;
  ts.names.reserve(spec.observables.size());
  for (const auto& [name, op] : spec.observables) ts.names.push_back(name);
  ts.columns.assign(spec.observables.size(), {});

  const double span = spec.t_grid.back() - spec.t_grid.front();
  Stepper stepper(sys, spec.tol, span > 0.0 ? span : 1.0);

  Mat rho = rho0.data;
  double t = spec.t_grid.front();

  auto sample = [&](double at) {
    ts.times.push_back(at);
    for (size_t i = 0; i < obs.size(); ++i) ts.columns[i].push_back(sparse_expectation(obs[i], rho));
    stepper.stats.max_herm_dev = std::max(
        stepper.stats.max_herm_dev, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    if (spec.tol.check_positivity) {
      Eigen::SelfAdjointEigenSolver<Mat> es(Mat(0.5 * (rho + rho.adjoint())),
                                            Eigen::EigenvaluesOnly);
      double lam = es.eigenvalues().minCoeff();
      stepper.stats.min_eigenvalue_seen = std::min(stepper.stats.min_eigenvalue_seen, lam);
      if (lam < spec.tol.positivity_floor)
        throw NumericError("evolve: negative eigenvalue " + std::to_string(lam) +
                           " at t=" + std::to_string(at) + " (instability)");
    }
  };

  sample(t);
  for (size_t g = 1; g < spec.t_grid.size(); ++g) {
    stepper.integrate_to(rho, t, spec.t_grid[g]);
    // Sampling sees the un-resymmetrized state so the Hermiticity stat is
    // honest; the trace renormalization only rescales.
    stepper.renormalize_trace(rho);
    sample(t);
  }

  rho = 0.5 * (rho + rho.adjoint()).eval();
  ts.final_state = DensityMatrix(rho0.sig, std::move(rho));
  ts.stats = stepper.stats;
  return ts;
}

SteadyResult relax_to_steady(const Operator& hamiltonian,
                             const std::vector<Operator>& loss_ops,
                             const DensityMatrix& rho0, double horizon_us,
                             double stall_tol, const EvolveTolerances& tol) {
  if (!(horizon_us > 0.0)) throw std::invalid_argument("relax_to_steady: horizon must be > 0");
  if (rho0.sig != hamiltonian.sig)
    throw std::invalid_argument("relax_to_steady: rho0 sig mismatch");

  CompiledLindblad sys(hamiltonian, loss_ops);
  Stepper stepper(sys, tol, horizon_us);

  Mat rho = rho0.data;
  double t = 0.0;
  SteadyResult out;

  // Walk the horizon in legs; the derivative norm is checked on each landing
  // (k1 there is the fresh RHS of the current state).
  const int legs = 64;
  sys.rhs(rho, stepper.k1);
  stepper.have_k1 = true;
  out.residual = stepper.k1.cwiseAbs().maxCoeff();
  if (out.residual < stall_tol) {
    out.state = DensityMatrix(rho0.sig, std::move(rho));
    out.converged = true;
    return out;
  }
  for (int leg = 1; leg <= legs; ++leg) {
    double target = horizon_us * static_cast<double>(leg) / legs;
    stepper.integrate_to(rho, t, target);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    stepper.renormalize_trace(rho);
    sys.rhs(rho, stepper.k1);
    stepper.have_k1 = true;
    out.residual = stepper.k1.cwiseAbs().maxCoeff();
    if (out.residual < stall_tol) {
      out.converged = true;
      break;
    }
  }
  out.t_reached = t;
  out.state = DensityMatrix(rho0.sig, std::move(rho));
  return out;
}

}  // namespace catsim
