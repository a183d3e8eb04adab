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

#include "catsim/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

namespace catsim {

GridSpec GridSpec::square(double half_extent, int resolution) {
  GridSpec g;
  g.xmin = g.ymin = -half_extent;
  g.xmax = g.ymax = half_extent;
  g.nx = g.ny = resolution;
  return g;
}

void GridSpec::validate() const {
  if (nx < 2 || ny < 2) throw std::invalid_argument("GridSpec: resolution must be >= 2");
  if (!(xmax > xmin) || !(ymax > ymin))
    throw std::invalid_argument("GridSpec: empty extent");
}

double WignerMap::integral() const { return values.sum() * grid.dx() * grid.dy(); }

void WignerMap::validate(double slack) const {
  double bound = 2.0 / M_PI + slack;
  double worst = values.cwiseAbs().maxCoeff();
  if (worst > bound)
    throw NumericError("WignerMap: |W| = " + std::to_string(worst) +
                       " exceeds 2/pi + slack");
}

void WignerMap::write_csv(std::ostream& os) const {
  os << "x,y,W\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) {
      put(grid.x_at(i)); os << ","; put(grid.y_at(j)); os << ","; put(values(i, j));
      os << "\n";
    }
}

void WignerMap::write_csv_file(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("WignerMap: cannot open " + path);
  write_csv(f);
}

namespace {

// Displaced-parity contraction W = (2/pi) Tr[rho D(2 beta) P], the Fock-
// basis form of measuring parity displaced to beta (a coherent state |b>
// peaks at beta = b). Hermitian rho makes every off-diagonal pair
// contribute 2 Re(rho_nm K_mn), so W is real by construction.
// `ratio(n, d)` = sqrt(n! / (n+d)!).
struct WignerKernel {
  int dim;
  RealMat ratio;  // ratio(n, d) = sqrt(n!/(n+d)!)

  explicit WignerKernel(int n) : dim(n), ratio(n, n) {
    std::vector<double> lgf(static_cast<size_t>(2 * n) + 1);
    for (size_t k = 0; k < lgf.size(); ++k) lgf[k] = std::lgamma(static_cast<double>(k) + 1.0);
    for (int nn = 0; nn < n; ++nn)
      for (int d = 0; d + nn < n; ++d)
        ratio(nn, d) = std::exp(0.5 * (lgf[nn] - lgf[nn + d]));
  }

  double eval(const Mat& rho, Cplx beta) const {
    const Cplx gamma = 2.0 * beta;
    const double z = std::norm(gamma);
    const double ez = std::exp(-0.5 * z);
    const Cplx phase_step =
        (z > 0.0) ? gamma / std::abs(gamma) : Cplx(1.0, 0.0);
    const double mag = std::abs(gamma);

    double acc = 0.0;
    // d = 0 diagonal: Laguerre L_n(z).
    {
      double lm1 = 0.0, l = 1.0;  // L_{-1}, L_0
      double sign = 1.0;
      for (int n = 0; n < dim; ++n) {
        acc += sign * rho(n, n).real() * l * ez;
        double lp = ((2.0 * n + 1.0 - z) * l - n * lm1) / (n + 1.0);
        lm1 = l;
        l = lp;
        sign = -sign;
      }
    }
    Cplx ph(1.0, 0.0);
    double pd = 1.0;
    for (int d = 1; d < dim; ++d) {
      ph *= phase_step;
      pd *= mag;
      double lm1 = 0.0, l = 1.0;  // L_0^d
      double sign = 1.0;
      const double common = 2.0 * pd * ez;
      for (int n = 0; n + d < dim; ++n) {
        double re = (rho(n, n + d) * ph).real();
        acc += sign * common * ratio(n, d) * l * re;
        double lp = ((2.0 * n + 1.0 + d - z) * l - (n + d) * lm1) / (n + 1.0);
        lm1 = l;
        l = lp;
        sign = -sign;
      }
    }
    return acc * 2.0 / M_PI;
  }
};

void require_single_contained_mode(const DensityMatrix& rho) {
  if (rho.sig.num_modes() != 1)
    throw std::invalid_argument(
        "wigner: multi-mode state; reduce with partial_trace first");
  int n = rho.sig.total_dim();
  double tail = 0.0;
  for (int k = std::max(0, n - 2); k < n; ++k) tail += std::max(0.0, rho.data(k, k).real());
  if (tail > 1e-6)
    throw std::invalid_argument(
        "wigner: truncation too small, top Fock levels hold population " +
        std::to_string(tail));
}

}  // namespace

WignerMap wigner(const DensityMatrix& rho, const GridSpec& grid) {
  grid.validate();
  require_single_contained_mode(rho);
  WignerKernel kernel(rho.sig.total_dim());
  WignerMap map;
  map.grid = grid;
  map.values.resize(grid.nx, grid.ny);
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j)
      map.values(i, j) = kernel.eval(rho.data, Cplx(grid.x_at(i), grid.y_at(j)));
  return map;
}

double wigner_point(const DensityMatrix& rho, Cplx beta) {
  require_single_contained_mode(rho);
  return WignerKernel(rho.sig.total_dim()).eval(rho.data, beta);
}

double husimi_point(const DensityMatrix& rho, Cplx beta) {
  if (rho.sig.num_modes() != 1)
    throw std::invalid_argument("husimi_point: single-mode states only");
  Vec c = coherent_amplitudes(beta, rho.sig.total_dim());
  return std::real(c.dot(rho.data * c)) / M_PI;
}

Operator halfplane_husimi_diff(int truncation, double half_extent, int resolution) {
  if (truncation < 2) throw std::invalid_argument("halfplane_husimi_diff: dim too small");
  if (resolution < 2 || resolution % 2 != 0)
    throw std::invalid_argument("halfplane_husimi_diff: resolution must be even (skips x=0)");
  SpaceSig sig({truncation});
  Mat omega = Mat::Zero(truncation, truncation);
  double step = 2.0 * half_extent / resolution;
  double w = step * step / M_PI;
  for (int i = 0; i < resolution; ++i) {
    double x = -half_extent + (i + 0.5) * step;
    for (int j = 0; j < resolution; ++j) {
      double y = -half_extent + (j + 0.5) * step;
      Vec c = coherent_amplitudes(Cplx(x, y), truncation);
      double s = (x > 0.0) ? w : -w;
      omega.noalias() += s * (c * c.adjoint());
    }
  }
  return Operator(sig, std::move(omega));
}

double FitResult::param(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return values[i];
  throw std::invalid_argument("FitResult: no parameter '" + name + "'");
}

double FitResult::stderr_of(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name)
      return i < stderrs.size() ? stderrs[i] : 0.0;
  throw std::invalid_argument("FitResult: no parameter '" + name + "'");
}

bool FitResult::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

namespace {

// Shared Levenberg-Marquardt driver. `eval(p, r, J)` fills residuals
// r_i = y_i - model_i and J_ik = d model_i / d p_k. Damping starts at 1e-3
// with factor 10 and at most `max_iter` iterations.
struct LMOutcome {
  Eigen::VectorXd p;
  Eigen::MatrixXd cov;
  double rms = 0.0;
  bool converged = false;
};

LMOutcome run_lm(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)>& eval,
    Eigen::VectorXd p0, int n_res, int max_iter = 200) {
  const int np = static_cast<int>(p0.size());
  Eigen::VectorXd r(n_res), r_try(n_res);
  Eigen::MatrixXd jac(n_res, np), jac_try(n_res, np);

  LMOutcome out;
  out.p = std::move(p0);
  eval(out.p, r, jac);
  double ssr = r.squaredNorm();
  double lambda = 1e-3;

  for (int iter = 0; iter < max_iter; ++iter) {
    Eigen::MatrixXd a = jac.transpose() * jac;
    Eigen::VectorXd g = jac.transpose() * r;
    Eigen::MatrixXd damped = a;
    for (int k = 0; k < np; ++k)
      damped(k, k) += lambda * std::max(a(k, k), 1e-30);
    Eigen::VectorXd delta = damped.ldlt().solve(g);
    Eigen::VectorXd p_try = out.p + delta;
    eval(p_try, r_try, jac_try);
    double ssr_try = r_try.squaredNorm();
    if (ssr_try < ssr) {
      bool small_gain = (ssr - ssr_try) <= 1e-12 * (ssr + 1e-300);
      bool small_step = delta.cwiseAbs().maxCoeff() <=
                        1e-10 * (out.p.cwiseAbs().maxCoeff() + 1e-30);
      out.p = p_try;
      r.swap(r_try);
      jac.swap(jac_try);
      ssr = ssr_try;
      lambda = std::max(lambda / 10.0, 1e-12);
      if (small_gain || small_step) {
        out.converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  out.rms = std::sqrt(ssr / n_res);
  if (out.converged) {
    Eigen::MatrixXd a = jac.transpose() * jac;
    double dof = std::max(1, n_res - np);
    double sigma2 = ssr / dof;
    out.cov = sigma2 * a.inverse();
  }
  return out;
}

}  // namespace

FitResult fit_exp_decay(const std::vector<double>& times, const std::vector<double>& samples,
                        const FitExpOptions& opt) {
  if (times.size() != samples.size())
    throw std::invalid_argument("fit_exp_decay: length mismatch");
  const int n = static_cast<int>(times.size());
  if (n < 5) throw std::invalid_argument("fit_exp_decay: need at least 5 samples");

  double ymin = *std::min_element(samples.begin(), samples.end());
  double ymax = *std::max_element(samples.begin(), samples.end());
  double yscale = std::max(std::abs(ymin), std::abs(ymax));
  FitResult res;
  if (ymax - ymin <= 1e-12 * std::max(1.0, yscale)) {
    // Constant data: no finite decay time.
    res.names = {"A", "T", "C"};
    res.values = {0.0, std::numeric_limits<double>::infinity(),
                  opt.fix_offset ? opt.offset : samples[0]};
    res.flags.push_back("t_infinite");
    return res;
  }

  double c0 = opt.offset;
  if (!opt.fix_offset) {
    int tail = std::max(3, n / 10);
    c0 = 0.0;
    for (int i = n - tail; i < n; ++i) c0 += samples[i];
    c0 /= tail;
  }

  // Log-linear seed on the samples still clearly away from the offset.
  double s_first = samples[0] - c0;
  double sgn = s_first >= 0.0 ? 1.0 : -1.0;
  double smax = 0.0;
  for (int i = 0; i < n; ++i) smax = std::max(smax, std::abs(samples[i] - c0));
  std::vector<double> lx, ly;
  for (int i = 0; i < n; ++i) {
    double s = sgn * (samples[i] - c0);
    if (s > 0.05 * smax) {
      lx.push_back(times[i]);
      ly.push_back(std::log(s));
    }
  }
  if (lx.size() < 2) {
    res.names = {"A", "T", "C"};
    res.values = {0.0, std::numeric_limits<double>::infinity(), c0};
    res.flags.push_back("t_infinite");
    return res;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i]; sy += ly[i]; sxx += lx[i] * lx[i]; sxy += lx[i] * ly[i];
  }
  double m = static_cast<double>(lx.size());
  double denom = m * sxx - sx * sx;
  double slope = denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
  if (!(slope < 0.0)) {
    // Data move away from the assumed offset: not a decay toward C.
    res.names = {"A", "T", "C"};
    res.values = {sgn * smax, -1.0, c0};
    res.flags.push_back("t_nonpositive");
    return res;
  }
  double t0 = -1.0 / slope;
  double loga = (sy - slope * sx) / m;
  double a0 = sgn * std::exp(loga);

  // T is fitted as ln T, so the decay constant stays positive throughout.
  const bool fit_c = !opt.fix_offset;
  const int np = fit_c ? 3 : 2;
  Eigen::VectorXd p0(np);
  p0(0) = a0;
  p0(1) = std::log(t0);
  if (fit_c) p0(2) = c0;

  auto eval = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    double a = p(0), t = std::exp(p(1)), c = fit_c ? p(2) : opt.offset;
    for (int i = 0; i < n; ++i) {
      double e = std::exp(-times[i] / t);
      r(i) = samples[i] - (a * e + c);
      jac(i, 0) = e;
      jac(i, 1) = a * e * times[i] / t;  // d/d lnT
      if (fit_c) jac(i, 2) = 1.0;
    }
  };
  LMOutcome lm = run_lm(eval, p0, n, 200);

  double a = lm.p(0), t = std::exp(lm.p(1)), c = fit_c ? lm.p(2) : opt.offset;
  res.names = {"A", "T", "C"};
  res.values = {a, t, c};
  res.residual_rms = lm.rms;
  res.converged = lm.converged;
  if (lm.converged) {
    double sa = std::sqrt(std::max(0.0, lm.cov(0, 0)));
    double st = t * std::sqrt(std::max(0.0, lm.cov(1, 1)));  // ln T -> T
    double sc = fit_c ? std::sqrt(std::max(0.0, lm.cov(2, 2))) : 0.0;
    res.stderrs = {sa, st, sc};
  }
  return res;
}

FitResult fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("fit_line: need at least 2 points");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i]; sy += ys[i]; sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit_line: degenerate xs");
  double slope = (n * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / n;
  double ssr = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    double r = ys[i] - (slope * xs[i] + intercept);
    ssr += r * r;
  }
  FitResult res;
  res.names = {"slope", "intercept"};
  res.values = {slope, intercept};
  res.converged = true;
  res.residual_rms = std::sqrt(ssr / n);
  if (xs.size() > 2) {
    double sigma2 = ssr / (n - 2.0);
    double sxx_c = sxx - sx * sx / n;
    res.stderrs = {std::sqrt(sigma2 / sxx_c),
                   std::sqrt(sigma2 * (1.0 / n + (sx / n) * (sx / n) / sxx_c))};
  } else {
    res.stderrs = {0.0, 0.0};
  }
  return res;
}

namespace {

void parallel_for(size_t count, int jobs, const std::function<void(size_t)>& fn) {
  if (count == 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  int workers = jobs > 0 ? jobs : (hw > 0 ? static_cast<int>(hw) : 2);
  workers = std::min<int>(workers, static_cast<int>(count));
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  auto body = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

DensityMatrix initial_cat_mode_state(const ModelSpec& spec, const Ket& cat_mode,
                                     bool transmon_excited = false) {
  Ket full = cat_mode;
  if (spec.rung != ModelRung::OneMode) full = tensor(full, fock_ket(spec.truncations[1], 0));
  if (spec.rung == ModelRung::ThreeMode)
    full = tensor(full, fock_ket(2, transmon_excited ? 1 : 0));
  return DensityMatrix::from_ket(full);
}

double loss_shift(const SystemParams& p) {
  double k2 = kappa2_effective(p.g2, p.kappa_b);
  return k2 > 0.0 ? p.kappa_a / (2.0 * k2) : 0.0;
}

std::vector<double> linspace(double t0, double t1, int count) {
  std::vector<double> t(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i)
    t[static_cast<size_t>(i)] = t0 + (t1 - t0) * static_cast<double>(i) / (count - 1);
  t.back() = t1;
  return t;
}

}  // namespace

namespace {

BitflipPoint bitflip_point(const ModelSpec& base, double target, double horizon_us,
                           const ScanOptions& opt) {
  const SystemParams& p = base.params;
  double kappa2_nu = kappa2_effective(p.g2, p.kappa_b);
  double shift = opt.compensate_loss_shift ? loss_shift(p) : 0.0;

  ModelSpec spec = base;
  spec.alpha_sq_target = target + shift;
  ModelOps model = build_model(spec);

  double alpha_drive = std::sqrt(spec.alpha_sq_target);
  Ket cat = cat_basis_state(spec.truncations[0], alpha_drive, CatKind::Coherent);
  DensityMatrix rho = initial_cat_mode_state(spec, cat);

  Operator a = mode_operator(model.sig, 0, ModeOp::Annihilation);
  Operator a2 = a * a;

  double kappa2_ang = angular(kappa2_nu);
  double kappa_c = 2.0 * kappa2_ang * std::max(target, 1e-12);
  double t_settle = kappa2_ang > 0.0
                        ? std::min(std::max(6.0 / kappa_c, 2.0 / kappa2_ang), 0.2 * horizon_us)
                        : 0.0;

  BitflipPoint out;
  out.alpha_sq_drive = spec.alpha_sq_target;

  double t_cur = 0.0;
  if (t_settle > 0.0) {
    EvolutionSpec ev{model.hamiltonian, model.loss_ops, linspace(0.0, t_settle, 9),
                     {{"a", a}, {"a2", a2}}, opt.tol};
    TimeSeries ts = evolve(ev, rho);
    rho = ts.final_state;
    out.alpha_inf_sq = std::abs(ts.column("a2").back());
    t_cur = t_settle;
  } else {
    out.alpha_inf_sq = std::abs(expectation(rho, a2));
  }

  double a_ref = std::real(expectation(rho, a));
  double t_pred = kappa2_ang > 0.0 ? std::exp(2.0 * std::max(target, 0.0)) / kappa_c
                                   : 2.0 / angular(p.kappa_a);
  double window = std::min(0.5 * t_pred, horizon_us - t_cur);
  window = std::max(window, 1e-6 * horizon_us);

  std::vector<double> fit_t{t_cur}, fit_a{a_ref};
  for (int leg = 0; leg < 64 && t_cur < horizon_us * (1.0 - 1e-9); ++leg) {
    double t_end = std::min(t_cur + window, horizon_us);
    EvolutionSpec ev{model.hamiltonian, model.loss_ops,
                     linspace(t_cur, t_end, opt.samples_per_window), {{"a", a}}, opt.tol};
    TimeSeries ts = evolve(ev, rho);
    rho = ts.final_state;
    const auto& col = ts.column("a");
    for (size_t k = 1; k < ts.times.size(); ++k) {
      fit_t.push_back(ts.times[k]);
      fit_a.push_back(col[k].real());
    }
    t_cur = t_end;
    if (a_ref != 0.0 && fit_a.back() / a_ref < 0.75) break;
    window = std::min(2.0 * window, horizon_us - t_cur);
    if (window <= 0.0) break;
  }

  FitExpOptions fo;
  fo.fix_offset = true;
  fo.offset = 0.0;
  FitResult fit = fit_exp_decay(fit_t, fit_a, fo);
  out.T_us = fit.param("T");
  out.T_stderr_us = fit.converged ? fit.stderr_of("T") : 0.0;
  out.converged = fit.converged;
  return out;
}

}  // namespace

std::vector<BitflipPoint> bitflip_scan(const ModelSpec& base,
                                       const std::vector<double>& alpha_inf_sq_targets,
                                       double horizon_us, const ScanOptions& opt) {
  if (alpha_inf_sq_targets.empty())
    throw std::invalid_argument("bitflip_scan: empty size list");
  if (!(horizon_us > 0.0)) throw std::invalid_argument("bitflip_scan: horizon must be > 0");
  std::vector<BitflipPoint> out(alpha_inf_sq_targets.size());
  parallel_for(out.size(), opt.jobs, [&](size_t i) {
    out[i] = bitflip_point(base, alpha_inf_sq_targets[i], horizon_us, opt);
  });
  return out;
}

void write_bitflip_csv(const std::vector<BitflipPoint>& points, std::ostream& os) {
  os << "alpha_sq,alpha_inf_sq,T_us,T_stderr_us\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (const auto& pt : points) {
    put(pt.alpha_sq_drive); os << ","; put(pt.alpha_inf_sq); os << ",";
    put(pt.T_us); os << ","; put(pt.T_stderr_us); os << "\n";
  }
}

namespace {

PhaseflipPoint phaseflip_point(const ModelSpec& base, double size, const ScanOptions& opt) {
  if (!(size > 0.0))
    throw std::invalid_argument("phaseflip_scan: alpha^2 = 0 has no odd cat");
  const SystemParams& p = base.params;
  double shift = opt.compensate_loss_shift ? loss_shift(p) : 0.0;

  ModelSpec spec = base;
  spec.alpha_sq_target = size + shift;
  ModelOps model = build_model(spec);

  double alpha_prep = std::sqrt(size);
  Operator parity = mode_operator(model.sig, 0, ModeOp::Parity);

  double gamma_pred = 2.0 * size * angular(p.kappa_a);
  double window = gamma_pred > 0.0 ? 2.5 / gamma_pred
                                   : 20.0 / angular(kappa2_effective(p.g2, p.kappa_b));

  std::vector<double> grid = linspace(0.0, window, opt.samples_per_window);
  std::vector<double> diff(grid.size());
  {
    Ket plus = cat_basis_state(spec.truncations[0], alpha_prep, CatKind::Plus);
    Ket minus = cat_basis_state(spec.truncations[0], alpha_prep, CatKind::Minus);
    EvolutionSpec ev{model.hamiltonian, model.loss_ops, grid, {{"parity", parity}}, opt.tol};
    TimeSeries ts_plus = evolve(ev, initial_cat_mode_state(spec, plus));
    TimeSeries ts_minus = evolve(ev, initial_cat_mode_state(spec, minus));
    const auto& cp = ts_plus.column("parity");
    const auto& cm = ts_minus.column("parity");
    for (size_t k = 0; k < grid.size(); ++k) diff[k] = (cp[k] - cm[k]).real();
  }

  FitExpOptions fo;
  fo.fix_offset = true;
  fo.offset = 0.0;
  FitResult fit = fit_exp_decay(grid, diff, fo);

  PhaseflipPoint out;
  out.alpha_sq = size;
  double t = fit.param("T");
  out.gamma_per_us = t > 0.0 && std::isfinite(t) ? 1.0 / t : 0.0;
  out.stderr_per_us = fit.converged && t > 0.0 ? fit.stderr_of("T") / (t * t) : 0.0;
  out.converged = fit.converged;
  return out;
}

}  // namespace

std::vector<PhaseflipPoint> phaseflip_scan(const ModelSpec& base,
                                           const std::vector<double>& alpha_sq_list,
                                           const ScanOptions& opt) {
  if (alpha_sq_list.empty()) throw std::invalid_argument("phaseflip_scan: empty size list");
  std::vector<PhaseflipPoint> out(alpha_sq_list.size());
  parallel_for(out.size(), opt.jobs, [&](size_t i) {
    out[i] = phaseflip_point(base, alpha_sq_list[i], opt);
  });
  return out;
}

void write_phaseflip_csv(const std::vector<PhaseflipPoint>& points, std::ostream& os) {
  os << "alpha_sq,gamma_per_us,stderr\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (const auto& pt : points) {
    put(pt.alpha_sq); os << ","; put(pt.gamma_per_us); os << ","; put(pt.stderr_per_us);
    os << "\n";
  }
}

double steady_parity_one_mode(double alpha_sq_drive, double kappa2_nu, double kappa_a_nu,
                              double chi_aa_nu, double delta_nu, int truncation) {
  if (!(kappa2_nu > 0.0))
    throw std::invalid_argument("steady_parity_one_mode: kappa2 must be > 0");
  SpaceSig sig({truncation});
  Operator a = mode_operator(sig, 0, ModeOp::Annihilation);
  Operator ad = a.adjoint();
  Operator id = mode_operator(sig, 0, ModeOp::Identity);
  Operator h = (-0.5 * angular(chi_aa_nu)) * (ad * ad * a * a) +
               angular(delta_nu) * (ad * a);
  std::vector<Operator> loss;
  if (kappa_a_nu > 0.0) loss.push_back(std::sqrt(angular(kappa_a_nu)) * a);
  loss.push_back(std::sqrt(angular(kappa2_nu)) *
                 (a * a - alpha_sq_drive * id));

  double slow = angular(kappa_a_nu > 0.0 ? std::min(kappa_a_nu, kappa2_nu) : kappa2_nu);
  DensityMatrix vac = DensityMatrix::from_ket(fock_ket(truncation, 0));
  SteadyResult steady =
      relax_to_steady(h, loss, vac, 100.0 / slow, 1e-7 * slow);
  Operator parity = mode_operator(sig, 0, ModeOp::Parity);
  return std::real(expectation(steady.state, parity));
}

ParityCurve parity_vs_detuning(const ModelSpec& base, const std::vector<double>& delta_list_nu,
                               const ScanOptions& opt) {
  if (base.rung != ModelRung::OneMode)
    throw std::invalid_argument("parity_vs_detuning: one-mode models only");
  if (delta_list_nu.empty()) throw std::invalid_argument("parity_vs_detuning: empty list");
  base.validate();
  double kappa2_nu = kappa2_effective(base.params.g2, base.params.kappa_b);
  double window = kappa2_nu * base.alpha_sq_target;
  double span = *std::max_element(delta_list_nu.begin(), delta_list_nu.end());
  if (span <= window)
    throw std::invalid_argument(
        "parity_vs_detuning: delta list must span beyond kappa2 alpha^2");
  ParityCurve curve;
  curve.alpha_sq = base.alpha_sq_target;
  curve.delta_nu = delta_list_nu;
  curve.parity.resize(delta_list_nu.size());
  parallel_for(delta_list_nu.size(), opt.jobs, [&](size_t i) {
    curve.parity[i] =
        steady_parity_one_mode(base.alpha_sq_target, kappa2_nu, base.params.kappa_a,
                               base.params.chi_aa, delta_list_nu[i], base.truncations[0]);
  });
  return curve;
}

void write_parity_curve_csv(const ParityCurve& curve, std::ostream& os) {
  os << "delta_mhz,parity\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (size_t i = 0; i < curve.delta_nu.size(); ++i) {
    put(curve.delta_nu[i]); os << ","; put(curve.parity[i]); os << "\n";
  }
}

FitResult fit_kappa2(const ParityCurve& curve, double alpha_sq, double kappa_a_nu,
                     double chi_aa_nu, int truncation) {
  const size_t n = curve.delta_nu.size();
  if (n < 4) throw std::invalid_argument("fit_kappa2: need at least 4 points");

  double pmin = *std::min_element(curve.parity.begin(), curve.parity.end());
  double c0 = std::clamp(1.0 - pmin, 0.05, 2.0);
  double half = 0.0;
  for (size_t i = 0; i < n; ++i)
    if (curve.parity[i] < 1.0 - 0.5 * c0) half = std::max(half, std::abs(curve.delta_nu[i]));
  if (half == 0.0)
    half = 0.25 * *std::max_element(curve.delta_nu.begin(), curve.delta_nu.end());
  double kappa2_0 = half / alpha_sq;

  // Parity is even in delta, so templates are cached per |delta|.
  std::map<std::pair<long long, double>, double> cache;
  auto tpl = [&](double kappa2_nu, double delta_nu) {
    double ad = std::abs(delta_nu);
    auto key = std::make_pair(static_cast<long long>(1e12 * kappa2_nu), ad);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    double v = steady_parity_one_mode(alpha_sq, kappa2_nu, kappa_a_nu, chi_aa_nu, ad,
                                      truncation);
    cache.emplace(key, v);
    return v;
  };

  auto eval = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    double c = p(0), k2 = std::exp(p(1));
    double k2b = k2 * 1.02;  // forward difference in ln kappa2
    for (size_t i = 0; i < n; ++i) {
      double s = tpl(k2, curve.delta_nu[i]);
      double sb = tpl(k2b, curve.delta_nu[i]);
      double model = 1.0 - c * (1.0 - s);
      r(static_cast<int>(i)) = curve.parity[i] - model;
      jac(static_cast<int>(i), 0) = -(1.0 - s);
      jac(static_cast<int>(i), 1) = c * (sb - s) / std::log(1.02);
    }
  };

  Eigen::VectorXd p0(2);
  p0(0) = c0;
  p0(1) = std::log(kappa2_0);
  LMOutcome lm = run_lm(eval, p0, static_cast<int>(n), 25);

  FitResult res;
  res.names = {"kappa2", "contrast"};
  double k2 = std::exp(lm.p(1));
  res.values = {k2, lm.p(0)};
  res.residual_rms = lm.rms;
  res.converged = lm.converged;
  if (lm.converged)
    res.stderrs = {k2 * std::sqrt(std::max(0.0, lm.cov(1, 1))),
                   std::sqrt(std::max(0.0, lm.cov(0, 0)))};
  return res;
}

FitResult fit_cat_size(const WignerMap& map) {
  const GridSpec& g = map.grid;
  const int n = g.nx * g.ny;

  // Seed at the strongest lobe.
  int im = 0, jm = 0;
  map.values.maxCoeff(&im, &jm);
  double x0 = g.x_at(im), y0 = g.y_at(jm);
  double wmax = map.values(im, jm);

  Eigen::VectorXd p0(6);
  p0 << x0, y0, std::log(0.5), wmax, wmax, 0.0;

  auto eval = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    double cx = p(0), cy = p(1), sigma = std::exp(p(2)), a1 = p(3), a2 = p(4), c = p(5);
    double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    int k = 0;
    for (int i = 0; i < g.nx; ++i) {
      double x = g.x_at(i);
      for (int j = 0; j < g.ny; ++j, ++k) {
        double y = g.y_at(j);
        double d1x = x - cx, d1y = y - cy, d2x = x + cx, d2y = y + cy;
        double r1 = d1x * d1x + d1y * d1y, r2 = d2x * d2x + d2y * d2y;
        double e1 = std::exp(-r1 * inv2s2), e2 = std::exp(-r2 * inv2s2);
        r(k) = map.values(i, j) - (a1 * e1 + a2 * e2 + c);
        jac(k, 0) = (a1 * e1 * d1x - a2 * e2 * d2x) / (sigma * sigma);
        jac(k, 1) = (a1 * e1 * d1y - a2 * e2 * d2y) / (sigma * sigma);
        jac(k, 2) = (a1 * e1 * r1 + a2 * e2 * r2) * 2.0 * inv2s2;  // d/d ln sigma
        jac(k, 3) = e1;
        jac(k, 4) = e2;
        jac(k, 5) = 1.0;
      }
    }
  };
  LMOutcome lm = run_lm(eval, p0, n, 200);

  double cx = lm.p(0), cy = lm.p(1), sigma = std::exp(lm.p(2));
  double alpha_inf_sq = cx * cx + cy * cy;

  FitResult res;
  res.names = {"x0", "y0", "sigma", "A1", "A2", "C", "alpha_inf_sq"};
  res.values = {cx, cy, sigma, lm.p(3), lm.p(4), lm.p(5), alpha_inf_sq};
  res.residual_rms = lm.rms;
  res.converged = lm.converged;
  if (lm.converged) {
    double sx = std::sqrt(std::max(0.0, lm.cov(0, 0)));
    double sy = std::sqrt(std::max(0.0, lm.cov(1, 1)));
    double ss = sigma * std::sqrt(std::max(0.0, lm.cov(2, 2)));
    double sa = std::hypot(2.0 * cx * sx, 2.0 * cy * sy);
    res.stderrs = {sx, sy, ss,
                   std::sqrt(std::max(0.0, lm.cov(3, 3))),
                   std::sqrt(std::max(0.0, lm.cov(4, 4))),
                   std::sqrt(std::max(0.0, lm.cov(5, 5))), sa};
  }
  if (std::sqrt(alpha_inf_sq) < 0.5 * sigma) {
    // Lobes merged: report a pinned single-lobe result.
    res.flags.push_back("single_lobe");
    res.values[6] = 0.0;
  }
  return res;
}

FitResult drive_calibration(const std::vector<std::pair<double, double>>& eps_alpha_pairs) {
  if (eps_alpha_pairs.size() < 2)
    throw std::invalid_argument("drive_calibration: need at least 2 points");
  std::vector<double> xs, ys;
  xs.reserve(eps_alpha_pairs.size());
  ys.reserve(eps_alpha_pairs.size());
  for (const auto& [eps, asq] : eps_alpha_pairs) {
    xs.push_back(eps);
    ys.push_back(asq);
  }
  FitResult line = fit_line(xs, ys);
  FitResult res;
  res.names = {"slope", "offset"};
  res.values = {line.param("slope"), -line.param("intercept")};
  res.stderrs = {line.stderr_of("slope"), line.stderr_of("intercept")};
  res.residual_rms = line.residual_rms;
  res.converged = line.converged;
  return res;
}

}  // namespace catsim
