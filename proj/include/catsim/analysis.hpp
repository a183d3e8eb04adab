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

#ifndef CATSIM_ANALYSIS_HPP
#define CATSIM_ANALYSIS_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "catsim/hilbert.hpp"
#include "catsim/lindblad.hpp"
#include "catsim/models.hpp"
#include "catsim/types.hpp"

namespace catsim {

struct GridSpec {
  double xmin = -3.0, xmax = 3.0;
  int nx = 61;
  double ymin = -3.0, ymax = 3.0;
  int ny = 61;

  static GridSpec square(double half_extent, int resolution);
  double dx() const { return nx > 1 ? (xmax - xmin) / (nx - 1) : 0.0; }
  double dy() const { return ny > 1 ? (ymax - ymin) / (ny - 1) : 0.0; }
  double x_at(int i) const { return xmin + i * dx(); }
  double y_at(int j) const { return ymin + j * dy(); }
  void validate() const;
};

struct WignerMap {
  GridSpec grid;
  RealMat values;  // values(i, j) = W(x_i + i y_j)

  /// Riemann sum of W dx dy over the grid.
  double integral() const;
  /// Checks |W| <= 2/pi + slack.
  void validate(double slack = 5e-2) const;
  /// CSV `x,y,W`, row-major with y varying fastest.
  void write_csv(std::ostream& os) const;
  void write_csv_file(const std::string& path) const;
};

/// W(beta) = (2/pi) Tr[D(beta) rho D(beta)^dag P] for a single-mode rho
/// (trace out other modes first with partial_trace). Evaluated through the
/// analytic Fock-basis matrix elements of the displaced-parity kernel, which
/// is exact for states contained in the truncation; rejects states whose
/// top Fock levels still hold population.
WignerMap wigner(const DensityMatrix& rho, const GridSpec& grid);
double wigner_point(const DensityMatrix& rho, Cplx beta);

/// Husimi Q(beta) = <beta|rho|beta>/pi.
double husimi_point(const DensityMatrix& rho, Cplx beta);

/// Hermitian observable Omega_+ - Omega_- where Omega_+- integrate
/// |beta><beta|/pi over the half planes Re beta >< 0 (quadrature on a grid
/// that excludes the x = 0 line). Tr[rho Omega] is the Husimi-mass
/// difference between the two wells.
Operator halfplane_husimi_diff(int truncation, double half_extent, int resolution);

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> stderrs;  // empty unless converged
  double residual_rms = 0.0;
  bool converged = false;
  std::vector<std::string> flags;

  double param(const std::string& name) const;
  double stderr_of(const std::string& name) const;
  bool has_flag(const std::string& flag) const;
};

struct FitExpOptions {
  bool fix_offset = false;  // pin C instead of fitting it
  double offset = 0.0;
};

/// Levenberg-Marquardt fit of A exp(-t/T) + C with analytic Jacobian;
/// initial guess from a log-linear regression on (samples - tail mean).
/// Near-constant data returns converged=false with flag "t_infinite".
/// Params: "A", "T", "C".
FitResult fit_exp_decay(const std::vector<double>& times, const std::vector<double>& samples,
                        const FitExpOptions& opt = FitExpOptions{});

/// Ordinary least squares y = slope x + intercept. Params: "slope",
/// "intercept".
FitResult fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

struct ScanOptions {
  int jobs = 0;            // worker cap for the per-point fan-out; 0 = hardware
  int samples_per_window = 80;
  /// Size lists name target stabilized sizes; the drive is set to
  /// alpha^2 = target + kappa_a/(2 kappa2) to land the wells on target.
  bool compensate_loss_shift = true;
  EvolveTolerances tol;
};

struct BitflipPoint {
  double alpha_sq_drive = 0.0;
  double alpha_inf_sq = 0.0;  // measured |<a^2>| at late time
  double T_us = 0.0;
  double T_stderr_us = 0.0;
  bool converged = false;
};

/// Per size: prepare the coherent state |+alpha>, evolve, fit the decay of
/// Re<a> to an exponential, and read the stabilized size off |<a^2>|.
/// Windows grow geometrically until 25% decay is seen or horizon_us is
/// spent; the fit always stays inside the simulated window.
std::vector<BitflipPoint> bitflip_scan(const ModelSpec& base,
                                       const std::vector<double>& alpha_inf_sq_targets,
                                       double horizon_us,
                                       const ScanOptions& opt = ScanOptions{});

/// CSV `alpha_sq,alpha_inf_sq,T_us,T_stderr_us`.
void write_bitflip_csv(const std::vector<BitflipPoint>& points, std::ostream& os);

struct PhaseflipPoint {
  double alpha_sq = 0.0;  // stabilized cat size the pair was prepared at
  double gamma_per_us = 0.0;
  double stderr_per_us = 0.0;
  bool converged = false;
};

/// Prepares |+>_alpha and |->_alpha, evolves both, and fits the decay of
/// <P>_+ - <P>_- to extract the phase-flip rate. Rejects alpha = 0.
std::vector<PhaseflipPoint> phaseflip_scan(const ModelSpec& base,
                                           const std::vector<double>& alpha_sq_list,
                                           const ScanOptions& opt = ScanOptions{});

/// CSV `alpha_sq,gamma_per_us,stderr`.
void write_phaseflip_csv(const std::vector<PhaseflipPoint>& points, std::ostream& os);

/// Steady-state photon-number parity of the one-mode model with a detuning
/// term delta n_a added to H, relaxed from vacuum. Rates in MHz (nu).
double steady_parity_one_mode(double alpha_sq_drive, double kappa2_nu, double kappa_a_nu,
                              double chi_aa_nu, double delta_nu, int truncation);

struct ParityCurve {
  std::vector<double> delta_nu;  // MHz
  std::vector<double> parity;
  double alpha_sq = 0.0;
};

/// Steady parity per detuning for the given one-mode model. delta_list
/// must span beyond +-kappa2 alpha^2 (the stabilization window).
ParityCurve parity_vs_detuning(const ModelSpec& base, const std::vector<double>& delta_list_nu,
                               const ScanOptions& opt = ScanOptions{});

void write_parity_curve_csv(const ParityCurve& curve, std::ostream& os);

/// Least squares of (contrast, kappa2) against simulated steady-parity
/// templates: P_model(delta) = 1 - c (1 - S(delta; kappa2)). Params:
/// "kappa2" (MHz), "contrast".
FitResult fit_kappa2(const ParityCurve& curve, double alpha_sq, double kappa_a_nu,
                     double chi_aa_nu, int truncation);

/// Six-parameter fit of two diametrically opposed isotropic Gaussians
/// (centers +-(x0,y0), common width, two amplitudes, offset). Params:
/// "x0", "y0", "sigma", "A1", "A2", "C", "alpha_inf_sq". Single-lobe maps
/// come back flagged "single_lobe" with alpha_inf_sq = 0.
FitResult fit_cat_size(const WignerMap& map);

/// Linear calibration of cat size vs drive amplitude: fits
/// alpha_inf_sq = slope eps_d - offset. Params: "slope", "offset"; offset
/// estimates kappa_a/(2 kappa2).
FitResult drive_calibration(const std::vector<std::pair<double, double>>& eps_alpha_pairs);

}  // namespace catsim

#endif  // CATSIM_ANALYSIS_HPP
