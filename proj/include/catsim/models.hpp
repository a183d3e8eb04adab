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

#ifndef CATSIM_MODELS_HPP
#define CATSIM_MODELS_HPP

#include <string>
#include <utility>
#include <vector>

#include "catsim/hilbert.hpp"
#include "catsim/types.hpp"

namespace catsim {

/// Measured device constants. Every frequency/rate field is quoted in the
/// nu convention (the value of omega/2pi, in MHz); lifetimes in us; n_th
/// dimensionless. Builders convert to angular rad/us exactly once.
///
/// chi_bb, chi_ba, f_r and kappa_r are registry metadata: no model rung
/// uses them.
struct SystemParams {
  double f_a = 8038.05;    // cat-qubit mode, pump on
  double f_a0 = 8038.9;    // cat-qubit mode, pump off
  double f_b = 4833.6;     // buffer, pump on
  double f_b0 = 4886.0;    // buffer, pump off
  double f_p = 11242.5;    // pump
  double f_q = 4415.6;     // transmon
  double f_r = 6459.8;     // readout
  double T1_a = 3.0;
  double T1_q = 5.0;
  double T2_q = 8.0;
  double kappa_a = 0.053;
  double kappa_b = 13.0;
  double kappa_r = 1.47;
  double chi_aa = -0.007;
  double chi_bb = -32.0;
  double chi_ba = 0.79;
  double chi_qa = 0.72;
  double chi_qq = 180.0;
  double g2 = 0.36;
  double n_th = 0.01;

  /// Checks positivity of lifetimes and the kappa_a ~ 1/(2 pi T1_a)
  /// consistency (within 5%).
  void validate() const;

  /// Rate-rescaling covariance: multiplies every rate-like field
  /// (kappas, chis, g2) by s and divides lifetimes by s. Dynamics at the
  /// rescaled parameters over times t/s reproduce the original observables.
  SystemParams rescaled(double s) const;

  /// Transmon decay rate in the nu convention: 1/(2 pi T1_q).
  double kappa_q() const { return 1.0 / (kTwoPi * T1_q); }

  std::vector<std::pair<std::string, double>> fields() const;
  void set_field(const std::string& key, double value);  // throws on unknown key
};

SystemParams load_system_params(const std::string& path);
void save_system_params(const SystemParams& p, const std::string& path);

/// Circuit energies in GHz*h; phi_a/phi_b are the modes' zero-point phase
/// fluctuations across the dipole and eps0 the flux-pump amplitude in
/// radians. The defaults reproduce g2 = 0.36 MHz through g2_from_circuit.
struct CircuitParams {
  double E_J = 90.0;
  double dE_J = 0.0;
  double E_Lb = 45.0;
  double E_JL = 225.0;  // one junction of the 5-array; E_JL = 5 E_Lb
  double E_La = 96.6;
  double E_Ca = 0.0927;
  double E_Cb = 0.0735;
  double E_Cc = 0.72;
  double phi_a = 0.02;
  double phi_b = 0.2;
  double eps0 = 0.1;

  void validate() const;  // E_J > 0 and E_JL = 5 E_Lb
  std::vector<std::pair<std::string, double>> fields() const;
  void set_field(const std::string& key, double value);
};

CircuitParams load_circuit_params(const std::string& path);
void save_circuit_params(const CircuitParams& p, const std::string& path);

enum class ModelRung { OneMode, TwoMode, ThreeMode };

ModelRung rung_from_string(const std::string& s);
std::string rung_to_string(ModelRung r);

/// Which model ladder rung to build plus the stabilization target.
/// truncations lists the per-mode dims actually allocated: {N_a} for
/// one_mode, {N_a, N_b} for two_mode, {N_a, N_b, 2} for three_mode.
struct ModelSpec {
  ModelRung rung = ModelRung::OneMode;
  SystemParams params;
  double alpha_sq_target = 2.0;  // alpha taken real >= 0
  std::vector<int> truncations;
  double detuning = 0.0;  // cat-mode detuning (MHz, nu convention)

  void validate() const;
  SpaceSig sig() const;
};

struct ModelOps {
  SpaceSig sig;
  Operator hamiltonian;              // angular units, rad/us
  std::vector<Operator> loss_ops;    // sqrt(rate)-scaled, rad^1/2 us^-1/2
  double kappa2;                     // effective two-photon rate (MHz)
};

/// H = -(chi_aa/2) a^dag2 a^2 (+ detuning n_a), losses {sqrt(kappa_a) a,
/// sqrt(kappa2) (a^2 - alpha^2)} with kappa2 = 4 |g2|^2 / kappa_b.
ModelOps build_one_mode(const ModelSpec& spec);

/// H = g2 (a^2 - alpha^2) b^dag + h.c. - (chi_aa/2) a^dag2 a^2, losses
/// {sqrt(kappa_a) a, sqrt(kappa_b) b}. The buffer drive eps_d = -g2 alpha^2
/// is folded into the coupling term.
ModelOps build_two_mode(const ModelSpec& spec);

/// Two-mode plus the transmon: H -= chi_qa n_a n_q, losses gain
/// {sqrt(kappa_q (1+n_th)) q, sqrt(kappa_q n_th) q^dag}.
ModelOps build_three_mode(const ModelSpec& spec);

ModelOps build_model(const ModelSpec& spec);

// Closed-form calculators. Rates keep the convention of their inputs.
double kappa2_effective(double g2, double kappa_b);
Cplx alpha_sq_from_drive(Cplx eps_d, Cplx g2);
double confinement_rate(double alpha_sq, double kappa2);

/// ATS potential (energy in GHz*h) at phase phi for bias fluxes
/// (phi_sigma, phi_delta). With use_array the quadratic confinement is
/// replaced by the junction-array cosine 5 E_JL (1 - cos(phi/5)), shifted
/// so U(0) matches the quadratic branch at zero phase.
double ats_potential(double phi, double phi_sigma, double phi_delta,
                     const CircuitParams& c, bool use_array = false);

enum class DipoleMode { A, B };

/// Displaced-frame amplitude xi = i (E_J/hbar) eps0 phi / (kappa/2 + i (w0 - wp)).
/// f_mode0, f_pump in MHz; kappa_mode in MHz (nu convention).
Cplx displaced_amplitude(DipoleMode mode, const CircuitParams& c, double f_mode0,
                         double f_pump, double kappa_mode);

/// hbar g2 = E_J eps0 phi_a^2 phi_b / 2, returned in MHz (nu convention).
double g2_from_circuit(const CircuitParams& c);

/// AC-Stark shift hbar Delta = (1/3) E_J phi^2 (Re(xi_b) phi_b + Re(xi_a) phi_a),
/// in MHz.
double stark_shift(DipoleMode mode, const CircuitParams& c, Cplx xi_a, Cplx xi_b);

/// Residuals (f_p - (2 f_a - f_b), f_d - f_b) in MHz; zero means the pump
/// and drive satisfy the frequency-matching condition. f_drive defaults to
/// the buffer frequency when not given.
std::pair<double, double> frequency_match(const SystemParams& p, double f_drive);
std::pair<double, double> frequency_match(const SystemParams& p);

}  // namespace catsim

#endif  // CATSIM_MODELS_HPP
