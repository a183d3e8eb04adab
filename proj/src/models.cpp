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

#include "catsim/models.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace catsim {

void SystemParams::validate() const {
  if (!(T1_a > 0.0) || !(T1_q > 0.0) || !(T2_q > 0.0))
    throw std::invalid_argument("SystemParams: lifetimes must be > 0");
  if (!(kappa_b > 0.0)) throw std::invalid_argument("SystemParams: kappa_b must be > 0");
  if (kappa_a < 0.0) throw std::invalid_argument("SystemParams: kappa_a must be >= 0");
  // kappa_a = 0 switches the loss channel off (used by ideal scenarios);
  // any nonzero value must agree with the lifetime.
  double expected = 1.0 / (kTwoPi * T1_a);
  if (kappa_a > 0.0 && std::abs(kappa_a - expected) > 0.05 * expected)
    throw std::invalid_argument("SystemParams: kappa_a inconsistent with 1/(2 pi T1_a)");
}

SystemParams SystemParams::rescaled(double s) const {
  if (!(s > 0.0)) throw std::invalid_argument("SystemParams::rescaled: s must be > 0");
  SystemParams p = *this;
  p.kappa_a *= s;
  p.kappa_b *= s;
  p.kappa_r *= s;
  p.chi_aa *= s;
  p.chi_bb *= s;
  p.chi_ba *= s;
  p.chi_qa *= s;
  p.chi_qq *= s;
  p.g2 *= s;
  p.T1_a /= s;
  p.T1_q /= s;
  p.T2_q /= s;
  return p;
}

std::vector<std::pair<std::string, double>> SystemParams::fields() const {
  return {{"f_a", f_a},         {"f_a0", f_a0},       {"f_b", f_b},
          {"f_b0", f_b0},       {"f_p", f_p},         {"f_q", f_q},
          {"f_r", f_r},         {"T1_a", T1_a},       {"T1_q", T1_q},
          {"T2_q", T2_q},       {"kappa_a", kappa_a}, {"kappa_b", kappa_b},
          {"kappa_r", kappa_r}, {"chi_aa", chi_aa},   {"chi_bb", chi_bb},
          {"chi_ba", chi_ba},   {"chi_qa", chi_qa},   {"chi_qq", chi_qq},
          {"g2", g2},           {"n_th", n_th}};
}

void SystemParams::set_field(const std::string& key, double value) {
  if (key == "f_a") f_a = value;
  else if (key == "f_a0") f_a0 = value;
  else if (key == "f_b") f_b = value;
  else if (key == "f_b0") f_b0 = value;
  else if (key == "f_p") f_p = value;
  else if (key == "f_q") f_q = value;
  else if (key == "f_r") f_r = value;
  else if (key == "T1_a") T1_a = value;
  else if (key == "T1_q") T1_q = value;
  else if (key == "T2_q") T2_q = value;
  else if (key == "kappa_a") kappa_a = value;
  else if (key == "kappa_b") kappa_b = value;
  else if (key == "kappa_r") kappa_r = value;
  else if (key == "chi_aa") chi_aa = value;
  else if (key == "chi_bb") chi_bb = value;
  else if (key == "chi_ba") chi_ba = value;
  else if (key == "chi_qa") chi_qa = value;
  else if (key == "chi_qq") chi_qq = value;
  else if (key == "g2") g2 = value;
  else if (key == "n_th") n_th = value;
  else throw std::invalid_argument("SystemParams: unknown key '" + key + "'");
}

void CircuitParams::validate() const {
  if (!(E_J > 0.0)) throw std::invalid_argument("CircuitParams: E_J must be > 0");
  if (std::abs(E_JL - 5.0 * E_Lb) > 1e-9 * std::abs(E_JL))
    throw std::invalid_argument("CircuitParams: E_JL must equal 5 E_Lb");
}

std::vector<std::pair<std::string, double>> CircuitParams::fields() const {
  return {{"E_J", E_J},     {"dE_J", dE_J},   {"E_Lb", E_Lb}, {"E_JL", E_JL},
          {"E_La", E_La},   {"E_Ca", E_Ca},   {"E_Cb", E_Cb}, {"E_Cc", E_Cc},
          {"phi_a", phi_a}, {"phi_b", phi_b}, {"eps0", eps0}};
}

void CircuitParams::set_field(const std::string& key, double value) {
  if (key == "E_J") E_J = value;
  else if (key == "dE_J") dE_J = value;
  else if (key == "E_Lb") E_Lb = value;
  else if (key == "E_JL") E_JL = value;
  else if (key == "E_La") E_La = value;
  else if (key == "E_Ca") E_Ca = value;
  else if (key == "E_Cb") E_Cb = value;
  else if (key == "E_Cc") E_Cc = value;
  else if (key == "phi_a") phi_a = value;
  else if (key == "phi_b") phi_b = value;
  else if (key == "eps0") eps0 = value;
  else throw std::invalid_argument("CircuitParams: unknown key '" + key + "'");
}

namespace {

// Flat `key = value` file, one pair per line, '#' comments.
template <typename P>
P load_flat_params(const std::string& path, const char* what) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument(std::string(what) + ": cannot open " + path);
  P p;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key, eq;
    double value;
    if (!(ls >> key)) continue;  // blank
    if (!(ls >> eq >> value) || eq != "=")
      throw std::invalid_argument(std::string(what) + ": parse error at " + path + ":" +
                                  std::to_string(lineno));
    p.set_field(key, value);
  }
  return p;
}

template <typename P>
void save_flat_params(const P& p, const std::string& path, const char* what) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error(std::string(what) + ": cannot open " + path);
  char buf[64];
  for (const auto& [key, value] : p.fields()) {
    std::snprintf(buf, sizeof buf, "%.17g", value);
    f << key << " = " << buf << "\n";
  }
}

}  // namespace

SystemParams load_system_params(const std::string& path) {
  return load_flat_params<SystemParams>(path, "system params");
}
void save_system_params(const SystemParams& p, const std::string& path) {
  save_flat_params(p, path, "system params");
}
CircuitParams load_circuit_params(const std::string& path) {
  return load_flat_params<CircuitParams>(path, "circuit params");
}
void save_circuit_params(const CircuitParams& p, const std::string& path) {
  save_flat_params(p, path, "circuit params");
}

ModelRung rung_from_string(const std::string& s) {
  if (s == "one_mode") return ModelRung::OneMode;
  if (s == "two_mode") return ModelRung::TwoMode;
  if (s == "three_mode") return ModelRung::ThreeMode;
  throw std::invalid_argument("unknown model rung '" + s + "'");
}

std::string rung_to_string(ModelRung r) {
  switch (r) {
    case ModelRung::OneMode: return "one_mode";
    case ModelRung::TwoMode: return "two_mode";
    case ModelRung::ThreeMode: return "three_mode";
  }
  return "?";
}

void ModelSpec::validate() const {
  params.validate();
  if (!(alpha_sq_target >= 0.0))
    throw std::invalid_argument("ModelSpec: alpha_sq_target must be >= 0");
  size_t need = rung == ModelRung::OneMode ? 1 : rung == ModelRung::TwoMode ? 2 : 3;
  if (truncations.size() != need)
    throw std::invalid_argument("ModelSpec: rung " + rung_to_string(rung) + " needs " +
                                std::to_string(need) + " truncations");
  double alpha = std::sqrt(alpha_sq_target);
  if (truncations[0] < min_truncation(alpha))
    throw std::invalid_argument("ModelSpec: cat truncation " + std::to_string(truncations[0]) +
                                " below rule for alpha^2 = " + std::to_string(alpha_sq_target) +
                                " (need >= " + std::to_string(min_truncation(alpha)) + ")");
  if (rung != ModelRung::OneMode && truncations[1] < 3)
    throw std::invalid_argument("ModelSpec: buffer truncation must be >= 3");
  if (rung == ModelRung::ThreeMode && truncations[2] != 2)
    throw std::invalid_argument("ModelSpec: transmon dim must be 2");
}

SpaceSig ModelSpec::sig() const { return SpaceSig(truncations); }

namespace {

Operator scaled_loss(double rate_nu, const Operator& op) {
  return std::sqrt(angular(rate_nu)) * op;
}

}  // namespace

ModelOps build_one_mode(const ModelSpec& spec) {
  if (spec.rung != ModelRung::OneMode)
    throw std::invalid_argument("build_one_mode: wrong rung");
  spec.validate();
  const SystemParams& p = spec.params;
  SpaceSig sig = spec.sig();

  Operator a = mode_operator(sig, 0, ModeOp::Annihilation);
  Operator ad = a.adjoint();
  Operator id = mode_operator(sig, 0, ModeOp::Identity);

  Operator h = (-0.5 * angular(p.chi_aa)) * (ad * ad * a * a);
  if (spec.detuning != 0.0) h = h + angular(spec.detuning) * (ad * a);

  double kappa2 = kappa2_effective(p.g2, p.kappa_b);
  Operator l2 = a * a - spec.alpha_sq_target * id;

  ModelOps out;
  out.sig = sig;
  out.hamiltonian = std::move(h);
  out.hamiltonian.require_hermitian();
  if (p.kappa_a > 0.0) out.loss_ops.push_back(scaled_loss(p.kappa_a, a));
  if (kappa2 > 0.0) out.loss_ops.push_back(scaled_loss(kappa2, l2));
  out.kappa2 = kappa2;
  return out;
}

ModelOps build_two_mode(const ModelSpec& spec) {
  if (spec.rung != ModelRung::TwoMode)
    throw std::invalid_argument("build_two_mode: wrong rung");
  spec.validate();
  const SystemParams& p = spec.params;
  SpaceSig sig = spec.sig();

  Operator a = mode_operator(sig, 0, ModeOp::Annihilation);
  Operator ad = a.adjoint();
  Operator b = mode_operator(sig, 1, ModeOp::Annihilation);
  Operator id = mode_operator(sig, 0, ModeOp::Identity);

  Operator exch = (a * a - spec.alpha_sq_target * id) * b.adjoint();
  Operator h = angular(p.g2) * (exch + exch.adjoint()) -
               (0.5 * angular(p.chi_aa)) * (ad * ad * a * a);
  if (spec.detuning != 0.0) h = h + angular(spec.detuning) * (ad * a);

  ModelOps out;
  out.sig = sig;
  out.hamiltonian = std::move(h);
  out.hamiltonian.require_hermitian();
  if (p.kappa_a > 0.0) out.loss_ops.push_back(scaled_loss(p.kappa_a, a));
  out.loss_ops.push_back(scaled_loss(p.kappa_b, b));
  out.kappa2 = kappa2_effective(p.g2, p.kappa_b);
  return out;
}

ModelOps build_three_mode(const ModelSpec& spec) {
  if (spec.rung != ModelRung::ThreeMode)
    throw std::invalid_argument("build_three_mode: wrong rung");
  spec.validate();
  const SystemParams& p = spec.params;
  SpaceSig sig = spec.sig();

  Operator a = mode_operator(sig, 0, ModeOp::Annihilation);
  Operator ad = a.adjoint();
  Operator b = mode_operator(sig, 1, ModeOp::Annihilation);
  Operator q = mode_operator(sig, 2, ModeOp::Annihilation);
  Operator n_a = mode_operator(sig, 0, ModeOp::Number);
  Operator n_q = mode_operator(sig, 2, ModeOp::Number);
  Operator id = mode_operator(sig, 0, ModeOp::Identity);

  Operator exch = (a * a - spec.alpha_sq_target * id) * b.adjoint();
  Operator h = angular(p.g2) * (exch + exch.adjoint()) -
               (0.5 * angular(p.chi_aa)) * (ad * ad * a * a) -
               angular(p.chi_qa) * (n_a * n_q);
  if (spec.detuning != 0.0) h = h + angular(spec.detuning) * n_a;

  ModelOps out;
  out.sig = sig;
  out.hamiltonian = std::move(h);
  out.hamiltonian.require_hermitian();
  if (p.kappa_a > 0.0) out.loss_ops.push_back(scaled_loss(p.kappa_a, a));
  out.loss_ops.push_back(scaled_loss(p.kappa_b, b));
  out.loss_ops.push_back(scaled_loss(p.kappa_q() * (1.0 + p.n_th), q));
  if (p.n_th > 0.0) out.loss_ops.push_back(scaled_loss(p.kappa_q() * p.n_th, q.adjoint()));
  out.kappa2 = kappa2_effective(p.g2, p.kappa_b);
  return out;
}

ModelOps build_model(const ModelSpec& spec) {
  switch (spec.rung) {
    case ModelRung::OneMode: return build_one_mode(spec);
    case ModelRung::TwoMode: return build_two_mode(spec);
    case ModelRung::ThreeMode: return build_three_mode(spec);
  }
  throw std::invalid_argument("build_model: invalid rung");
}

double kappa2_effective(double g2, double kappa_b) {
  if (!(kappa_b > 0.0)) throw std::invalid_argument("kappa2_effective: kappa_b must be > 0");
  return 4.0 * g2 * g2 / kappa_b;
}

Cplx alpha_sq_from_drive(Cplx eps_d, Cplx g2) {
  if (g2 == Cplx(0.0, 0.0))
    throw std::invalid_argument("alpha_sq_from_drive: g2 must be nonzero");
  return -eps_d / std::conj(g2);
}

double confinement_rate(double alpha_sq, double kappa2) { return 2.0 * alpha_sq * kappa2; }

double ats_potential(double phi, double phi_sigma, double phi_delta,
                     const CircuitParams& c, bool use_array) {
  double confine = use_array ? 5.0 * c.E_JL * (1.0 - std::cos(phi / 5.0))
                             : 0.5 * c.E_Lb * phi * phi;
  return confine - 2.0 * c.E_J * std::cos(phi_sigma) * std::cos(phi + phi_delta) +
         2.0 * c.dE_J * std::sin(phi_sigma) * std::sin(phi + phi_delta);
}

Cplx displaced_amplitude(DipoleMode mode, const CircuitParams& c, double f_mode0,
                         double f_pump, double kappa_mode) {
  if (!(kappa_mode > 0.0))
    throw std::invalid_argument("displaced_amplitude: kappa_mode must be > 0");
  double phi = (mode == DipoleMode::A) ? c.phi_a : c.phi_b;
  double ej_ang = angular(c.E_J * 1e3);  // GHz*h -> rad/us
  Cplx num(0.0, ej_ang * c.eps0 * phi);
  Cplx den(angular(kappa_mode) / 2.0, angular(f_mode0) - angular(f_pump));
  return num / den;
}

double g2_from_circuit(const CircuitParams& c) {
  return 1e3 * c.E_J * c.eps0 * c.phi_a * c.phi_a * c.phi_b / 2.0;  // MHz
}

double stark_shift(DipoleMode mode, const CircuitParams& c, Cplx xi_a, Cplx xi_b) {
  double phi = (mode == DipoleMode::A) ? c.phi_a : c.phi_b;
  return (1.0 / 3.0) * 1e3 * c.E_J * phi * phi *
         (xi_b.real() * c.phi_b + xi_a.real() * c.phi_a);  // MHz
}

std::pair<double, double> frequency_match(const SystemParams& p, double f_drive) {
  return {p.f_p - (2.0 * p.f_a - p.f_b), f_drive - p.f_b};
}

std::pair<double, double> frequency_match(const SystemParams& p) {
  return frequency_match(p, p.f_b);
}

}  // namespace catsim
