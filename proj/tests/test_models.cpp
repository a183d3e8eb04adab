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

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "catsim/analysis.hpp"
#include "catsim/lindblad.hpp"
#include "catsim/models.hpp"

using namespace catsim;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = a + (b - a) * i / (n - 1);
  return t;
}

}  // namespace

TEST_CASE("default registry matches the measured device constants") {
  SystemParams p;
  CHECK(p.f_a == 8038.05);
  CHECK(p.f_a0 == 8038.9);
  CHECK(p.f_b == 4833.6);
  CHECK(p.f_b0 == 4886.0);
  CHECK(p.f_p == 11242.5);
  CHECK(p.f_q == 4415.6);
  CHECK(p.f_r == 6459.8);
  CHECK(p.T1_a == 3.0);
  CHECK(p.T1_q == 5.0);
  CHECK(p.T2_q == 8.0);
  CHECK(p.kappa_a == 0.053);
  CHECK(p.kappa_b == 13.0);
  CHECK(p.kappa_r == 1.47);
  CHECK(p.chi_aa == -0.007);
  CHECK(p.chi_bb == -32.0);
  CHECK(p.chi_ba == 0.79);
  CHECK(p.chi_qa == 0.72);
  CHECK(p.chi_qq == 180.0);
  CHECK(p.g2 == 0.36);
  CHECK(p.n_th == 0.01);
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("kappa_a consistency check fires on mismatch") {
  SystemParams p;
  p.kappa_a = 0.08;  // far from 1/(2 pi T1_a)
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("two-photon rate chain") {
  double k2 = kappa2_effective(0.36, 13.0);
  CHECK(std::abs(k2 - 0.04) / 0.04 < 0.02);  // 39.9 kHz vs 40 kHz
  CHECK(k2 == doctest::Approx(0.0398769).epsilon(1e-4));

  // Confinement crosses the loss rate right at alpha^2 ~ 0.66.
  double kc = confinement_rate(0.6625, 0.04);
  CHECK(kc == doctest::Approx(0.053).epsilon(1e-12));

  CHECK(std::abs(alpha_sq_from_drive(Cplx(-0.36 * 4.0, 0.0), Cplx(0.36, 0.0)) -
                 Cplx(4.0, 0.0)) < 1e-12);
  CHECK_THROWS_AS(kappa2_effective(0.36, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(alpha_sq_from_drive(Cplx(1.0, 0.0), Cplx(0.0, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("rate rescaling keeps the registry self-consistent") {
  SystemParams p = SystemParams{}.rescaled(100.0);
  CHECK(p.kappa_a == doctest::Approx(5.3));
  CHECK(p.T1_a == doctest::Approx(0.03));
  CHECK_NOTHROW(p.validate());
  CHECK(kappa2_effective(p.g2, p.kappa_b) ==
        doctest::Approx(100.0 * kappa2_effective(0.36, 13.0)));
}

TEST_CASE("one-mode model") {
  SUBCASE("losses drive any state to vacuum at alpha = 0 with no Kerr") {
    ModelSpec spec;
    spec.rung = ModelRung::OneMode;
    spec.params.chi_aa = 0.0;
    spec.alpha_sq_target = 0.0;
    spec.truncations = {10};
    ModelOps m = build_one_mode(spec);
    DensityMatrix rho = DensityMatrix::from_ket(fock_ket(10, 3));
    SteadyResult steady = relax_to_steady(m.hamiltonian, m.loss_ops, rho, 3000.0, 1e-7);
    CHECK(steady.converged);
    CHECK(steady.state.data(0, 0).real() > 1.0 - 1e-6);
  }
  SUBCASE("even cat is a fixed point without loss and Kerr") {
    ModelSpec spec;
    spec.rung = ModelRung::OneMode;
    spec.params.kappa_a = 0.0;  // loss channel off
    spec.params.chi_aa = 0.0;
    spec.alpha_sq_target = 1.44;
    spec.truncations = {24};
    ModelOps m = build_one_mode(spec);
    DensityMatrix cat =
        DensityMatrix::from_ket(cat_basis_state(24, 1.2, CatKind::Plus));
    Mat drho = liouvillian_apply(m.hamiltonian, m.loss_ops, cat);
    CHECK(drho.cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("truncation rule is enforced at build time") {
    ModelSpec spec;
    spec.rung = ModelRung::OneMode;
    spec.alpha_sq_target = 4.0;
    spec.truncations = {12};  // needs >= 26
    CHECK_THROWS_AS(build_one_mode(spec), std::invalid_argument);
  }
}

TEST_CASE("two-mode model") {
  SUBCASE("g2 = 0 decouples the modes into plain decay") {
    ModelSpec spec;
    spec.rung = ModelRung::TwoMode;
    spec.params.g2 = 0.0;
    spec.params.chi_aa = 0.0;
    spec.alpha_sq_target = 0.0;
    spec.truncations = {10, 3};
    ModelOps m = build_two_mode(spec);
    SpaceSig sig = m.sig;
    Operator n_a = mode_operator(sig, 0, ModeOp::Number);
    DensityMatrix rho =
        DensityMatrix::from_ket(tensor(fock_ket(10, 2), fock_ket(3, 0)));
    EvolutionSpec ev{m.hamiltonian, m.loss_ops, linspace(0.0, 4.0, 9), {{"n_a", n_a}},
                     EvolveTolerances{}};
    TimeSeries ts = evolve(ev, rho);
    double kappa_a_ang = angular(spec.params.kappa_a);
    for (size_t k = 0; k < ts.times.size(); ++k) {
      double expected = 2.0 * std::exp(-kappa_a_ang * ts.times[k]);
      CHECK(std::abs(ts.column("n_a")[k].real() - expected) < 1e-6);
    }
  }
  SUBCASE("buffer stays close to vacuum once the cat is stabilized") {
    ModelSpec spec;
    spec.rung = ModelRung::TwoMode;
    spec.alpha_sq_target = 1.0;
    spec.truncations = {17, 4};
    ModelOps m = build_two_mode(spec);
    DensityMatrix rho = DensityMatrix::from_ket(
        tensor(cat_basis_state(17, 1.0, CatKind::Coherent), fock_ket(4, 0)));
    double kappa_c = angular(confinement_rate(1.0, m.kappa2));
    EvolutionSpec ev{m.hamiltonian, m.loss_ops, {0.0, 8.0 / kappa_c}, {},
                     EvolveTolerances{}};
    TimeSeries ts = evolve(ev, rho);
    SpaceSig sig = m.sig;
    Operator n_b = mode_operator(sig, 1, ModeOp::Number);
    Operator a = mode_operator(sig, 0, ModeOp::Annihilation);
    Operator id(sig, Mat::Identity(sig.total_dim(), sig.total_dim()));
    Operator leak_op = (a * a - spec.alpha_sq_target * id);
    double n_buf = std::real(expectation(ts.final_state, n_b));
    double leak =
        std::real(expectation(ts.final_state, leak_op.adjoint() * leak_op));
    double g2_ang = angular(spec.params.g2);
    double kb_ang = angular(spec.params.kappa_b);
    CHECK(n_buf < 4.0 * g2_ang * g2_ang * leak / (kb_ang * kb_ang) + 1e-9);
  }
  SUBCASE("buffer truncation below 3 is rejected") {
    ModelSpec spec;
    spec.rung = ModelRung::TwoMode;
    spec.alpha_sq_target = 0.0;
    spec.truncations = {10, 2};
    CHECK_THROWS_AS(build_two_mode(spec), std::invalid_argument);
  }
}

TEST_CASE("three-mode model") {
  SUBCASE("chi_qa default is 720 kHz") {
    SystemParams p;
    CHECK(p.chi_qa == doctest::Approx(0.72));
  }
  SUBCASE("ground transmon with n_th = 0 reproduces the two-mode dynamics") {
    ModelSpec spec3;
    spec3.rung = ModelRung::ThreeMode;
    spec3.params.n_th = 0.0;
    spec3.alpha_sq_target = 1.0;
    spec3.truncations = {17, 4, 2};
    ModelOps m3 = build_three_mode(spec3);

    ModelSpec spec2 = spec3;
    spec2.rung = ModelRung::TwoMode;
    spec2.truncations = {17, 4};
    ModelOps m2 = build_two_mode(spec2);

    Ket cat = cat_basis_state(17, 1.0, CatKind::Coherent);
    DensityMatrix rho3 = DensityMatrix::from_ket(
        tensor(tensor(cat, fock_ket(4, 0)), fock_ket(2, 0)));
    DensityMatrix rho2 = DensityMatrix::from_ket(tensor(cat, fock_ket(4, 0)));

    auto grid = linspace(0.0, 3.0, 7);
    EvolutionSpec ev3{m3.hamiltonian, m3.loss_ops, grid,
                      {{"a", mode_operator(m3.sig, 0, ModeOp::Annihilation)}},
                      EvolveTolerances{}};
    EvolutionSpec ev2{m2.hamiltonian, m2.loss_ops, grid,
                      {{"a", mode_operator(m2.sig, 0, ModeOp::Annihilation)}},
                      EvolveTolerances{}};
    TimeSeries ts3 = evolve(ev3, rho3);
    TimeSeries ts2 = evolve(ev2, rho2);
    for (size_t k = 0; k < grid.size(); ++k)
      CHECK(std::abs(ts3.column("a")[k] - ts2.column("a")[k]) < 1e-6);
  }
  SUBCASE("an excited transmon winds the cat phase at chi_qa") {
    ModelSpec spec;
    spec.rung = ModelRung::ThreeMode;
    spec.params.kappa_a = 0.0;
    spec.params.chi_aa = 0.0;
    spec.params.n_th = 0.0;
    spec.params.g2 = 0.0;  // isolate the cross-Kerr rotation
    spec.alpha_sq_target = 1.0;
    spec.truncations = {17, 3, 2};
    ModelOps m = build_three_mode(spec);
    Ket cat = cat_basis_state(17, 1.0, CatKind::Coherent);
    DensityMatrix rho = DensityMatrix::from_ket(
        tensor(tensor(cat, fock_ket(3, 0)), fock_ket(2, 1)));
    auto grid = linspace(0.0, 0.1, 21);
    EvolutionSpec ev{m.hamiltonian, m.loss_ops, grid,
                     {{"a", mode_operator(m.sig, 0, ModeOp::Annihilation)}},
                     EvolveTolerances{}};
    TimeSeries ts = evolve(ev, rho);
    std::vector<double> phases;
    for (const Cplx& v : ts.column("a")) phases.push_back(std::arg(v));
    // Unwrap and regress: slope should be +chi_qa in angular units (the
    // cross-Kerr -chi n_a n_q advances arg<a> for an excited transmon).
    for (size_t k = 1; k < phases.size(); ++k) {
      while (phases[k] - phases[k - 1] > M_PI) phases[k] -= 2.0 * M_PI;
      while (phases[k] - phases[k - 1] < -M_PI) phases[k] += 2.0 * M_PI;
    }
    FitResult line = fit_line(grid, phases);
    double slope = line.param("slope");
    CHECK(std::abs(slope - angular(spec.params.chi_qa)) <
          0.05 * angular(spec.params.chi_qa));
  }
  SUBCASE("transmon truncation must be 2") {
    ModelSpec spec;
    spec.rung = ModelRung::ThreeMode;
    spec.alpha_sq_target = 1.0;
    spec.truncations = {17, 4, 3};
    CHECK_THROWS_AS(build_three_mode(spec), std::invalid_argument);
  }
}

TEST_CASE("model hamiltonians are hermitian and losses carry sqrt(rate)") {
  ModelSpec spec;
  spec.rung = ModelRung::ThreeMode;
  spec.alpha_sq_target = 2.0;
  spec.truncations = {22, 4, 2};
  ModelOps m = build_three_mode(spec);
  CHECK(m.hamiltonian.is_hermitian(1e-12));
  // First loss op is sqrt(kappa_a_angular) a.
  Operator a = mode_operator(m.sig, 0, ModeOp::Annihilation);
  double scale = std::sqrt(angular(spec.params.kappa_a));
  CHECK((m.loss_ops[0].data - scale * a.data).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ats potential") {
  CircuitParams c;
  CHECK_NOTHROW(c.validate());
  SUBCASE("open SQUID leaves the bare inductor") {
    for (double phi : {-1.0, 0.3, 2.0}) {
      double u = ats_potential(phi, M_PI / 2.0, 0.0, c);
      CHECK(std::abs(u - 0.5 * c.E_Lb * phi * phi) < 1e-12);
    }
  }
  SUBCASE("first order in the pump reproduces the sine drive") {
    double eps = 1e-6;
    for (double phi : {-0.8, 0.4, 1.3}) {
      double u = ats_potential(phi, M_PI / 2.0 + eps, M_PI / 2.0, c);
      double expected = 0.5 * c.E_Lb * phi * phi - 2.0 * c.E_J * eps * std::sin(phi);
      CHECK(std::abs(u - expected) < 1e-4 * std::abs(2.0 * c.E_J * eps) + 1e-12);
    }
  }
  SUBCASE("junction array keeps the confinement well above the pump") {
    CHECK(5.0 * c.E_JL > 10.0 * (2.0 * c.E_J * 0.1));
    double u_arr = ats_potential(0.0, M_PI / 2.0, 0.0, c, true);
    double u_quad = ats_potential(0.0, M_PI / 2.0, 0.0, c, false);
    CHECK(u_arr == doctest::Approx(u_quad).epsilon(1e-14));
    // Array confinement matches the quadratic branch at small phase.
    double phi = 0.2;
    CHECK(ats_potential(phi, M_PI / 2.0, 0.0, c, true) ==
          doctest::Approx(ats_potential(phi, M_PI / 2.0, 0.0, c, false)).epsilon(2e-4));
  }
  SUBCASE("junction asymmetry enters through dE_J") {
    CircuitParams asym = c;
    asym.dE_J = 9.0;
    double u = ats_potential(0.5, M_PI / 2.0, M_PI / 2.0, asym);
    double sym = ats_potential(0.5, M_PI / 2.0, M_PI / 2.0, c);
    CHECK(u - sym == doctest::Approx(2.0 * 9.0 * std::sin(0.5 + M_PI / 2.0)).epsilon(1e-10));
  }
}

TEST_CASE("displaced amplitude") {
  CircuitParams c;
  SUBCASE("no pump, no displacement") {
    c.eps0 = 0.0;
    CHECK(std::abs(displaced_amplitude(DipoleMode::B, c, 4886.0, 11242.5, 13.0)) == 0.0);
  }
  SUBCASE("on resonance the displacement is purely imaginary") {
    Cplx xi = displaced_amplitude(DipoleMode::B, c, 11242.5, 11242.5, 13.0);
    CHECK(std::abs(xi.real()) < 1e-12 * std::abs(xi));
    double expected = 2.0 * angular(c.E_J * 1e3) * c.eps0 * c.phi_b / angular(13.0);
    CHECK(xi.imag() == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("modulus falls off with detuning") {
    double d0 = std::abs(displaced_amplitude(DipoleMode::A, c, 8038.9, 8038.9, 1.0));
    double d1 = std::abs(displaced_amplitude(DipoleMode::A, c, 8038.9, 8100.0, 1.0));
    double d2 = std::abs(displaced_amplitude(DipoleMode::A, c, 8038.9, 8500.0, 1.0));
    CHECK(d0 > d1);
    CHECK(d1 > d2);
  }
}

TEST_CASE("g2 and stark shift from circuit parameters") {
  CircuitParams c;
  SUBCASE("defaults reproduce the measured g2 and close the kappa2 chain") {
    double g2 = g2_from_circuit(c);
    CHECK(g2 == doctest::Approx(0.36).epsilon(1e-12));
    CHECK(std::abs(kappa2_effective(g2, 13.0) - 0.04) / 0.04 < 0.02);
  }
  SUBCASE("g2 is linear in the pump amplitude") {
    CircuitParams cc = c;
    cc.eps0 *= 2.0;
    CHECK(g2_from_circuit(cc) == doctest::Approx(2.0 * g2_from_circuit(c)).epsilon(1e-14));
  }
  SUBCASE("phi_a = 0 kills both g2 and the cat Stark shift") {
    CircuitParams cc = c;
    cc.phi_a = 0.0;
    CHECK(g2_from_circuit(cc) == 0.0);
    CHECK(stark_shift(DipoleMode::A, cc, Cplx(0.1, 0.2), Cplx(0.3, -0.1)) == 0.0);
  }
  SUBCASE("stark shift closed form") {
    Cplx xi_a(0.05, 0.3), xi_b(0.21, -0.4);
    double expected = (1.0 / 3.0) * 1e3 * c.E_J * c.phi_b * c.phi_b *
                      (xi_b.real() * c.phi_b + xi_a.real() * c.phi_a);
    CHECK(stark_shift(DipoleMode::B, c, xi_a, xi_b) == doctest::Approx(expected));
  }
}

TEST_CASE("frequency matching") {
  SystemParams p;
  auto [r_pump, r_drive] = frequency_match(p);
  CHECK(std::abs(r_pump) < 1e-6);
  CHECK(r_drive == 0.0);

  SystemParams detuned = p;
  detuned.f_p += 0.5;
  CHECK(frequency_match(detuned).first == doctest::Approx(0.5).epsilon(1e-9));

  CHECK(frequency_match(p, p.f_b + 1.25).second == doctest::Approx(1.25));
}

TEST_CASE("parameter files round trip and reject unknown keys") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "catsim_test_params";
  fs::create_directories(dir);
  fs::path file = dir / "sys.params";

  SystemParams p;
  p.kappa_b = 26.0;
  save_system_params(p, file.string());
  SystemParams q = load_system_params(file.string());
  CHECK(q.kappa_b == 26.0);
  CHECK(q.f_a == p.f_a);

  std::FILE* f = std::fopen(file.string().c_str(), "a");
  std::fputs("nope = 1\n", f);
  std::fclose(f);
  CHECK_THROWS_AS(load_system_params(file.string()), std::invalid_argument);
  fs::remove_all(dir);
}

TEST_CASE("circuit params invariant") {
  CircuitParams c;
  c.E_JL = 200.0;  // breaks E_JL = 5 E_Lb
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
