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

#include <nlohmann/json.hpp>

#include "catsim/hilbert.hpp"

using namespace catsim;

TEST_CASE("space sig basics") {
  SpaceSig sig({3, 2});
  CHECK(sig.total_dim() == 6);
  CHECK(sig.num_modes() == 2);
  CHECK(sig.stride(0) == 2);
  CHECK(sig.stride(1) == 1);
  CHECK_THROWS_AS(SpaceSig({3, 0}), std::invalid_argument);
  CHECK_THROWS_AS(SpaceSig(std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("annihilation operator in the Fock basis") {
  Operator a = mode_operator(SpaceSig({3}), 0, ModeOp::Annihilation);
  CHECK(a.data(0, 1).real() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a.data(1, 2).real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  double off = std::abs(a.data(0, 0)) + std::abs(a.data(1, 0)) + std::abs(a.data(2, 0)) +
               std::abs(a.data(1, 1)) + std::abs(a.data(2, 1)) + std::abs(a.data(0, 2)) +
               std::abs(a.data(2, 2));
  CHECK(off == 0.0);
}

TEST_CASE("parity eigenvalue on |1>") {
  SpaceSig sig({4});
  Operator parity = mode_operator(sig, 0, ModeOp::Parity);
  Ket one = fock_ket(4, 1);
  CHECK(std::real(expectation(one, parity)) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("tensor embedding of the number operator") {
  SpaceSig sig({3, 2});
  Operator n1 = mode_operator(sig, 1, ModeOp::Number);
  Ket psi = tensor(fock_ket(3, 0), fock_ket(2, 1));
  CHECK(std::real(expectation(psi, n1)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("mode_operator rejects bad modes") {
  SpaceSig sig({3});
  CHECK_THROWS_AS(mode_operator(sig, 1, ModeOp::Number), std::invalid_argument);
  CHECK_THROWS_AS(mode_operator(sig, -1, ModeOp::Number), std::invalid_argument);
}

TEST_CASE("commutator [a, a^dag] = 1 below the truncation edge") {
  const int n = 24;
  SpaceSig sig({n});
  Operator a = mode_operator(sig, 0, ModeOp::Annihilation);
  Mat comm = a.data * a.data.adjoint() - a.data.adjoint() * a.data;
  Mat dev = comm - Mat::Identity(n, n);
  CHECK(dev.topLeftCorner(n - 1, n - 1).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("parity anticommutes with a") {
  const int n = 20;
  SpaceSig sig({n});
  Operator a = mode_operator(sig, 0, ModeOp::Annihilation);
  Operator p = mode_operator(sig, 0, ModeOp::Parity);
  Mat anti = p.data * a.data + a.data * p.data;
  CHECK(anti.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("operators on disjoint modes commute exactly") {
  SpaceSig sig({4, 3});
  Operator a0 = mode_operator(sig, 0, ModeOp::Annihilation);
  Operator n1 = mode_operator(sig, 1, ModeOp::Number);
  Mat comm = a0.data * n1.data - n1.data * a0.data;
  CHECK(comm.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("displacement at beta = 0 is the identity") {
  SpaceSig sig({12});
  Operator d = displacement(sig, 0, 0.0);
  CHECK((d.data - Mat::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("displaced vacuum matches analytic coherent amplitudes") {
  // Oracle: the closed-form Fock amplitudes, computed here from scratch.
  const int n = 25;
  const Cplx beta(1.5, 0.0);
  SpaceSig sig({n});
  Operator d = displacement(sig, 0, beta);
  Vec displaced = d.data.col(0);  // D(beta)|0>
  Vec expected(n);
  for (int k = 0; k < n; ++k)
    expected(k) = std::exp(-0.5 * std::norm(beta)) * std::pow(beta, k) /
                  std::sqrt(std::tgamma(static_cast<double>(k) + 1.0));
  Cplx overlap = expected.dot(displaced);
  CHECK(std::norm(overlap) > 1.0 - 1e-8);
}

TEST_CASE("displacement inverse pairs to identity") {
  const int n = 40;
  SpaceSig sig({n});
  Operator d = displacement(sig, 0, Cplx(2.0, 0.0));
  Operator dinv = displacement(sig, 0, Cplx(-2.0, 0.0));
  Mat dev = d.data * dinv.data - Mat::Identity(n, n);
  CHECK(dev.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("displacement rejects too-small truncations") {
  SpaceSig sig({10});
  CHECK_THROWS_AS(displacement(sig, 0, Cplx(2.0, 0.0)), std::invalid_argument);
}

TEST_CASE("cat states") {
  SUBCASE("plus cat at alpha = 0 is the vacuum") {
    Ket psi = cat_basis_state(12, 0.0, CatKind::Plus);
    CHECK(std::abs(psi.amplitudes(0)) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("even cat has parity exactly +1") {
    SpaceSig sig({28});
    Ket plus = cat_basis_state(28, 2.0, CatKind::Plus);
    Operator parity = mode_operator(sig, 0, ModeOp::Parity);
    CHECK(std::real(expectation(plus, parity)) == doctest::Approx(1.0).epsilon(1e-14));
    Ket minus = cat_basis_state(28, 2.0, CatKind::Minus);
    CHECK(std::real(expectation(minus, parity)) == doctest::Approx(-1.0).epsilon(1e-14));
  }
  SUBCASE("computational cat carries ~|alpha|^2 photons") {
    SpaceSig sig({28});
    Ket zero = cat_basis_state(28, 2.0, CatKind::Zero);
    Operator num = mode_operator(sig, 0, ModeOp::Number);
    double n_mean = std::real(expectation(zero, num));
    CHECK(std::abs(n_mean - 4.0) / 4.0 < 3.4e-4);
  }
  SUBCASE("odd cat rejects alpha = 0") {
    CHECK_THROWS_AS(cat_basis_state(12, 0.0, CatKind::Minus), std::invalid_argument);
  }
  SUBCASE("cat-basis kets are orthonormal for alpha > 0") {
    for (double alpha : {0.5, 1.0, 2.0, 3.0}) {
      int n = min_truncation(alpha) + 2;
      Ket zero = cat_basis_state(n, alpha, CatKind::Zero);
      Ket one = cat_basis_state(n, alpha, CatKind::One);
      CHECK(std::abs(zero.amplitudes.dot(one.amplitudes)) < 1e-12);
      CHECK(std::abs(zero.amplitudes.norm() - 1.0) < 1e-12);
      CHECK(std::abs(one.amplitudes.norm() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("expectation values") {
  SUBCASE("vacuum photon number is zero") {
    SpaceSig sig({5});
    DensityMatrix rho = DensityMatrix::from_ket(fock_ket(5, 0));
    CHECK(std::abs(expectation(rho, mode_operator(sig, 0, ModeOp::Number))) < 1e-15);
  }
  SUBCASE("coherent state is an eigenstate of a") {
    const int n = 25;
    SpaceSig sig({n});
    Ket alpha = cat_basis_state(n, 1.5, CatKind::Coherent);
    DensityMatrix rho = DensityMatrix::from_ket(alpha);
    Cplx a_mean = expectation(rho, mode_operator(sig, 0, ModeOp::Annihilation));
    CHECK(std::abs(a_mean - Cplx(1.5, 0.0)) < 1e-8);
  }
  SUBCASE("maximally mixed qubit has zero parity") {
    SpaceSig sig({2});
    DensityMatrix rho(sig, 0.5 * Mat::Identity(2, 2));
    CHECK(std::abs(expectation(rho, mode_operator(sig, 0, ModeOp::Parity))) < 1e-15);
  }
  SUBCASE("sig mismatch throws") {
    DensityMatrix rho = DensityMatrix::from_ket(fock_ket(5, 0));
    CHECK_THROWS_AS(expectation(rho, mode_operator(SpaceSig({6}), 0, ModeOp::Number)),
                    std::invalid_argument);
  }
}

TEST_CASE("partial trace reduces a product state to its factor") {
  Ket cat = cat_basis_state(20, 1.2, CatKind::Plus);
  Ket buf = cat_basis_state(13, 0.4, CatKind::Coherent);
  DensityMatrix joint = DensityMatrix::from_ket(tensor(cat, buf));
  DensityMatrix red0 = partial_trace(joint, 0);
  DensityMatrix red1 = partial_trace(joint, 1);
  Mat expect0 = cat.amplitudes * cat.amplitudes.adjoint();
  Mat expect1 = buf.amplitudes * buf.amplitudes.adjoint();
  CHECK((red0.data - expect0).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((red1.data - expect1).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(red0.data.trace() - Cplx(1.0, 0.0)) < 1e-14);
}

TEST_CASE("density matrix validation catches bad states") {
  SpaceSig sig({3});
  Mat bad = Mat::Identity(3, 3);  // trace 3
  CHECK_THROWS_AS(DensityMatrix(sig, bad).validate(), NumericError);
  Mat neg = Mat::Zero(3, 3);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityMatrix(sig, neg).validate(), NumericError);
}

TEST_CASE("json round trip preserves states and operators") {
  Operator a = mode_operator(SpaceSig({4, 2}), 0, ModeOp::Annihilation);
  nlohmann::json ja = a;
  Operator a2 = ja.get<Operator>();
  CHECK(a2.sig == a.sig);
  CHECK((a2.data - a.data).cwiseAbs().maxCoeff() == 0.0);

  Ket cat = cat_basis_state(20, Cplx(1.0, 0.7), CatKind::Plus);
  nlohmann::json jk = cat;
  Ket cat2 = jk.get<Ket>();
  CHECK((cat2.amplitudes - cat.amplitudes).cwiseAbs().maxCoeff() < 1e-15);

  DensityMatrix rho = DensityMatrix::from_ket(cat);
  nlohmann::json jr = rho;
  DensityMatrix rho2 = jr.get<DensityMatrix>();
  CHECK((rho2.data - rho.data).cwiseAbs().maxCoeff() < 1e-15);

  // Kind/dims mismatches are rejected.
  nlohmann::json wrong = jr;
  wrong["kind"] = "ket";
  CHECK_THROWS(wrong.get<Ket>());
}

TEST_CASE("hermitian flag verification") {
  SpaceSig sig({3});
  Operator n = mode_operator(sig, 0, ModeOp::Number);
  CHECK(n.is_hermitian());
  CHECK_NOTHROW(n.require_hermitian());
  Operator a = mode_operator(sig, 0, ModeOp::Annihilation);
  CHECK(!a.is_hermitian());
  CHECK_THROWS_AS(a.require_hermitian(), NumericError);
}
