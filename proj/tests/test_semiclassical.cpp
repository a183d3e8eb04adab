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
#include <sstream>

#include "catsim/semiclassical.hpp"
#include "catsim/types.hpp"
#include "support/oracles.hpp"

using namespace catsim;

TEST_CASE("wells are stationary points of the flow") {
  FieldParams fp{1.0, 2.0, 0.0, 0.0};
  Velocity v = velocity({2.0, 0.0}, fp);
  CHECK(std::abs(v.vx) < 1e-15);
  CHECK(std::abs(v.vy) < 1e-15);
}

TEST_CASE("loss shifts the wells to sqrt(3.5)") {
  FieldParams fp{1.0, 2.0, 1.0, 0.0};  // kappa_a = kappa2, alpha = 2
  double root = std::sqrt(3.5);
  for (double sgn : {-1.0, 1.0}) {
    Velocity v = velocity({sgn * root, 0.0}, fp);
    CHECK(std::abs(v.vx) < 1e-12);
    CHECK(std::abs(v.vy) < 1e-12);
  }
  CHECK(metastable_amplitude(fp) * metastable_amplitude(fp) ==
        doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("curl of the flow is -2 delta") {
  FieldParams fp{0.7, 1.5, 0.4, 0.0};
  SUBCASE("irrotational without detuning") { fp.delta = 0.0; }
  SUBCASE("rotational with detuning") { fp.delta = 0.9; }
  const double h = 1e-5;
  for (double x : {-1.7, 0.2, 2.3}) {
    for (double y : {-0.8, 0.4, 1.9}) {
      double dvy_dx =
          (velocity({x + h, y}, fp).vy - velocity({x - h, y}, fp).vy) / (2.0 * h);
      double dvx_dy =
          (velocity({x, y + h}, fp).vx - velocity({x, y - h}, fp).vx) / (2.0 * h);
      CHECK(std::abs((dvy_dx - dvx_dy) - (-2.0 * fp.delta)) < 1e-6);
    }
  }
}

TEST_CASE("minus grad V reproduces the velocity field") {
  // Finite-difference oracle on a 21x21 grid over [-3,3]^2.
  FieldParams fp{1.0, 2.0, 1.0, 0.0};
  auto pot = [&](double x, double y) { return pseudo_potential({x, y}, fp); };
  for (int i = 0; i < 21; ++i) {
    for (int j = 0; j < 21; ++j) {
      double x = -3.0 + 6.0 * i / 20.0;
      double y = -3.0 + 6.0 * j / 20.0;
      auto [gx, gy] = testing::fd_gradient(pot, x, y);
      Velocity v = velocity({x, y}, fp);
      CHECK(std::abs(v.vx + gx) < 1e-6);
      CHECK(std::abs(v.vy + gy) < 1e-6);
    }
  }
}

TEST_CASE("potential minima sit at +-alpha without loss") {
  FieldParams fp{1.3, 2.0, 0.0, 0.0};
  auto pot = [&](double x, double y) { return pseudo_potential({x, y}, fp); };
  for (double sgn : {-1.0, 1.0}) {
    auto [gx, gy] = testing::fd_gradient(pot, sgn * fp.alpha, 0.0);
    CHECK(std::abs(gx) < 1e-8);
    CHECK(std::abs(gy) < 1e-8);
    // Hessian via finite differences: positive definite at the wells.
    const double h = 1e-4;
    double vxx = (pot(sgn * fp.alpha + h, 0.0) - 2.0 * pot(sgn * fp.alpha, 0.0) +
                  pot(sgn * fp.alpha - h, 0.0)) /
                 (h * h);
    double vyy = (pot(sgn * fp.alpha, h) - 2.0 * pot(sgn * fp.alpha, 0.0) +
                  pot(sgn * fp.alpha, -h)) /
                 (h * h);
    CHECK(vxx > 0.0);
    CHECK(vyy > 0.0);
  }
}

TEST_CASE("potential has inversion symmetry") {
  FieldParams fp{0.9, 1.7, 0.5, 0.0};
  for (double x : {-2.2, 0.3, 1.4})
    for (double y : {-1.1, 0.8, 2.6})
      CHECK(pseudo_potential({x, y}, fp) ==
            doctest::Approx(pseudo_potential({-x, -y}, fp)).epsilon(1e-14));
}

TEST_CASE("potential rejects rotational fields") {
  FieldParams fp{1.0, 2.0, 0.0, 0.3};
  CHECK_THROWS_AS(pseudo_potential({1.0, 0.0}, fp), std::invalid_argument);
}

TEST_CASE("linearized decay at the wells is the confinement rate") {
  FieldParams fp{0.8, 1.9, 0.0, 0.0};
  double kc = fp.confinement_rate();
  const double h = 1e-6;
  for (double sgn : {-1.0, 1.0}) {
    double x0 = sgn * fp.alpha;
    double jxx = (velocity({x0 + h, 0.0}, fp).vx - velocity({x0 - h, 0.0}, fp).vx) / (2 * h);
    double jxy = (velocity({x0, h}, fp).vx - velocity({x0, -h}, fp).vx) / (2 * h);
    double jyx = (velocity({x0 + h, 0.0}, fp).vy - velocity({x0 - h, 0.0}, fp).vy) / (2 * h);
    double jyy = (velocity({x0, h}, fp).vy - velocity({x0, -h}, fp).vy) / (2 * h);
    CHECK(std::abs(jxx + kc) < 1e-6);
    CHECK(std::abs(jyy + kc) < 1e-6);
    CHECK(std::abs(jxy) < 1e-6);
    CHECK(std::abs(jyx) < 1e-6);
  }
}

TEST_CASE("metastable direction slope") {
  SUBCASE("approaches zero with vanishing detuning") {
    CHECK(std::abs(lambda_direction(2.0, 1e-7)) < 1e-6);
  }
  SUBCASE("hits -1 at the threshold") {
    CHECK(lambda_direction(2.0, 1.0) == doctest::Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("the two quadratic roots multiply to one") {
    double kc = 2.0, delta = 0.6;
    double u = kc / (2.0 * delta);
    double lam = lambda_direction(kc, delta);
    double lam2 = -u - std::sqrt(u * u - 1.0);
    CHECK(lam * lam2 == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("no metastable direction past threshold") {
    CHECK_THROWS_AS(lambda_direction(2.0, 1.1), std::invalid_argument);
  }
}

TEST_CASE("detuned cut potential minima match the metastable amplitude") {
  FieldParams fp{1.0, 1.6, 0.0, 0.8};
  double ainf = metastable_amplitude(fp);
  CHECK(ainf > 0.0);
  auto pot = [&](double b) { return detuned_cut_potential(b, fp); };
  const double h = 1e-6;
  double grad = (pot(ainf + h) - pot(ainf - h)) / (2.0 * h);
  CHECK(std::abs(grad) < 1e-8);
  double curv = (pot(ainf + h) - 2.0 * pot(ainf) + pot(ainf - h)) / (h * h);
  CHECK(curv > 0.0);
}

TEST_CASE("metastable amplitude branches") {
  SUBCASE("loss branch closed form") {
    FieldParams fp{1.0, std::sqrt(2.0), 1.0, 0.0};
    CHECK(metastable_amplitude(fp) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-12));
  }
  SUBCASE("detuning beyond threshold collapses the wells") {
    // kappa2/2pi = 40 kHz, Delta/2pi = 720 kHz, alpha^2 = 7: the detuning
    // exceeds kappa_c/2 ~ 2pi*280 kHz, so no metastable state survives.
    FieldParams fp{angular(0.04), std::sqrt(7.0), 0.0, angular(0.72)};
    CHECK(metastable_amplitude(fp) == 0.0);
  }
  SUBCASE("unperturbed wells sit at alpha") {
    FieldParams fp{2.0, 1.3, 0.0, 0.0};
    CHECK(metastable_amplitude(fp) == doctest::Approx(1.3).epsilon(1e-15));
  }
  SUBCASE("thresholds are exact") {
    FieldParams loss{1.0, 1.5, 2.0 * 1.0 * 2.25, 0.0};  // kappa_a = kappa_c
    CHECK(metastable_amplitude(loss) == 0.0);
    FieldParams det{1.0, 1.5, 0.0, 2.25};  // delta = kappa2 alpha^2
    CHECK(metastable_amplitude(det) == 0.0);
  }
  SUBCASE("combined perturbations are rejected") {
    FieldParams fp{1.0, 2.0, 0.5, 0.5};
    CHECK_THROWS_AS(metastable_amplitude(fp), std::invalid_argument);
  }
}

TEST_CASE("grid export") {
  SUBCASE("resolution 2 samples the corners") {
    FieldParams fp{1.0, 2.0, 0.0, 0.0};
    FieldGrid g = grid_export(fp, {-3.0, 3.0, -3.0, 3.0}, 2);
    REQUIRE(g.x.size() == 4);
    CHECK(g.x[0] == -3.0);
    CHECK(g.y[0] == -3.0);
    CHECK(g.x[3] == 3.0);
    CHECK(g.y[3] == 3.0);
    CHECK(g.has_potential);
  }
  SUBCASE("inversion symmetry of sampled values") {
    FieldParams fp{1.0, 1.8, 0.7, 0.0};
    int res = 11;
    FieldGrid g = grid_export(fp, {-2.5, 2.5, -2.5, 2.5}, res);
    auto at = [&](int i, int j) { return static_cast<size_t>(i) * res + j; };
    for (int i = 0; i < res; ++i)
      for (int j = 0; j < res; ++j) {
        size_t a = at(i, j), b = at(res - 1 - i, res - 1 - j);
        CHECK(g.speed[a] == doctest::Approx(g.speed[b]).epsilon(1e-12));
        CHECK(g.vx[a] == doctest::Approx(-g.vx[b]).epsilon(1e-12));
      }
  }
  SUBCASE("speed minima coincide with the fixed points") {
    // Numeric oracle: scan a fine grid for local speed minima and compare
    // against the analytic stationary points (+-sqrt(3.5), 0) and (0,0).
    FieldParams fp{1.0, 2.0, 1.0, 0.0};
    int res = 241;
    FieldGrid g = grid_export(fp, {-3.0, 3.0, -3.0, 3.0}, res);
    auto at = [&](int i, int j) { return static_cast<size_t>(i) * res + j; };
    std::vector<std::pair<double, double>> minima;
    for (int i = 1; i + 1 < res; ++i)
      for (int j = 1; j + 1 < res; ++j) {
        double s = g.speed[at(i, j)];
        bool is_min = true;
        for (int di = -1; di <= 1 && is_min; ++di)
          for (int dj = -1; dj <= 1; ++dj)
            if ((di || dj) && g.speed[at(i + di, j + dj)] <= s) {
              is_min = false;
              break;
            }
        if (is_min) minima.emplace_back(g.x[at(i, j)], g.y[at(i, j)]);
      }
    REQUIRE(minima.size() == 3);
    double root = std::sqrt(3.5);
    double spacing = 6.0 / (res - 1);
    for (auto& [mx, my] : minima) {
      double best = std::min({std::hypot(mx - root, my), std::hypot(mx + root, my),
                              std::hypot(mx, my)});
      CHECK(best < spacing);
    }
  }
  SUBCASE("csv header carries the potential only when defined") {
    FieldParams det{1.0, 2.0, 0.0, 0.5};
    FieldGrid g = grid_export(det, {-1.0, 1.0, -1.0, 1.0}, 3);
    CHECK(!g.has_potential);
    std::ostringstream os;
    g.write_csv(os);
    CHECK(os.str().rfind("x,y,vx,vy,speed\n", 0) == 0);
  }
  SUBCASE("resolution below 2 is rejected") {
    FieldParams fp{1.0, 2.0, 0.0, 0.0};
    CHECK_THROWS_AS(grid_export(fp, {-1.0, 1.0, -1.0, 1.0}, 1), std::invalid_argument);
  }
}
