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

#include "catsim/semiclassical.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace catsim {

void FieldParams::validate() const {
  if (!(kappa2 > 0.0)) throw std::invalid_argument("FieldParams: kappa2 must be > 0");
  if (kappa_a < 0.0) throw std::invalid_argument("FieldParams: kappa_a must be >= 0");
}

double Velocity::speed() const { return std::hypot(vx, vy); }

Velocity velocity(const PhasePoint& p, const FieldParams& fp) {
  fp.validate();
  if (!std::isfinite(p.x) || !std::isfinite(p.y))
    throw std::invalid_argument("velocity: non-finite phase point");
  const double x = p.x, y = p.y, a2 = fp.alpha * fp.alpha;
  Velocity v;
  v.vx = -fp.kappa2 * (x * x * x + x * y * y - a2 * x) - 0.5 * fp.kappa_a * x + fp.delta * y;
  v.vy = -fp.kappa2 * (y * y * y + x * x * y + a2 * y) - 0.5 * fp.kappa_a * y - fp.delta * x;
  return v;
}

double pseudo_potential(const PhasePoint& p, const FieldParams& fp) {
  fp.validate();
  if (fp.delta != 0.0)
    throw std::invalid_argument(
        "pseudo_potential: undefined for delta != 0 (rotational field)");
  const double x = p.x, y = p.y, a2 = fp.alpha * fp.alpha;
  // The quadratic term carries a2/2 so that -grad V reproduces the velocity
  // field exactly (minima at +-alpha_inf, curvature kappa_c).
  return fp.kappa2 * (0.25 * (x * x * x * x + y * y * y * y) + 0.5 * x * x * y * y -
                      0.5 * a2 * (x * x - y * y)) +
         0.25 * fp.kappa_a * (x * x + y * y);
}

double lambda_direction(double kappa_c, double delta) {
  if (!(delta > 0.0))
    throw std::invalid_argument("lambda_direction: requires delta > 0");
  double u = kappa_c / (2.0 * delta);
  if (u < 1.0)
    throw std::invalid_argument(
        "lambda_direction: delta > kappa_c/2, no metastable direction");
  return -u + std::sqrt(u * u - 1.0);
}

double detuned_cut_potential(double beta_prime, const FieldParams& fp) {
  fp.validate();
  double kc = fp.confinement_rate();
  if (!(fp.delta > 0.0) || fp.delta > 0.5 * kc)
    throw std::invalid_argument(
        "detuned_cut_potential: requires 0 < delta <= kappa_c/2 (no metastable "
        "direction otherwise)");
  double curv = std::sqrt(0.25 * kc * kc - fp.delta * fp.delta);
  double b2 = beta_prime * beta_prime;
  return -0.5 * curv * b2 + 0.25 * fp.kappa2 * b2 * b2;
}

double metastable_amplitude(const FieldParams& fp) {
  fp.validate();
  bool has_loss = fp.kappa_a > 0.0;
  bool has_detuning = fp.delta != 0.0;
  if (has_loss && has_detuning)
    throw std::invalid_argument(
        "metastable_amplitude: combined loss + detuning has no closed form; "
        "pass one perturbation at a time");
  const double a2 = fp.alpha * fp.alpha;
  if (has_loss) {
    double shift = fp.kappa_a / (2.0 * fp.kappa2);
    return a2 >= shift ? std::sqrt(a2 - shift) : 0.0;
  }
  if (has_detuning) {
    double d = std::abs(fp.delta) / fp.kappa2;
    return std::abs(fp.delta) < fp.kappa2 * a2 ? std::pow(a2 * a2 - d * d, 0.25) : 0.0;
  }
  return fp.alpha;
}

void FieldGrid::write_csv(std::ostream& os) const {
  os << (has_potential ? "x,y,vx,vy,speed,V" : "x,y,vx,vy,speed") << "\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (size_t i = 0; i < x.size(); ++i) {
    put(x[i]); os << ","; put(y[i]); os << ","; put(vx[i]); os << ",";
    put(vy[i]); os << ","; put(speed[i]);
    if (has_potential) { os << ","; put(potential[i]); }
    os << "\n";
  }
}

void FieldGrid::write_csv_file(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("FieldGrid: cannot open " + path);
  write_csv(f);
}

FieldGrid grid_export(const FieldParams& fp, const GridExtent& extent, int resolution) {
  fp.validate();
  if (resolution < 2) throw std::invalid_argument("grid_export: resolution must be >= 2");
  FieldGrid g;
  g.extent = extent;
  g.resolution = resolution;
  g.has_potential = (fp.delta == 0.0);
  size_t n = static_cast<size_t>(resolution) * static_cast<size_t>(resolution);
  g.x.reserve(n); g.y.reserve(n); g.vx.reserve(n); g.vy.reserve(n); g.speed.reserve(n);
  if (g.has_potential) g.potential.reserve(n);
  double dx = (extent.xmax - extent.xmin) / (resolution - 1);
  double dy = (extent.ymax - extent.ymin) / (resolution - 1);
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {  // y fastest
      PhasePoint p{extent.xmin + i * dx, extent.ymin + j * dy};
      Velocity v = velocity(p, fp);
      g.x.push_back(p.x);
      g.y.push_back(p.y);
      g.vx.push_back(v.vx);
      g.vy.push_back(v.vy);
      g.speed.push_back(v.speed());
      if (g.has_potential) g.potential.push_back(pseudo_potential(p, fp));
    }
  }
  return g;
}

}  // namespace catsim
