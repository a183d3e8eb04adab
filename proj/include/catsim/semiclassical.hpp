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

#ifndef CATSIM_SEMICLASSICAL_HPP
#define CATSIM_SEMICLASSICAL_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "catsim/types.hpp"

namespace catsim {

/// Parameters of the coherent-state phase-space flow
///   d beta/dt = -kappa2 beta^* (beta^2 - alpha^2) - kappa_a/2 beta - i Delta beta.
/// All rates are angular (rad/us); alpha is the real stabilization amplitude.
struct FieldParams {
  double kappa2 = 1.0;
  double alpha = 2.0;
  double kappa_a = 0.0;
  double delta = 0.0;

  void validate() const;
  double confinement_rate() const { return 2.0 * kappa2 * alpha * alpha; }
};

struct PhasePoint {
  double x = 0.0;  // Re beta
  double y = 0.0;  // Im beta
};

struct Velocity {
  double vx = 0.0;
  double vy = 0.0;
  double speed() const;
};

Velocity velocity(const PhasePoint& p, const FieldParams& fp);

/// Pseudo-potential with -grad V equal to the velocity field; defined only
/// for the irrotational case delta = 0.
double pseudo_potential(const PhasePoint& p, const FieldParams& fp);

/// Slope lambda of the phase-space direction y = lambda x along which the
/// detuned flow integrates to a 1D potential; real only for
/// 0 < delta <= kappa_c/2. Throws otherwise (no metastable direction).
double lambda_direction(double kappa_c, double delta);

/// 1D cut potential along the lambda direction:
/// V(b') = -1/2 sqrt((kappa_c/2)^2 - delta^2) b'^2 + 1/4 kappa2 b'^4.
double detuned_cut_potential(double beta_prime, const FieldParams& fp);

/// Metastable well amplitude |alpha_inf| under a single perturbation:
/// loss branch sqrt(alpha^2 - kappa_a/(2 kappa2)) and detuning branch
/// (alpha^4 - (delta/kappa2)^2)^(1/4), each clamped to 0 past its
/// threshold. Both perturbations nonzero at once is rejected: the two
/// cases do not compose into a known closed form.
double metastable_amplitude(const FieldParams& fp);

struct GridExtent {
  double xmin = -3.0, xmax = 3.0;
  double ymin = -3.0, ymax = 3.0;
};

/// Row-major field samples, y varying fastest.
struct FieldGrid {
  GridExtent extent;
  int resolution = 0;  // samples per axis
  bool has_potential = false;
  std::vector<double> x, y, vx, vy, speed, potential;

  /// CSV header `x,y,vx,vy,speed[,V]`.
  void write_csv(std::ostream& os) const;
  void write_csv_file(const std::string& path) const;
};

FieldGrid grid_export(const FieldParams& fp, const GridExtent& extent, int resolution);

}  // namespace catsim

#endif  // CATSIM_SEMICLASSICAL_HPP
