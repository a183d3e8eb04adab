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

#ifndef CATSIM_LINDBLAD_HPP
#define CATSIM_LINDBLAD_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "catsim/hilbert.hpp"
#include "catsim/types.hpp"

namespace catsim {

struct EvolveTolerances {
  double rel_step_tol = 1e-8;     // per-step error control on ||d rho||_inf
  double trace_tol = 1e-6;        // allowed trace drift before bailing out
  int herm_resym_period = 100;    // re-Hermitize every N accepted steps
  bool check_positivity = true;   // min-eigenvalue guard at sampled times
  double positivity_floor = -1e-6;
};

/// Time-independent Lindblad problem. The Hamiltonian is in angular units
/// (rad/us) and each loss operator carries its sqrt(rate) scaling, so the
/// equation integrated is
///   d rho/dt = -i[H, rho] + sum_k ( L rho L^dag - 1/2 {L^dag L, rho} ).
struct EvolutionSpec {
  Operator hamiltonian;
  std::vector<Operator> loss_ops;
  std::vector<double> t_grid;  // us, strictly increasing, t_grid[0] >= 0
  std::vector<std::pair<std::string, Operator>> observables;
  EvolveTolerances tol;

  void validate() const;
};

struct EvolveStats {
  long accepted_steps = 0;
  long rejected_steps = 0;
  double max_trace_drift = 0.0;
  double min_eigenvalue_seen = 1.0;
  double max_herm_dev = 0.0;  // ||rho - rho^dag||_inf over sampled times
};

struct TimeSeries {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<Cplx>> columns;  // columns[i][k] = <obs_i>(times[k])
  DensityMatrix final_state;
  EvolveStats stats;

  const std::vector<Cplx>& column(const std::string& name) const;
  /// CSV layout: `t,<name>_re,<name>_im,...`, one row per grid time,
  /// 17 significant digits.
  void write_csv(std::ostream& os) const;
  void write_csv_file(const std::string& path) const;
};

/// Reference right-hand side: -i[H,rho] + sum_k D[L_k]rho, evaluated with
/// plain dense products. The adaptive integrator uses an equivalent
/// compiled form; `test_lindblad` pins the two against each other.
Mat liouvillian_apply(const Operator& hamiltonian, const std::vector<Operator>& loss_ops,
                      const DensityMatrix& rho);

/// Adaptive embedded Dormand-Prince 5(4) integration with PI step control.
/// Steps land exactly on t_grid points (no interpolation); trace drift is
/// renormalized when below trace_tol and fatal otherwise.
TimeSeries evolve(const EvolutionSpec& spec, const DensityMatrix& rho0);

struct SteadyResult {
  DensityMatrix state;
  bool converged = false;
  double residual = 0.0;  // ||d rho/dt||_inf at the returned state
  double t_reached = 0.0;
};

/// Integrates until ||d rho/dt||_inf < stall_tol or the horizon runs out.
/// Non-convergence is reported through the flag, not thrown.
SteadyResult relax_to_steady(const Operator& hamiltonian,
                             const std::vector<Operator>& loss_ops,
                             const DensityMatrix& rho0, double horizon_us,
                             double stall_tol,
                             const EvolveTolerances& tol = EvolveTolerances{});

}  // namespace catsim

#endif  // CATSIM_LINDBLAD_HPP
