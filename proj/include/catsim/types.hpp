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

#ifndef CATSIM_TYPES_HPP
#define CATSIM_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace catsim {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealMat = Eigen::MatrixXd;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Frequencies/rates are configured as nu = omega/2pi in MHz; all dynamics
/// run in angular units, rad/us. 1 MHz of nu is 2pi rad/us.
inline constexpr double angular(double nu_mhz) { return kTwoPi * nu_mhz; }
inline constexpr double to_nu(double omega_rad_per_us) { return omega_rad_per_us / kTwoPi; }

/// Thrown when an integration or fit leaves its validity envelope
/// (trace drift, negativity, non-convergence treated as fatal).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace catsim

#endif  // CATSIM_TYPES_HPP
