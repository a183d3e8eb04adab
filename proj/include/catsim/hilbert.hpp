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

#ifndef CATSIM_HILBERT_HPP
#define CATSIM_HILBERT_HPP

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "catsim/types.hpp"

namespace catsim {

/// Shape of a truncated tensor-product Hilbert space: one truncation
/// dimension per bosonic/two-level mode. Mode 0 is the slowest index of the
/// flattened basis (cat resonator first by convention), so the flat index of
/// |n_0, n_1, ..> is ((n_0*d_1)+n_1)*d_2 + ...
class SpaceSig {
 public:
  SpaceSig() = default;
  explicit SpaceSig(std::vector<int> dims);

  const std::vector<int>& dims() const { return dims_; }
  int dim(int mode) const { return dims_.at(static_cast<size_t>(mode)); }
  int num_modes() const { return static_cast<int>(dims_.size()); }
  int total_dim() const { return total_; }

  /// Flat-index stride of one excitation of `mode`.
  int stride(int mode) const;

  bool operator==(const SpaceSig& other) const { return dims_ == other.dims_; }
  bool operator!=(const SpaceSig& other) const { return !(*this == other); }
  std::string to_string() const;

 private:
  std::vector<int> dims_;
  int total_ = 0;
};

enum class ModeOp { Annihilation, Creation, Number, Parity, Identity };

/// Dense operator on a SpaceSig space. Immutable by convention: builders
/// return fresh values and nothing mutates `data` in place after
/// construction, so instances can be shared across threads.
struct Operator {
  SpaceSig sig;
  Mat data;

  Operator() = default;
  Operator(SpaceSig s, Mat m);

  Operator adjoint() const { return Operator(sig, data.adjoint()); }
  bool is_hermitian(double tol = 1e-12) const;
  /// Verifies ||O - O^dag||_inf < tol, throws otherwise.
  void require_hermitian(double tol = 1e-12) const;
};

Operator operator*(const Operator& a, const Operator& b);
Operator operator+(const Operator& a, const Operator& b);
Operator operator-(const Operator& a, const Operator& b);
Operator operator*(Cplx scale, const Operator& a);
Operator operator*(double scale, const Operator& a);

/// Pure state; amplitudes are normalized to ||psi||_2 = 1 on construction.
struct Ket {
  SpaceSig sig;
  Vec amplitudes;

  Ket() = default;
  Ket(SpaceSig s, Vec amps);  // normalizes; throws on a zero vector
};

struct DensityMatrix {
  SpaceSig sig;
  Mat data;

  DensityMatrix() = default;
  DensityMatrix(SpaceSig s, Mat m);
  static DensityMatrix from_ket(const Ket& psi);

  /// Checks trace ~ 1, Hermiticity, and min eigenvalue >= -eig_slack.
  /// Throws NumericError when violated.
  void validate(double trace_tol = 1e-9, double herm_tol = 1e-10,
                double eig_slack = 1e-8) const;
  double min_eigenvalue() const;
};

/// Embeds the requested single-mode ladder operator into the full space by
/// tensoring with identities. Annihilation carries sqrt(n) on the first
/// superdiagonal of its mode block; parity is diag((-1)^n).
Operator mode_operator(const SpaceSig& sig, int mode, ModeOp kind);

/// Truncation needed to hold amplitude |alpha| with coherent tail mass
/// below ~1e-8: N >= ceil(|alpha|^2 + 6|alpha| + 10).
int min_truncation(double alpha_abs);

/// D(beta) = exp(beta a^dag - beta^* a) on `mode`, evaluated by
/// scaling-and-squaring of the truncated generator (exactly unitary on the
/// truncated space). Rejects truncations too small for |beta| rather than
/// returning a corrupted operator.
Operator displacement(const SpaceSig& sig, int mode, Cplx beta);

/// Fock amplitudes of |alpha>: e^{-|a|^2/2} alpha^n / sqrt(n!).
Vec coherent_amplitudes(Cplx alpha, int dim);

/// Single-mode Fock state |n>.
Ket fock_ket(int dim, int n);

enum class CatKind { Coherent, Plus, Minus, Zero, One };

/// Single-mode cat-basis constructors. Plus/minus have exactly even/odd
/// photon-number support; zero/one are (|+> +- |->)/sqrt(2).
Ket cat_basis_state(int truncation, Cplx alpha, CatKind kind);

/// Tr[rho O]; sigs must match.
Cplx expectation(const DensityMatrix& rho, const Operator& obs);
Cplx expectation(const Ket& psi, const Operator& obs);

/// <psi| rho |psi>.
double fidelity(const DensityMatrix& rho, const Ket& psi);

/// Traces out every mode except `keep_mode`.
DensityMatrix partial_trace(const DensityMatrix& rho, int keep_mode);

Ket tensor(const Ket& a, const Ket& b);
Mat kron(const Mat& a, const Mat& b);

// JSON wire format for oracle cross-checks: {"kind", "dims", "data"} where
// "data" is the row-major interleaved [re, im, re, im, ...] flattening.
void to_json(nlohmann::json& j, const Operator& op);
void from_json(const nlohmann::json& j, Operator& op);
void to_json(nlohmann::json& j, const Ket& psi);
void from_json(const nlohmann::json& j, Ket& psi);
void to_json(nlohmann::json& j, const DensityMatrix& rho);
void from_json(const nlohmann::json& j, DensityMatrix& rho);

}  // namespace catsim

#endif  // CATSIM_HILBERT_HPP
