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

#include "catsim/hilbert.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

namespace catsim {

SpaceSig::SpaceSig(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("SpaceSig: no modes");
  total_ = 1;
  for (int d : dims_) {
    if (d < 1) throw std::invalid_argument("SpaceSig: every dim must be >= 1");
    total_ *= d;
  }
}

int SpaceSig::stride(int mode) const {
  if (mode < 0 || mode >= num_modes())
    throw std::invalid_argument("SpaceSig::stride: mode out of range");
  int s = 1;
  for (size_t k = static_cast<size_t>(mode) + 1; k < dims_.size(); ++k) s *= dims_[k];
  return s;
}

std::string SpaceSig::to_string() const {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < dims_.size(); ++i) os << (i ? "," : "") << dims_[i];
  os << "]";
  return os.str();
}

Operator::Operator(SpaceSig s, Mat m) : sig(std::move(s)), data(std::move(m)) {
  if (data.rows() != data.cols())
    throw std::invalid_argument("Operator: matrix must be square");
  if (data.rows() != sig.total_dim())
    throw std::invalid_argument("Operator: matrix dimension does not match sig " +
                                sig.to_string());
}

bool Operator::is_hermitian(double tol) const {
  return (data - data.adjoint()).cwiseAbs().maxCoeff() < tol;
}

void Operator::require_hermitian(double tol) const {
  double dev = (data - data.adjoint()).cwiseAbs().maxCoeff();
  if (!(dev < tol))
    throw NumericError("Operator: Hermiticity violated, deviation " + std::to_string(dev));
}

namespace {
void require_same_sig(const SpaceSig& a, const SpaceSig& b, const char* who) {
  if (a != b)
    throw std::invalid_argument(std::string(who) + ": sig mismatch " + a.to_string() +
                                " vs " + b.to_string());
}
}  // namespace

Operator operator*(const Operator& a, const Operator& b) {
  require_same_sig(a.sig, b.sig, "Operator*");
  return Operator(a.sig, a.data * b.data);
}
Operator operator+(const Operator& a, const Operator& b) {
  require_same_sig(a.sig, b.sig, "Operator+");
  return Operator(a.sig, a.data + b.data);
}
Operator operator-(const Operator& a, const Operator& b) {
  require_same_sig(a.sig, b.sig, "Operator-");
  return Operator(a.sig, a.data - b.data);
}
Operator operator*(Cplx scale, const Operator& a) { return Operator(a.sig, scale * a.data); }
Operator operator*(double scale, const Operator& a) { return Operator(a.sig, scale * a.data); }

Ket::Ket(SpaceSig s, Vec amps) : sig(std::move(s)), amplitudes(std::move(amps)) {
  if (amplitudes.size() != sig.total_dim())
    throw std::invalid_argument("Ket: amplitude count does not match sig");
  double n = amplitudes.norm();
  if (!(n > 0.0)) throw std::invalid_argument("Ket: zero vector is not a state");
  amplitudes /= n;
}

DensityMatrix::DensityMatrix(SpaceSig s, Mat m) : sig(std::move(s)), data(std::move(m)) {
  if (data.rows() != data.cols() || data.rows() != sig.total_dim())
    throw std::invalid_argument("DensityMatrix: matrix dimension does not match sig");
}

DensityMatrix DensityMatrix::from_ket(const Ket& psi) {
  return DensityMatrix(psi.sig, psi.amplitudes * psi.amplitudes.adjoint());
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (data + data.adjoint()),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void DensityMatrix::validate(double trace_tol, double herm_tol, double eig_slack) const {
  double tr_dev = std::abs(data.trace() - Cplx(1.0, 0.0));
  if (!(tr_dev < trace_tol))
    throw NumericError("DensityMatrix: trace deviates from 1 by " + std::to_string(tr_dev));
  double herm_dev = (data - data.adjoint()).cwiseAbs().maxCoeff();
  if (!(herm_dev < herm_tol))
    throw NumericError("DensityMatrix: non-Hermitian by " + std::to_string(herm_dev));
  double lam = min_eigenvalue();
  if (lam < -eig_slack)
    throw NumericError("DensityMatrix: negative eigenvalue " + std::to_string(lam));
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace {

Mat single_mode_block(int dim, ModeOp kind) {
  Mat m = Mat::Zero(dim, dim);
  switch (kind) {
    case ModeOp::Annihilation:
      for (int n = 1; n < dim; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
      break;
    case ModeOp::Creation:
      for (int n = 1; n < dim; ++n) m(n, n - 1) = std::sqrt(static_cast<double>(n));
      break;
    case ModeOp::Number:
      for (int n = 0; n < dim; ++n) m(n, n) = static_cast<double>(n);
      break;
    case ModeOp::Parity:
      for (int n = 0; n < dim; ++n) m(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
      break;
    case ModeOp::Identity:
      m = Mat::Identity(dim, dim);
      break;
    default:
      throw std::invalid_argument("mode_operator: invalid kind");
  }
  return m;
}

Mat embed(const SpaceSig& sig, int mode, const Mat& block) {
  Mat full = Mat::Identity(1, 1);
  for (int k = 0; k < sig.num_modes(); ++k) {
    if (k == mode)
      full = kron(full, block);
    else
      full = kron(full, Mat::Identity(sig.dim(k), sig.dim(k)));
  }
  return full;
}

}  // namespace

Operator mode_operator(const SpaceSig& sig, int mode, ModeOp kind) {
  if (mode < 0 || mode >= sig.num_modes())
    throw std::invalid_argument("mode_operator: mode out of range for sig " + sig.to_string());
  if (kind != ModeOp::Identity && sig.dim(mode) < 2)
    throw std::invalid_argument("mode_operator: dim < 2 supports only identity");
  return Operator(sig, embed(sig, mode, single_mode_block(sig.dim(mode), kind)));
}

int min_truncation(double alpha_abs) {
  return static_cast<int>(std::ceil(alpha_abs * alpha_abs + 6.0 * alpha_abs + 10.0));
}

Operator displacement(const SpaceSig& sig, int mode, Cplx beta) {
  if (mode < 0 || mode >= sig.num_modes())
    throw std::invalid_argument("displacement: mode out of range");
  int dim = sig.dim(mode);
  if (dim < min_truncation(std::abs(beta)))
    throw std::invalid_argument(
        "displacement: truncation " + std::to_string(dim) + " too small for |beta|=" +
        std::to_string(std::abs(beta)) + " (need >= " +
        std::to_string(min_truncation(std::abs(beta))) + ")");
  // Exponentiating the truncated generator keeps D exactly unitary on the
  // truncated space (so D(beta) D(-beta) = 1 to machine precision); the
  // truncation-size precondition keeps the low-energy columns faithful to
  // the infinite-dimensional displacement.
  Mat gen = Mat::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) {
    double r = std::sqrt(static_cast<double>(n));
    gen(n, n - 1) = beta * r;               // beta a^dag
    gen(n - 1, n) = -std::conj(beta) * r;   // -beta^* a
  }
  Mat d = gen.exp();
  return Operator(sig, embed(sig, mode, d));
}

Vec coherent_amplitudes(Cplx alpha, int dim) {
  Vec c(dim);
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < dim; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return c;
}

Ket fock_ket(int dim, int n) {
  if (n < 0 || n >= dim) throw std::invalid_argument("fock_ket: level out of range");
  Vec v = Vec::Zero(dim);
  v(n) = 1.0;
  return Ket(SpaceSig({dim}), std::move(v));
}

Ket cat_basis_state(int truncation, Cplx alpha, CatKind kind) {
  if (truncation < 1) throw std::invalid_argument("cat_basis_state: truncation < 1");
  double aa = std::abs(alpha);
  if (kind == CatKind::Minus && aa == 0.0)
    throw std::invalid_argument("cat_basis_state: odd cat undefined at alpha = 0");
  if (truncation < min_truncation(aa))
    throw std::invalid_argument("cat_basis_state: truncation " + std::to_string(truncation) +
                                " below rule for |alpha|=" + std::to_string(aa));
  SpaceSig sig({truncation});
  Vec c = coherent_amplitudes(alpha, truncation);
  switch (kind) {
    case CatKind::Coherent:
      return Ket(sig, c);
    case CatKind::Plus: {
      Vec v = c;
      for (int n = 1; n < truncation; n += 2) v(n) = 0.0;  // exact even support
      return Ket(sig, std::move(v));
    }
    case CatKind::Minus: {
      Vec v = c;
      for (int n = 0; n < truncation; n += 2) v(n) = 0.0;  // exact odd support
      return Ket(sig, std::move(v));
    }
    case CatKind::Zero:
    case CatKind::One: {
      Ket plus = cat_basis_state(truncation, alpha, CatKind::Plus);
      Ket minus = cat_basis_state(truncation, alpha, CatKind::Minus);
      double sgn = (kind == CatKind::Zero) ? 1.0 : -1.0;
      return Ket(sig, plus.amplitudes + sgn * minus.amplitudes);
    }
  }
  throw std::invalid_argument("cat_basis_state: invalid kind");
}

Cplx expectation(const DensityMatrix& rho, const Operator& obs) {
  require_same_sig(rho.sig, obs.sig, "expectation");
  return (rho.data * obs.data).trace();
}

Cplx expectation(const Ket& psi, const Operator& obs) {
  require_same_sig(psi.sig, obs.sig, "expectation");
  return psi.amplitudes.dot(obs.data * psi.amplitudes);
}

double fidelity(const DensityMatrix& rho, const Ket& psi) {
  require_same_sig(rho.sig, psi.sig, "fidelity");
  return std::real(psi.amplitudes.dot(rho.data * psi.amplitudes));
}

DensityMatrix partial_trace(const DensityMatrix& rho, int keep_mode) {
  const SpaceSig& sig = rho.sig;
  if (keep_mode < 0 || keep_mode >= sig.num_modes())
    throw std::invalid_argument("partial_trace: mode out of range");
  int dk = sig.dim(keep_mode);
  int sk = sig.stride(keep_mode);
  int rest = sig.total_dim() / dk;
  Mat out = Mat::Zero(dk, dk);
  // Enumerate the joint index of the traced modes once; its flat offset is
  // reconstructed by skipping the kept mode's digit.
  for (int r = 0; r < rest; ++r) {
    int rem = r, base = 0, place = 1;
    for (int m = sig.num_modes() - 1; m >= 0; --m) {
      if (m == keep_mode) continue;
      int digit = rem % sig.dim(m);
      rem /= sig.dim(m);
      base += digit * sig.stride(m);
      place *= sig.dim(m);
    }
    (void)place;
    for (int i = 0; i < dk; ++i)
      for (int j = 0; j < dk; ++j) out(i, j) += rho.data(base + i * sk, base + j * sk);
  }
  return DensityMatrix(SpaceSig({dk}), std::move(out));
}

Ket tensor(const Ket& a, const Ket& b) {
  std::vector<int> dims = a.sig.dims();
  dims.insert(dims.end(), b.sig.dims().begin(), b.sig.dims().end());
  Vec v(a.amplitudes.size() * b.amplitudes.size());
  for (Eigen::Index i = 0; i < a.amplitudes.size(); ++i)
    v.segment(i * b.amplitudes.size(), b.amplitudes.size()) = a.amplitudes(i) * b.amplitudes;
  return Ket(SpaceSig(dims), std::move(v));
}

namespace {

nlohmann::json matrix_to_json(const Mat& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(2 * m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      flat.push_back(m(i, j).real());
      flat.push_back(m(i, j).imag());
    }
  return nlohmann::json(flat);
}

Mat matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
  const auto flat = j.get<std::vector<double>>();
  if (flat.size() != static_cast<size_t>(2 * rows * cols))
    throw std::invalid_argument("state json: data length does not match dims");
  Mat m(rows, cols);
  size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j2 = 0; j2 < cols; ++j2, k += 2) m(i, j2) = Cplx(flat[k], flat[k + 1]);
  return m;
}

SpaceSig sig_from_json(const nlohmann::json& j) {
  return SpaceSig(j.at("dims").get<std::vector<int>>());
}

}  // namespace

void to_json(nlohmann::json& j, const Operator& op) {
  j = nlohmann::json{{"kind", "operator"}, {"dims", op.sig.dims()}, {"data", matrix_to_json(op.data)}};
}

void from_json(const nlohmann::json& j, Operator& op) {
  if (j.at("kind").get<std::string>() != "operator")
    throw std::invalid_argument("state json: expected kind=operator");
  SpaceSig sig = sig_from_json(j);
  op = Operator(sig, matrix_from_json(j.at("data"), sig.total_dim(), sig.total_dim()));
}

void to_json(nlohmann::json& j, const Ket& psi) {
  j = nlohmann::json{{"kind", "ket"},
                     {"dims", psi.sig.dims()},
                     {"data", matrix_to_json(psi.amplitudes)}};
}

void from_json(const nlohmann::json& j, Ket& psi) {
  if (j.at("kind").get<std::string>() != "ket")
    throw std::invalid_argument("state json: expected kind=ket");
  SpaceSig sig = sig_from_json(j);
  psi = Ket(sig, matrix_from_json(j.at("data"), sig.total_dim(), 1));
}

void to_json(nlohmann::json& j, const DensityMatrix& rho) {
  j = nlohmann::json{{"kind", "density"}, {"dims", rho.sig.dims()}, {"data", matrix_to_json(rho.data)}};
}

void from_json(const nlohmann::json& j, DensityMatrix& rho) {
  if (j.at("kind").get<std::string>() != "density")
    throw std::invalid_argument("state json: expected kind=density");
  SpaceSig sig = sig_from_json(j);
  rho = DensityMatrix(sig, matrix_from_json(j.at("data"), sig.total_dim(), sig.total_dim()));
}

}  // namespace catsim
