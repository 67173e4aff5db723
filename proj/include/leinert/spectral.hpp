#pragma once

// Norm of T = a sum_i (U_i (x) I + I (x) V_i) for Haar unitaries U_i, V_i.

#include <leinert/parallel.hpp>
#include <leinert/rng.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace leinert {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Ginibre matrix, QR, then columns of Q rotated by the phases of diag(R).
inline CMatrix haar_unitary(int n, SplitMix64& rng) {
  if (n < 1) throw std::invalid_argument("N must be >= 1");
  CMatrix z(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) z(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix& r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    std::complex<double> d = r(j, j);
    double m = std::abs(d);
    q.col(j) *= m > 0 ? d / m : std::complex<double>(1, 0);
  }
  return q;
}

struct TensorOperands {
  std::vector<CMatrix> U;
  std::vector<CMatrix> V;
  double a = 1;

  int dim() const { return U.empty() ? 0 : static_cast<int>(U.front().rows()); }

  void check() const {
    if (U.empty() || U.size() != V.size()) throw std::invalid_argument("need the same positive number of U and V");
    int n = dim();
    for (const auto* list : {&U, &V})
      for (const auto& m : *list)
        if (m.rows() != n || m.cols() != n) throw std::invalid_argument("operand dimension mismatch");
  }
};

namespace detail {
// Row-major reshape: v[i*N + j] = M(i, j).
inline Eigen::Map<const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> as_matrix(
    const CVector& v, int n) {
  return {v.data(), n, n};
}
inline Eigen::Map<Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> as_matrix(
    CVector& v, int n) {
  return {v.data(), n, n};
}
}  // namespace detail

/// T v with (U (x) I) v -> U M and (I (x) V) v -> M V^T, M the row-major
/// reshape of v.
inline CVector apply_T(const CVector& v, const TensorOperands& ops) {
  int n = ops.dim();
  if (v.size() != static_cast<Eigen::Index>(n) * n) throw std::invalid_argument("vector length must be N^2");
  auto M = detail::as_matrix(v, n);
  Eigen::MatrixXcd sumU = Eigen::MatrixXcd::Zero(n, n), sumV = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& u : ops.U) sumU += u;
  for (const auto& w : ops.V) sumV += w;
  CVector out(v.size());
  auto O = detail::as_matrix(out, n);
  O.noalias() = sumU * M;
  O.noalias() += M * sumV.transpose();
  out *= ops.a;
  return out;
}

/// T^dagger v: U^dagger M + M conj(V).
inline CVector apply_T_adjoint(const CVector& v, const TensorOperands& ops) {
  int n = ops.dim();
  if (v.size() != static_cast<Eigen::Index>(n) * n) throw std::invalid_argument("vector length must be N^2");
  auto M = detail::as_matrix(v, n);
  Eigen::MatrixXcd sumU = Eigen::MatrixXcd::Zero(n, n), sumV = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& u : ops.U) sumU += u;
  for (const auto& w : ops.V) sumV += w;
  CVector out(v.size());
  auto O = detail::as_matrix(out, n);
  O.noalias() = sumU.adjoint() * M;
  O.noalias() += M * sumV.conjugate();
  out *= ops.a;
  return out;
}

/// Dense N^2 x N^2 matrix of T in the same index convention.
inline CMatrix materialize_T(const TensorOperands& ops) {
  int n = ops.dim();
  CMatrix I = CMatrix::Identity(n, n);
  CMatrix T = CMatrix::Zero(n * n, n * n);
  auto kron = [n](const CMatrix& A, const CMatrix& B) {
    CMatrix K(n * n, n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) K.block(i * n, j * n, n, n) = A(i, j) * B;
    return K;
  };
  for (std::size_t i = 0; i < ops.U.size(); ++i) T += kron(ops.U[i], I) + kron(I, ops.V[i]);
  return T * ops.a;
}

struct NormResult {
  double norm = 0;
  unsigned iterations = 0;
  bool converged = false;
  std::vector<double> history;  // sqrt of the Rayleigh quotient per iteration
};

/// Largest singular value by power iteration on T^dagger T from a random
/// complex start; stops when successive estimates differ by < tol relative.
inline NormResult two_norm(const TensorOperands& ops, double tol, unsigned max_iters, SplitMix64& rng,
                           bool keep_history = false) {
  ops.check();
  int n = ops.dim();
  CVector x(static_cast<Eigen::Index>(n) * n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.complex_normal();
  x.normalize();
  NormResult res;
  double prev = 0;
  for (unsigned it = 1; it <= max_iters; ++it) {
    CVector y = apply_T(x, ops);
    double sigma = y.norm();  // sqrt(<x, T^dagger T x>) with |x| = 1
    res.norm = std::max(res.norm, sigma);
    res.iterations = it;
    if (keep_history) res.history.push_back(sigma);
    if (sigma == 0) {
      res.converged = true;
      break;
    }
    if (it > 1 && std::abs(sigma - prev) <= tol * sigma) {
      res.converged = true;
      break;
    }
    prev = sigma;
    x = apply_T_adjoint(y, ops);
    double nx = x.norm();
    if (nx == 0) {
      res.converged = true;
      break;
    }
    x /= nx;
  }
  return res;
}

struct SpectralConfig {
  unsigned s = 2;
  int N = 75;
  double a = 1;
  unsigned trials = 4;
  std::uint64_t seed = 1;
  double power_tol = 1e-6;
  unsigned max_iters = 5000;
  unsigned threads = 0;
};

struct NormEstimate {
  SpectralConfig config;
  std::vector<NormResult> trials;
  double mean = 0;
  double stddev = 0;  // sample standard deviation, 0 for one trial
  bool all_converged = true;
};

inline TensorOperands sample_operands(unsigned s, int n, double a, SplitMix64& rng) {
  TensorOperands ops;
  ops.a = a;
  for (unsigned i = 0; i < s; ++i) ops.U.push_back(haar_unitary(n, rng));
  for (unsigned i = 0; i < s; ++i) ops.V.push_back(haar_unitary(n, rng));
  return ops;
}

inline NormEstimate estimate_z_inverse(const SpectralConfig& cfg) {
  if (cfg.s < 1 || cfg.N < 2 || cfg.trials < 1) throw std::invalid_argument("need s >= 1, N >= 2, trials >= 1");
  NormEstimate est;
  est.config = cfg;
  est.trials.resize(cfg.trials);
  parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
    SplitMix64 rng(derive_stream(cfg.seed, t));
    auto ops = sample_operands(cfg.s, cfg.N, cfg.a, rng);
    est.trials[t] = two_norm(ops, cfg.power_tol, cfg.max_iters, rng);
  });
  double sum = 0;
  for (const auto& r : est.trials) {
    sum += r.norm;
    est.all_converged = est.all_converged && r.converged;
  }
  est.mean = sum / cfg.trials;
  if (cfg.trials > 1) {
    double ss = 0;
    for (const auto& r : est.trials) ss += (r.norm - est.mean) * (r.norm - est.mean);
    est.stddev = std::sqrt(ss / (cfg.trials - 1));
  }
  return est;
}

inline std::string spectral_csv(const NormEstimate& est) {
  std::ostringstream os;
  os.precision(12);
  os << "s,N,a,trial,norm,iterations,converged\n";
  for (std::size_t t = 0; t < est.trials.size(); ++t)
    os << est.config.s << ',' << est.config.N << ',' << est.config.a << ',' << t << ',' << est.trials[t].norm << ','
       << est.trials[t].iterations << ',' << (est.trials[t].converged ? 1 : 0) << '\n';
  return os.str();
}

}  // namespace leinert
