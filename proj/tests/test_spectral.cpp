#include <leinert/spectral.hpp>

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace leinert;

TEST(Haar, UnitaryAndDeterministic) {
  SplitMix64 a(3), b(3);
  for (int n : {1, 2, 5, 20}) {
    CMatrix u = haar_unitary(n, a);
    EXPECT_LT((u.adjoint() * u - CMatrix::Identity(n, n)).norm(), 1e-12) << n;
    EXPECT_EQ(u, haar_unitary(n, b));
  }
  EXPECT_THROW(haar_unitary(0, a), std::invalid_argument);
}

TEST(Haar, EigenphasesAreUniform) {
  // Haar eigenphases have a flat one-point density on the circle
  SplitMix64 rng(11);
  const int bins = 8, n = 10, reps = 400;
  std::vector<int> hist(bins, 0);
  for (int r = 0; r < reps; ++r) {
    Eigen::ComplexEigenSolver<CMatrix> es(haar_unitary(n, rng), false);
    for (int i = 0; i < n; ++i) {
      double th = std::arg(es.eigenvalues()[i]) + std::numbers::pi;
      ++hist[std::min(bins - 1, static_cast<int>(th / (2 * std::numbers::pi) * bins))];
    }
  }
  double expect = double(n) * reps / bins;
  for (int c : hist) EXPECT_LT(std::abs(c - expect), 5 * std::sqrt(expect));
}

TEST(Operator, MatchesDenseMatrix) {
  SplitMix64 rng(4);
  auto ops = sample_operands(2, 4, 0.7, rng);
  CMatrix T = materialize_T(ops);
  for (int k = 0; k < 5; ++k) {
    CVector v(16);
    for (int i = 0; i < 16; ++i) v[i] = rng.complex_normal();
    EXPECT_LT((apply_T(v, ops) - T * v).norm(), 1e-12);
    EXPECT_LT((apply_T_adjoint(v, ops) - T.adjoint() * v).norm(), 1e-12);
  }
}

TEST(Operator, Linear) {
  SplitMix64 rng(5);
  auto ops = sample_operands(3, 5, 1.0, rng);
  CVector x(25), y(25);
  for (int i = 0; i < 25; ++i) {
    x[i] = rng.complex_normal();
    y[i] = rng.complex_normal();
  }
  std::complex<double> c(0.3, -1.2);
  EXPECT_LT((apply_T(c * x + y, ops) - (c * apply_T(x, ops) + apply_T(y, ops))).norm(), 1e-12);
}

TEST(Operator, IdentityOperands) {
  TensorOperands ops;
  ops.U = {CMatrix::Identity(3, 3)};
  ops.V = {CMatrix::Identity(3, 3)};
  SplitMix64 rng(6);
  auto r = two_norm(ops, 1e-12, 100, rng);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.norm, 2.0, 1e-12);
}

TEST(Operator, DimensionChecks) {
  TensorOperands ops;
  ops.U = {CMatrix::Identity(3, 3)};
  ops.V = {CMatrix::Identity(2, 2)};
  EXPECT_THROW(ops.check(), std::invalid_argument);
  ops.V.clear();
  EXPECT_THROW(ops.check(), std::invalid_argument);
}

TEST(PowerIteration, DiagonalFixture) {
  // U = diag(e^{i phi}), V = diag(e^{i psi}): the norm is max |e^{i phi_k} + e^{i psi_l}|
  TensorOperands ops;
  CMatrix U = CMatrix::Zero(3, 3), V = CMatrix::Zero(3, 3);
  std::vector<double> phi{0.0, 1.0, 2.5}, psi{0.4, 3.0, -1.0};
  double best = 0;
  for (int i = 0; i < 3; ++i) {
    U(i, i) = std::polar(1.0, phi[i]);
    V(i, i) = std::polar(1.0, psi[i]);
  }
  for (double p : phi)
    for (double q : psi) best = std::max(best, std::abs(std::polar(1.0, p) + std::polar(1.0, q)));
  ops.U = {U};
  ops.V = {V};
  SplitMix64 rng(7);
  auto r = two_norm(ops, 1e-14, 10000, rng);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.norm, best, 1e-6);
}

TEST(PowerIteration, HistoryIsNondecreasingAndMatchesSvd) {
  SplitMix64 rng(8);
  auto ops = sample_operands(2, 6, 1.0, rng);
  auto r = two_norm(ops, 1e-12, 20000, rng, true);
  ASSERT_TRUE(r.converged);
  for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_GE(r.history[i], r.history[i - 1] * (1 - 1e-12));
  Eigen::JacobiSVD<CMatrix> svd(materialize_T(ops));
  EXPECT_NEAR(r.norm, svd.singularValues()[0], 1e-4);
}

TEST(PowerIteration, TriangleInequalityBound) {
  SplitMix64 rng(9);
  for (unsigned s : {1u, 2u, 3u}) {
    auto ops = sample_operands(s, 8, 0.5, rng);
    EXPECT_LE(two_norm(ops, 1e-8, 5000, rng).norm, 2 * s * 0.5 + 1e-12);
  }
}

TEST(Estimate, SingleTrialHasZeroSpread) {
  SpectralConfig cfg;
  cfg.N = 10;
  cfg.trials = 1;
  auto e = estimate_z_inverse(cfg);
  EXPECT_EQ(e.stddev, 0.0);
  EXPECT_EQ(e.mean, e.trials[0].norm);
}

TEST(Estimate, DeterministicAcrossThreadCounts) {
  SpectralConfig cfg;
  cfg.N = 12;
  cfg.trials = 3;
  cfg.threads = 1;
  auto a = estimate_z_inverse(cfg);
  cfg.threads = 3;
  auto b = estimate_z_inverse(cfg);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(spectral_csv(a), spectral_csv(b));
}

TEST(Estimate, SpreadShrinksWithN) {
  SpectralConfig small, large;
  small.N = 8;
  small.trials = 12;
  large.N = 40;
  large.trials = 12;
  EXPECT_GT(estimate_z_inverse(small).stddev, estimate_z_inverse(large).stddev);
}

TEST(Estimate, SeedsAgreeAtModerateN) {
  SpectralConfig cfg;
  cfg.N = 40;
  cfg.trials = 2;
  cfg.seed = 1;
  double m1 = estimate_z_inverse(cfg).mean;
  cfg.seed = 2;
  double m2 = estimate_z_inverse(cfg).mean;
  EXPECT_NEAR(m1, m2, 0.1 * m1);
}

TEST(Estimate, SingleGeneratorApproachesTwo) {
  // U (x) I + I (x) V has norm max |lambda + mu| over eigenphases, close to 2
  SpectralConfig cfg;
  cfg.s = 1;
  cfg.N = 30;
  cfg.trials = 2;
  auto e = estimate_z_inverse(cfg);
  EXPECT_TRUE(e.all_converged);
  EXPECT_NEAR(e.mean, 2.0, 0.02);
}

TEST(Estimate, InvalidConfig) {
  SpectralConfig cfg;
  cfg.N = 1;
  EXPECT_THROW(estimate_z_inverse(cfg), std::invalid_argument);
  cfg.N = 5;
  cfg.trials = 0;
  EXPECT_THROW(estimate_z_inverse(cfg), std::invalid_argument);
}

TEST(Estimate, CsvHeader) {
  SpectralConfig cfg;
  cfg.N = 5;
  cfg.trials = 2;
  auto csv = spectral_csv(estimate_z_inverse(cfg));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "s,N,a,trial,norm,iterations,converged");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}
