#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "thresholding/estimators.hpp"

using namespace thresholding;

namespace {

Matrix random_matrix(int n, int k, std::mt19937_64 &gen) {
  std::normal_distribution<double> z;
  Matrix X(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) X(i, j) = z(gen);
  return X;
}

Vector random_vector(int n, std::mt19937_64 &gen, double sd = 1.0) {
  std::normal_distribution<double> z(0.0, sd);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = z(gen);
  return v;
}

// (Y - X t)'(Y - X t) + 2 sum lambda_i |t_i|
double objective(const RegressionData &d, const Vector &t, const Vector &lambda) {
  return (d.Y - d.X * t).squaredNorm() + 2.0 * lambda.dot(t.cwiseAbs());
}

// proximal gradient on the same objective, as an independent solver
Vector ista(const RegressionData &d, const Vector &lambda) {
  const Matrix G = d.X.transpose() * d.X;
  const Vector b = d.X.transpose() * d.Y;
  Eigen::SelfAdjointEigenSolver<Matrix> es(G);
  const double step = 1.0 / es.eigenvalues().maxCoeff();
  Vector t = Vector::Zero(G.rows());
  for (int it = 0; it < 200000; ++it) {
    const Vector g = G * t - b;
    Vector next = t - step * g;
    for (int i = 0; i < next.size(); ++i) {
      const double l = step * lambda(i);
      next(i) = next(i) > l ? next(i) - l : (next(i) < -l ? next(i) + l : 0.0);
    }
    if ((next - t).cwiseAbs().maxCoeff() < 1e-15) return next;
    t = next;
  }
  return t;
}

Matrix diagonal_design(std::mt19937_64 &gen, int n = 8, int k = 4) {
  std::uniform_real_distribution<double> u(0.3, 3.0);
  Matrix X = Matrix::Zero(n, k);
  for (int i = 0; i < k; ++i) X(i, i) = u(gen) * std::sqrt(double(n));
  return X;
}

}  // namespace

// ---- designs ------------------------------------------------------------------

TEST(Design, ConditionNumbersAndCorrelations) {
  EXPECT_NEAR(condition_number(make_design({DesignI{0.3}, 8, 4})), 2.6904, 5e-5);
  EXPECT_NEAR(condition_number(make_design({DesignI{0.5}, 8, 4})), 5.5616, 5e-5);
  EXPECT_NEAR(condition_number(make_design({DesignI{0.9}, 8, 4})), 57.4727, 5e-5);
  EXPECT_NEAR(condition_number(make_design({DesignII{0.2}, 8, 4})), 1.8 * 1.8, 1e-12);
  EXPECT_NEAR(condition_number(make_design({DesignII{2.0}, 8, 4})), 81.0, 1e-10);
  EXPECT_NEAR(condition_number(make_design({DesignII{-0.2}, 8, 4})), 25.0, 1e-10);
  EXPECT_NEAR(regressor_correlation(make_design({DesignII{0.2}, 8, 4}))(0, 1), 0.56 / 1.56, 1e-14);
  EXPECT_NEAR(regressor_correlation(make_design({DesignII{-0.2}, 8, 4}))(2, 3), -0.24 / 0.76, 1e-14);
  EXPECT_NEAR(regressor_correlation(make_design({DesignII{2.0}, 8, 4}))(0, 3), 20.0 / 21.0, 1e-14);
}

TEST(Design, IHasGramEqualToNOmega) {
  const Matrix X = make_design({DesignI{0.5}, 12, 3});
  const Matrix G = X.transpose() * X;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(G(i, j), 12.0 * std::pow(0.5, std::abs(i - j)), 1e-12);
  EXPECT_TRUE(X.bottomRows(9).topRows(3).isApprox(X.topRows(3)));
}

TEST(Design, IIHasZeroTail) {
  const Matrix X = make_design({DesignII{0.2}, 8, 4});
  EXPECT_EQ(X.bottomRows(4).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(X(0, 0), 1.2);
  EXPECT_DOUBLE_EQ(X(0, 1), 0.2);
}

TEST(Design, RejectsBadSpecs) {
  EXPECT_THROW(make_design({DesignI{1.0}, 8, 4}), std::invalid_argument);
  EXPECT_THROW(make_design({DesignI{0.3}, 9, 4}), std::invalid_argument);
  EXPECT_THROW(make_design({DesignII{-0.25}, 8, 4}), std::invalid_argument);
  EXPECT_THROW(make_design({DesignII{0.0}, 3, 4}), std::invalid_argument);
}

// ---- xi ---------------------------------------------------------------------------

TEST(Xi, OrthogonalGramGivesOne) {
  const Vector xi = xi_values(make_design({DesignI{0.0}, 8, 4}));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(xi(i), 1.0, 1e-14);
}

TEST(Xi, TridiagonalInverseOfOmega) {
  // Omega(rho)^{-1} = tridiag(-rho; 1, 1+rho^2, ..., 1+rho^2, 1; -rho) / (1 - rho^2)
  const double rho = 0.5, q = 1.0 - rho * rho;
  const Vector xi = xi_values(make_design({DesignI{rho}, 8, 4}));
  EXPECT_NEAR(xi(0), std::sqrt(1.0 / q), 1e-13);
  EXPECT_NEAR(xi(1), std::sqrt((1.0 + rho * rho) / q), 1e-13);
  EXPECT_NEAR(xi(2), std::sqrt((1.0 + rho * rho) / q), 1e-13);
  EXPECT_NEAR(xi(3), std::sqrt(1.0 / q), 1e-13);
}

TEST(Xi, ColumnScaling) {
  std::mt19937_64 gen(3);
  const Matrix X = random_matrix(10, 3, gen);
  Matrix Xc = X;
  Xc.col(1) *= -2.5;
  const Vector a = xi_values(X), b = xi_values(Xc);
  EXPECT_NEAR(b(1), a(1) / 2.5, 1e-12);
  EXPECT_NEAR(b(0), a(0), 1e-12);
  EXPECT_NEAR(b(2), a(2), 1e-12);
}

TEST(Xi, RankDeficientThrows) {
  Matrix X(6, 2);
  X << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10, 6, 12;
  EXPECT_THROW(xi_values(X), SingularDesign);
  EXPECT_THROW(least_squares({X, Vector::Ones(6)}), SingularDesign);
}

// ---- least squares -------------------------------------------------------------------

TEST(LeastSquares, ExactFit) {
  std::mt19937_64 gen(5);
  const Matrix X = random_matrix(8, 4, gen);
  const Vector theta = random_vector(4, gen);
  const auto r = least_squares({X, X * theta});
  EXPECT_LT((r.theta - theta).cwiseAbs().maxCoeff(), 1e-10);
  ASSERT_TRUE(r.sigma2.has_value());
  EXPECT_LT(*r.sigma2, 1e-20);
}

TEST(LeastSquares, SquareDesignHasNoVarianceEstimate) {
  std::mt19937_64 gen(6);
  const Vector Y = random_vector(5, gen);
  const auto r = least_squares({Matrix::Identity(5, 5), Y});
  EXPECT_LT((r.theta - Y).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_FALSE(r.sigma2.has_value());
}

TEST(LeastSquares, AgreesWithPseudoinverse) {
  std::mt19937_64 gen(7);
  const Matrix X = random_matrix(8, 4, gen);
  const Vector Y = random_vector(8, gen);
  const auto r = least_squares({X, Y});
  const Vector pinv = X.completeOrthogonalDecomposition().pseudoInverse() * Y;
  EXPECT_LT((r.theta - pinv).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(*r.sigma2, (Y - X * pinv).squaredNorm() / 4.0, 1e-10);
}

// ---- thresholding ---------------------------------------------------------------------

TEST(Threshold, FormulaValues) {
  EXPECT_DOUBLE_EQ(threshold_estimate(EstimatorKind::Soft, 2.0, 0.5, 1.0, 1.0), 1.5);
  EXPECT_DOUBLE_EQ(threshold_estimate(EstimatorKind::AdaptiveSoft, 2.0, 0.5, 1.0, 1.0), 1.875);
  EXPECT_DOUBLE_EQ(threshold_estimate(EstimatorKind::Hard, 2.0, 0.5, 1.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(threshold_estimate(EstimatorKind::Soft, -2.0, 0.5, 1.0, 1.0), -1.5);
  for (auto k : {EstimatorKind::Hard, EstimatorKind::Soft, EstimatorKind::AdaptiveSoft}) {
    EXPECT_EQ(threshold_estimate(k, 0.4, 0.5, 1.0, 1.0), 0.0);
    EXPECT_EQ(threshold_estimate(k, -0.5, 0.5, 1.0, 1.0), 0.0);
    EXPECT_EQ(threshold_estimate(k, 0.0, 0.5, 1.0, 1.0), 0.0);
  }
}

TEST(Threshold, OrderingChains) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> z(0.0, 3.0);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  for (int i = 0; i < 20000; ++i) {
    const double ls = z(gen), sc = u(gen), xi = u(gen), eta = u(gen);
    const double s = threshold_estimate(EstimatorKind::Soft, ls, sc, xi, eta);
    const double a = threshold_estimate(EstimatorKind::AdaptiveSoft, ls, sc, xi, eta);
    const double h = threshold_estimate(EstimatorKind::Hard, ls, sc, xi, eta);
    if (ls >= 0) {
      ASSERT_TRUE(0.0 <= s && s <= a && a <= h && h <= ls) << ls;
    } else {
      ASSERT_TRUE(ls <= h && h <= a && a <= s && s <= 0.0) << ls;
    }
  }
}

TEST(Threshold, FeasibleEqualsInfeasibleAtTrueSigma) {
  std::mt19937_64 gen(9);
  const Matrix X = random_matrix(10, 3, gen);
  const Vector Y = random_vector(10, gen);
  const Vector eta = Vector::Constant(3, 0.4);
  const double sh = std::sqrt(*least_squares({X, Y}).sigma2);
  for (auto k : {EstimatorKind::Hard, EstimatorKind::Soft, EstimatorKind::AdaptiveSoft})
    EXPECT_EQ(threshold_estimates(k, {X, Y}, eta), threshold_estimates(k, {X, Y}, eta, sh));
}

TEST(Threshold, ColumnScalingOnDiagonalDesign) {
  std::mt19937_64 gen(10);
  const Matrix X = diagonal_design(gen);
  const Vector Y = random_vector(8, gen, 2.0);
  const Vector eta = Vector::Constant(4, 0.3);
  Matrix Xc = X;
  Xc.col(2) *= -3.0;
  for (auto k : {EstimatorKind::Hard, EstimatorKind::Soft, EstimatorKind::AdaptiveSoft})
    for (std::optional<double> sigma : {std::optional<double>(), std::optional<double>(1.3)}) {
      const Vector a = threshold_estimates(k, {X, Y}, eta, sigma);
      const Vector b = threshold_estimates(k, {Xc, Y}, eta, sigma);
      for (int i = 0; i < 4; ++i) EXPECT_NEAR(b(i), i == 2 ? a(i) / -3.0 : a(i), 1e-12);
    }
}

// ---- lasso ----------------------------------------------------------------------

TEST(Lasso, ZeroPenaltyIsLeastSquares) {
  std::mt19937_64 gen(11);
  const Matrix X = random_matrix(8, 4, gen);
  const Vector Y = random_vector(8, gen);
  LassoConfig cfg;
  const auto ls = least_squares({X, Y});
  EXPECT_LT((lasso({X, Y}, cfg, 1.0) - ls.theta).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((adaptive_lasso({X, Y}, cfg, 1.0) - ls.theta).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Lasso, DiagonalDesignsReduceToThresholding) {
  std::mt19937_64 gen(12);
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix X = diagonal_design(gen);
    const Vector Y = random_vector(8, gen, 2.0);
    const auto ls = least_squares({X, Y});
    const double sh = std::sqrt(*ls.sigma2);
    const Vector xi = xi_values(X);
    LassoConfig cfg;
    cfg.penalty_rule = penalty::PerComponent{{0.1, 0.3, 0.5, 0.9}};
    const Vector l = lasso({X, Y}, cfg, sh);
    const Vector al = adaptive_lasso({X, Y}, cfg, sh);
    const double ep[] = {0.1, 0.3, 0.5, 0.9};
    for (int i = 0; i < 4; ++i) {
      const double t = ls.theta(i);
      const double soft = (t > 0 ? 1 : -1) * std::max(std::abs(t) - sh * ep[i] * xi(i) * xi(i), 0.0);
      const double ad = t * std::max(1.0 - sh * sh * xi(i) * xi(i) * ep[i] * ep[i] / (t * t), 0.0);
      EXPECT_NEAR(l(i), soft, 1e-10);
      EXPECT_NEAR(al(i), ad, 1e-10);
    }
  }
}

TEST(Lasso, MatchesProximalGradientAndBeatsPerturbations) {
  std::mt19937_64 gen(13);
  const Matrix X = random_matrix(8, 4, gen);
  const Vector Y = X * Vector{{2.0, -1.0, 0.0, 0.05}} + random_vector(8, gen, 0.5);
  const double sh = std::sqrt(*least_squares({X, Y}).sigma2);
  LassoConfig cfg;
  cfg.penalty_rule = penalty::EtaXiInverse{0.4};
  const Vector th = lasso({X, Y}, cfg, sh);
  const Vector lambda = 8.0 * sh * eta_prime(cfg.penalty_rule, X);
  EXPECT_LT((th - ista({X, Y}, lambda)).cwiseAbs().maxCoeff(), 1e-8);
  const double best = objective({X, Y}, th, lambda);
  std::normal_distribution<double> z(0.0, 1e-3);
  for (int i = 0; i < 100000; ++i) {
    Vector p = th;
    for (int j = 0; j < 4; ++j) p(j) += z(gen);
    ASSERT_LE(best, objective({X, Y}, p, lambda) + 1e-12);
  }
}

TEST(AdaptiveLasso, IsAReweightedLasso) {
  std::mt19937_64 gen(14);
  const Matrix X = random_matrix(8, 4, gen);
  const Vector Y = X * Vector{{1.5, -0.5, 0.2, 0.0}} + random_vector(8, gen, 0.5);
  const auto ls = least_squares({X, Y});
  const double sh = std::sqrt(*ls.sigma2);
  LassoConfig cfg;
  cfg.penalty_rule = penalty::Constant{0.5};
  const Vector al = adaptive_lasso({X, Y}, cfg, sh);
  // n sigma^2 eta'^2 / |ls| = n sigma (sigma eta'^2 / |ls|)
  std::vector<double> w(4);
  for (int i = 0; i < 4; ++i) w[i] = sh * 0.25 / std::abs(ls.theta(i));
  LassoConfig rw;
  rw.penalty_rule = penalty::PerComponent{w};
  EXPECT_LT((al - lasso({X, Y}, rw, sh)).cwiseAbs().maxCoeff(), 1e-8);
  Vector lambda(4);
  for (int i = 0; i < 4; ++i) lambda(i) = 8.0 * sh * w[i];
  EXPECT_LT((al - ista({X, Y}, lambda)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Lasso, FittedValuesInvariantUnderColumnScaling) {
  std::mt19937_64 gen(15);
  const Matrix X = random_matrix(10, 3, gen);
  const Vector Y = X * Vector{{1.0, -2.0, 0.3}} + random_vector(10, gen, 0.7);
  const double sh = std::sqrt(*least_squares({X, Y}).sigma2);
  Matrix Xc = X;
  Xc.col(0) *= 4.0;
  for (PenaltyRule rule : {PenaltyRule(penalty::EtaXiInverse{0.5}), PenaltyRule(penalty::EtaPsi{0.5})}) {
    LassoConfig cfg;
    cfg.penalty_rule = rule;
    const Vector a = lasso({X, Y}, cfg, sh), b = lasso({Xc, Y}, cfg, sh);
    EXPECT_LT((X * a - Xc * b).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(b(0), a(0) / 4.0, 1e-8);
  }
  LassoConfig cfg;
  cfg.penalty_rule = penalty::Constant{0.5};
  const Vector a = adaptive_lasso({X, Y}, cfg, sh), b = adaptive_lasso({Xc, Y}, cfg, sh);
  EXPECT_LT((X * a - Xc * b).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Lasso, ExactZerosAndErrors) {
  std::mt19937_64 gen(16);
  const Matrix X = make_design({DesignI{0.9}, 8, 4});
  const Vector Y = random_vector(8, gen, 0.1);
  LassoConfig cfg;
  cfg.penalty_rule = penalty::Constant{5.0};
  const Vector th = lasso({X, Y}, cfg, 1.0);
  EXPECT_EQ(th.cwiseAbs().maxCoeff(), 0.0);

  cfg.penalty_rule = penalty::Constant{0.05};
  cfg.max_sweeps = 1;
  cfg.tol = 1e-15;
  try {
    lasso({X, X * Vector{{3.0, 1.5, 0.0, 0.0}} + Y}, cfg, 1.0);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence &e) {
    EXPECT_GT(e.last_change(), 1e-15);
    EXPECT_EQ(e.last_iterate().size(), 4u);
  }
  cfg.max_sweeps = 0;
  EXPECT_THROW(lasso({X, Y}, cfg, 1.0), std::invalid_argument);
  cfg.max_sweeps = 10;
  EXPECT_THROW(lasso({X, Y}, cfg, 0.0), std::invalid_argument);

  Matrix D = Matrix::Zero(4, 2);
  D(0, 0) = D(1, 1) = 1.0;
  Vector Yz(4);
  Yz << 1.0, 0.0, 0.3, -0.2;
  EXPECT_THROW(adaptive_lasso({D, Yz}, LassoConfig{}, 1.0), std::domain_error);
}
