#ifndef THRESHOLDING_ESTIMATORS_HPP_
#define THRESHOLDING_ESTIMATORS_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "thresholding/errors.hpp"
#include "thresholding/finite_dist.hpp"

namespace thresholding {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---- designs --------------------------------------------------------------

/// X'X = n Omega(rho), Omega(rho)_{ij} = rho^{|i-j|}
struct DesignI {
  double rho;
};
/// first k rows I + cE, the rest zero
struct DesignII {
  double c;
};

struct DesignSpec {
  std::variant<DesignI, DesignII> variant;
  int n = 8;
  int k = 4;

  void validate() const {
    if (k < 1 || n < 1) throw std::invalid_argument("design: n and k must be positive");
    if (k > n) throw std::invalid_argument("design: k must not exceed n");
    if (auto d = std::get_if<DesignI>(&variant)) {
      if (!(std::abs(d->rho) < 1.0)) throw std::invalid_argument("design I: rho must lie in (-1, 1)");
      if (n % k != 0) throw std::invalid_argument("design I: k must divide n");
    } else {
      const double c = std::get<DesignII>(variant).c;
      if (!(c > -1.0 / k) || !std::isfinite(c))
        throw std::invalid_argument("design II: c must exceed -1/k");
    }
  }

  std::string label() const {
    if (auto d = std::get_if<DesignI>(&variant)) return "I(rho=" + std::to_string(d->rho) + ")";
    return "II(c=" + std::to_string(std::get<DesignII>(variant).c) + ")";
  }
};

inline Matrix make_design(const DesignSpec &spec) {
  spec.validate();
  const int n = spec.n, k = spec.k;
  Matrix X = Matrix::Zero(n, k);
  if (auto d = std::get_if<DesignI>(&spec.variant)) {
    Matrix omega(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) omega(i, j) = std::pow(d->rho, std::abs(i - j));
    // L L' = Omega. Stacking k^{1/2} L itself would give X'X = n L'L, which
    // shares the spectrum but not the matrix; the transpose gives n Omega.
    const Matrix L = omega.llt().matrixL();
    const Matrix block = std::sqrt(double(k)) * L.transpose();
    for (int b = 0; b < n / k; ++b) X.block(b * k, 0, k, k) = block;
  } else {
    const double c = std::get<DesignII>(spec.variant).c;
    X.topRows(k) = Matrix::Identity(k, k) + c * Matrix::Ones(k, k);
  }
  return X;
}

/// Ratio of the extreme eigenvalues of X'X.
inline double condition_number(const Matrix &X) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(X.transpose() * X, Eigen::EigenvaluesOnly);
  const auto &ev = es.eigenvalues();
  return ev.maxCoeff() / ev.minCoeff();
}

/// Correlation matrix implied by X'X (cosines between the columns).
inline Matrix regressor_correlation(const Matrix &X) {
  const Matrix G = X.transpose() * X;
  const Vector d = G.diagonal().cwiseSqrt().cwiseInverse();
  return d.asDiagonal() * G * d.asDiagonal();
}

namespace detail {

inline constexpr double kRankTol = 1e-10;

inline Eigen::JacobiSVD<Matrix> checked_svd(const Matrix &X, unsigned options) {
  if (X.rows() < X.cols() || X.cols() == 0)
    throw SingularDesign("X must have at least as many rows as columns");
  Eigen::JacobiSVD<Matrix> svd(X, options);
  const auto &s = svd.singularValues();
  if (!(s(s.size() - 1) > kRankTol * s(0)))
    throw SingularDesign("smallest singular value is below 1e-10 of the largest");
  return svd;
}

}  // namespace detail

/// xi_i = sqrt(((X'X/n)^{-1})_{ii})
inline Vector xi_values(const Matrix &X) {
  auto svd = detail::checked_svd(X, Eigen::ComputeThinV);
  const Vector inv_s2 = svd.singularValues().array().square().inverse();
  const Matrix &V = svd.matrixV();
  Vector xi(X.cols());
  for (Eigen::Index i = 0; i < X.cols(); ++i)
    xi(i) = std::sqrt(X.rows() * (V.row(i).array().square() * inv_s2.transpose().array()).sum());
  return xi;
}

/// psi_i = sqrt((X'X/n)_{ii})
inline Vector psi_values(const Matrix &X) {
  return (X.colwise().squaredNorm().transpose() / double(X.rows())).cwiseSqrt();
}

// ---- least squares --------------------------------------------------------

struct RegressionData {
  Matrix X;
  Vector Y;

  void validate() const {
    if (X.rows() != Y.size()) throw std::invalid_argument("X and Y disagree in length");
  }
};

struct LeastSquaresResult {
  Vector theta;
  std::optional<double> sigma2;  // only when n > k
};

inline LeastSquaresResult least_squares(const RegressionData &data) {
  data.validate();
  detail::checked_svd(data.X, 0);
  Eigen::ColPivHouseholderQR<Matrix> qr(data.X);
  LeastSquaresResult out;
  out.theta = qr.solve(data.Y);
  const auto n = data.X.rows(), k = data.X.cols();
  if (n > k) out.sigma2 = (data.Y - data.X * out.theta).squaredNorm() / double(n - k);
  return out;
}

// ---- thresholding ---------------------------------------------------------

/// One component of the hard, soft or adaptive soft estimator; the threshold
/// is scale * xi * eta with scale sigma-hat (feasible) or sigma (infeasible).
inline double threshold_estimate(EstimatorKind kind, double ls, double scale, double xi,
                                 double eta) {
  const double t = scale * xi * eta;
  const double a = std::abs(ls);
  if (!(a > t)) return 0.0;
  switch (kind) {
    case EstimatorKind::Hard: return ls;
    case EstimatorKind::Soft: return ls > 0.0 ? a - t : -(a - t);
    case EstimatorKind::AdaptiveSoft: return ls - t * t / ls;
  }
  return 0.0;
}

/// Componentwise thresholding of the LS estimate. Pass sigma to get the
/// infeasible version; otherwise sigma-hat is used.
inline Vector threshold_estimates(EstimatorKind kind, const RegressionData &data,
                                  const Vector &eta, std::optional<double> sigma = {}) {
  const auto ls = least_squares(data);
  double scale;
  if (sigma) {
    scale = *sigma;
  } else {
    if (!ls.sigma2) throw std::invalid_argument("sigma-hat needs n > k");
    scale = std::sqrt(*ls.sigma2);
  }
  const Vector xi = xi_values(data.X);
  if (eta.size() != xi.size()) throw std::invalid_argument("eta must have length k");
  Vector out(xi.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i)
    out(i) = threshold_estimate(kind, ls.theta(i), scale, xi(i), eta(i));
  return out;
}

// ---- lasso ----------------------------------------------------------------

namespace penalty {
struct PerComponent {
  std::vector<double> eta_prime;
};
/// eta'_i = eta / xi_i
struct EtaXiInverse {
  double eta;
};
/// eta'_i = eta psi_i
struct EtaPsi {
  double eta;
};
struct Constant {
  double eta_prime;
};
}  // namespace penalty

using PenaltyRule =
    std::variant<penalty::PerComponent, penalty::EtaXiInverse, penalty::EtaPsi, penalty::Constant>;

struct LassoConfig {
  PenaltyRule penalty_rule = penalty::Constant{0.0};
  double tol = 1e-12;
  int max_sweeps = 100000;

  void validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("lasso: tol must be positive");
    if (max_sweeps < 1) throw std::invalid_argument("lasso: max_sweeps must be >= 1");
  }
};

inline Vector eta_prime(const PenaltyRule &rule, const Matrix &X) {
  const auto k = X.cols();
  Vector out(k);
  if (auto p = std::get_if<penalty::PerComponent>(&rule)) {
    if (Eigen::Index(p->eta_prime.size()) != k)
      throw std::invalid_argument("penalty vector must have length k");
    for (Eigen::Index i = 0; i < k; ++i) out(i) = p->eta_prime[i];
  } else if (auto p = std::get_if<penalty::EtaXiInverse>(&rule)) {
    out = p->eta * xi_values(X).cwiseInverse();
  } else if (auto p = std::get_if<penalty::EtaPsi>(&rule)) {
    out = p->eta * psi_values(X);
  } else {
    out.setConstant(std::get<penalty::Constant>(rule).eta_prime);
  }
  if ((out.array() < 0.0).any() || !out.allFinite())
    throw std::invalid_argument("penalties must be finite and nonnegative");
  return out;
}

inline double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

/// Minimizes theta'G theta / 2 - b'theta + sum lambda_i |theta_i| by cyclic
/// coordinate descent, starting from start.
inline Vector weighted_lasso_cd(const Matrix &G, const Vector &b, const Vector &lambda,
                                double tol, int max_sweeps, Vector start) {
  const auto k = G.rows();
  Vector theta = std::move(start);
  // r = b - G theta, kept up to date
  Vector r = b - G * theta;
  double change = 0.0;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    change = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double old = theta(i);
      const double z = r(i) + G(i, i) * old;
      const double next = soft_threshold(z, lambda(i)) / G(i, i);
      const double delta = next - old;
      if (delta != 0.0) {
        theta(i) = next;
        r.noalias() -= delta * G.col(i);
        change = std::max(change, std::abs(delta));
      }
    }
    if (change <= tol) return theta;
  }
  throw NonConvergence("coordinate descent exhausted " + std::to_string(max_sweeps) + " sweeps",
                       change, std::vector<double>(theta.data(), theta.data() + k));
}

/// Minimizer of (Y - X theta)'(Y - X theta) + 2 n sigma_hat sum eta'_i |theta_i|.
inline Vector lasso(const RegressionData &data, const LassoConfig &config, double sigma_hat) {
  data.validate();
  config.validate();
  if (!(sigma_hat > 0.0)) throw std::invalid_argument("lasso: sigma_hat must be positive");
  const auto ls = least_squares(data);
  const Matrix G = data.X.transpose() * data.X;
  const Vector b = data.X.transpose() * data.Y;
  const Vector lambda = double(data.X.rows()) * sigma_hat * eta_prime(config.penalty_rule, data.X);
  return weighted_lasso_cd(G, b, lambda, config.tol, config.max_sweeps, ls.theta);
}

/// Minimizer of (Y - X theta)'(Y - X theta)
///   + 2 n sigma_hat^2 sum eta'_i^2 |theta_i| / |theta_LS,i|.
inline Vector adaptive_lasso(const RegressionData &data, const LassoConfig &config,
                             double sigma_hat) {
  data.validate();
  config.validate();
  if (!(sigma_hat > 0.0)) throw std::invalid_argument("adaptive_lasso: sigma_hat must be positive");
  const auto ls = least_squares(data);
  const double floor = 1e3 * std::numeric_limits<double>::epsilon() * ls.theta.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < ls.theta.size(); ++i)
    if (!(std::abs(ls.theta(i)) > floor))
      throw std::domain_error("adaptive_lasso: LS component " + std::to_string(i) +
                              " is zero, weights undefined");
  const Matrix G = data.X.transpose() * data.X;
  const Vector b = data.X.transpose() * data.Y;
  const Vector ep = eta_prime(config.penalty_rule, data.X);
  const double n = double(data.X.rows());
  const Vector lambda =
      (n * sigma_hat * sigma_hat * ep.array().square() / ls.theta.array().abs()).matrix();
  return weighted_lasso_cd(G, b, lambda, config.tol, config.max_sweeps, ls.theta);
}

}  // namespace thresholding

#endif  // THRESHOLDING_ESTIMATORS_HPP_
