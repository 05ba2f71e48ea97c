#ifndef THRESHOLDING_SPECFUN_HPP_
#define THRESHOLDING_SPECFUN_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "thresholding/ext_real.hpp"
#include "thresholding/quadrature.hpp"

namespace thresholding {

inline constexpr double kDefaultTol = 1e-10;

// Mass left out on each side when the chi-scaled law is truncated.
inline constexpr double kChiTailMass = 1e-14;

inline double normal_cdf(ExtReal x) {
  if (x.is_pos_inf()) return 1.0;
  if (x.is_neg_inf()) return 0.0;
  // -x/sqrt2 carried as hi + lo; the rounding of a plain product costs about
  // x^2 ulps in the far tail
  constexpr double c_hi = 0.7071067811865476, c_lo = -4.8336466567264565e-17;
  const double v = -x.value();
  const double hi = v * c_hi;
  const double lo = std::fma(v, c_hi, -hi) + v * c_lo;
  const double e = std::erfc(hi);
  return 0.5 * (e - lo * (2.0 / std::sqrt(std::numbers::pi)) * std::exp(-hi * hi));
}

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Phi(hi) - Phi(lo), taken on whichever side avoids cancellation.
inline double normal_interval(ExtReal lo, ExtReal hi) {
  if (!(lo < hi)) return 0.0;
  if (lo.value() >= 0.0) return normal_cdf(-lo) - normal_cdf(-hi);
  return normal_cdf(hi) - normal_cdf(lo);
}

inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must lie in (0, 1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

inline void require_dof(int m) {
  if (m < 1)
    throw std::invalid_argument("degrees of freedom must be >= 1, got " +
                                std::to_string(m));
}

/// rho_m(s): density of sqrt(chi2_m / m), zero for s <= 0.
inline double chi_scaled_density(int m, double s) {
  require_dof(m);
  if (!(s > 0.0)) return 0.0;
  if (std::isinf(s)) return 0.0;
  const double h = 0.5 * m;
  const double x = m * s * s;
  const double log_rho = std::log(2.0 * m * s) + (h - 1.0) * std::log(x) -
                         0.5 * x - h * std::numbers::ln2 - std::lgamma(h);
  return std::exp(log_rho);
}

/// g_m(x), the chi-square density with m degrees of freedom.
inline double chi_square_density(int m, double x) {
  require_dof(m);
  if (!(x > 0.0) || std::isinf(x)) return 0.0;
  const double h = 0.5 * m;
  return std::exp((h - 1.0) * std::log(x) - 0.5 * x - h * std::numbers::ln2 -
                  std::lgamma(h));
}

inline double chi_square_tail(int m, double x) {
  require_dof(m);
  if (!(x >= 0.0))
    throw std::invalid_argument("chi_square_tail: x must be nonnegative");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * m, 0.5 * x);
}

inline double chi_square_cdf(int m, double x) {
  require_dof(m);
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(0.5 * m, 0.5 * x);
}

/// P(S <= s) for S = sqrt(chi2_m / m).
inline double chi_scaled_cdf(int m, double s) {
  if (!(s > 0.0)) return 0.0;
  return chi_square_cdf(m, m * s * s);
}

inline double chi_scaled_sf(int m, double s) {
  if (!(s > 0.0)) return 1.0;
  return chi_square_tail(m, m * s * s);
}

inline double chi_scaled_lower_quantile(int m, double p) {
  require_dof(m);
  return std::sqrt(2.0 * boost::math::gamma_p_inv(0.5 * m, p) / m);
}

inline double chi_scaled_upper_quantile(int m, double q) {
  require_dof(m);
  return std::sqrt(2.0 * boost::math::gamma_q_inv(0.5 * m, q) / m);
}

/// The law of S = sqrt(chi2_m / m) truncated to [lo, hi], which carries all
/// but kChiTailMass of the probability on each side.
class ChiScaledMeasure {
 public:
  explicit ChiScaledMeasure(int m)
      : m_(m),
        lo_((require_dof(m), chi_scaled_lower_quantile(m, kChiTailMass))),
        hi_(chi_scaled_upper_quantile(m, kChiTailMass)) {}

  int dof() const { return m_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  template <typename F>
  QuadratureResult integrate(const F &f, double tol = kDefaultTol,
                             std::vector<double> breaks = {}) const {
    const int m = m_;
    auto g = [&f, m](double s) { return f(s) * chi_scaled_density(m, s); };
    // the density peak sits just below 1; a knot there helps large m
    breaks.push_back(std::sqrt(std::max(m - 1.0, 0.5) / m));
    return integrate_adaptive(g, lo_, hi_, tol, std::move(breaks));
  }

 private:
  int m_;
  double lo_, hi_;
};

/// Integral of f(s) rho_m(s) over s >= 0.
template <typename F>
double integrate_rho(int m, const F &f, double tol = kDefaultTol,
                     std::vector<double> breaks = {}) {
  return ChiScaledMeasure(m).integrate(f, tol, std::move(breaks)).value;
}

/// T_{m,c}(x), the non-central t cdf, through E[Phi(x S - c)].
inline double noncentral_t_cdf(int m, double c, ExtReal x) {
  require_dof(m);
  if (x.is_pos_inf()) return 1.0;
  if (x.is_neg_inf()) return 0.0;
  const double xv = x.value();
  std::vector<double> breaks;
  if (xv != 0.0 && c / xv > 0.0) breaks.push_back(c / xv);
  const double v = integrate_rho(
      m, [xv, c](double s) { return normal_cdf(xv * s - c); }, 1e-11,
      std::move(breaks));
  return std::clamp(v, 0.0, 1.0);
}

/// L1 distance between the density of sqrt(2m) (S - 1) and phi.
inline double rescaled_chi_l1_distance(int m) {
  require_dof(m);
  const double k = std::sqrt(2.0 * m);
  auto signed_diff = [m, k](double t) {
    return chi_scaled_density(m, t / k + 1.0) / k - normal_pdf(t);
  };
  auto diff = [&](double t) { return std::abs(signed_diff(t)); };
  // the rescaled density vanishes below t = -k
  const double lo = std::min(-k, -40.0);
  const double hi = std::max(k * (chi_scaled_upper_quantile(m, 1e-18) - 1.0), 40.0);
  // |.| has kinks where the densities cross; the error estimate misses them
  // unless they are panel ends
  std::vector<double> breaks = {-k, 0.0};
  const double step = 0.01;
  double a = -k, fa = signed_diff(a);
  for (double b = a + step; b <= std::min(hi, 40.0); b += step) {
    const double fb = signed_diff(b);
    if ((fa < 0.0) != (fb < 0.0) && fa != 0.0 && fb != 0.0) {
      boost::uintmax_t iters = 200;
      auto [r1, r2] = boost::math::tools::toms748_solve(
          signed_diff, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), iters);
      breaks.push_back(0.5 * (r1 + r2));
    }
    a = b;
    fa = fb;
  }
  return integrate_adaptive(diff, lo, hi, 1e-11, breaks, 20000).value;
}

}  // namespace thresholding

#endif  // THRESHOLDING_SPECFUN_HPP_
