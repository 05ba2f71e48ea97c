#ifndef THRESHOLDING_FINITE_DIST_HPP_
#define THRESHOLDING_FINITE_DIST_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "thresholding/ext_real.hpp"
#include "thresholding/specfun.hpp"

namespace thresholding {

enum class EstimatorKind { Hard, Soft, AdaptiveSoft };

inline const char *to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Hard: return "hard";
    case EstimatorKind::Soft: return "soft";
    case EstimatorKind::AdaptiveSoft: return "adaptive";
  }
  return "?";
}

struct Known {};
struct Unknown {
  int m;
};
using VarianceMode = std::variant<Known, Unknown>;

inline bool is_known(const VarianceMode &mode) {
  return std::holds_alternative<Known>(mode);
}

/// One coordinate's problem data. The residual degrees of freedom live in the
/// Unknown variance mode rather than here.
struct ComponentSpec {
  int n = 1;
  double xi = 1.0;
  double theta = 0.0;
  double sigma = 1.0;
  double eta = 1.0;
  double alpha = 1.0;

  void validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (!positive(xi)) throw std::invalid_argument("xi must be positive");
    if (!positive(sigma)) throw std::invalid_argument("sigma must be positive");
    if (!positive(eta)) throw std::invalid_argument("eta must be positive");
    if (!positive(alpha)) throw std::invalid_argument("alpha must be positive");
    if (!std::isfinite(theta)) throw std::invalid_argument("theta must be finite");
  }
};

namespace alpha_preset {
inline double root_n_over_xi(int n, double xi) { return std::sqrt(double(n)) / xi; }
inline double inverse_xi_eta(double xi, double eta) { return 1.0 / (xi * eta); }
}  // namespace alpha_preset

/// Tuning rule used throughout the simulation study: deletes an irrelevant
/// variable with probability 0.95 under known variance.
inline double default_eta(int n) {
  return normal_quantile(0.975) / std::sqrt(double(n));
}

inline void validate(const ComponentSpec &spec, const VarianceMode &mode) {
  spec.validate();
  if (auto u = std::get_if<Unknown>(&mode)) require_dof(u->m);
}

namespace detail {

// Quantities shared by every formula. u(x) = x / alpha + theta / sigma is
// formed as (x - atom) / alpha so it vanishes exactly at the atom.
struct Geometry {
  double rn, b, atom, c0, band;
  const ComponentSpec &spec;

  explicit Geometry(const ComponentSpec &s)
      : rn(std::sqrt(double(s.n))),
        b(rn / (s.alpha * s.xi)),
        atom(-s.alpha * s.theta / s.sigma),
        c0(rn * s.theta / (s.sigma * s.xi)),
        band(s.xi * s.eta),
        spec(s) {}

  double u(double x) const { return (x - atom) / spec.alpha; }
  // side of the atom from x itself: u underflows to zero next to it
  bool right_of_atom(double x) const { return x >= atom; }
};

inline std::pair<double, double> z_pair(const Geometry &g, double x, double y) {
  const auto &s = g.spec;
  const double a = 0.5 * g.rn / s.xi * (x / s.alpha - s.theta / s.sigma);
  const double r = g.rn * std::hypot(0.5 * g.u(x) / s.xi, y);
  return {a - r, a + r};
}

// Known-variance cdf and density with the threshold parameter set to y.

inline double known_cdf(EstimatorKind kind, const Geometry &g, double x, double y) {
  const double u = g.u(x);
  switch (kind) {
    case EstimatorKind::Hard:
      if (std::abs(u) > g.spec.xi * y) return normal_cdf(g.b * x);
      return g.right_of_atom(x) ? normal_cdf(-g.c0 + g.rn * y) : normal_cdf(-g.c0 - g.rn * y);
    case EstimatorKind::Soft:
      return g.right_of_atom(x) ? normal_cdf(g.b * x + g.rn * y) : normal_cdf(g.b * x - g.rn * y);
    case EstimatorKind::AdaptiveSoft: {
      auto [z1, z2] = z_pair(g, x, y);
      return g.right_of_atom(x) ? normal_cdf(z2) : normal_cdf(z1);
    }
  }
  return 0.0;
}

inline double known_density(EstimatorKind kind, const Geometry &g, double x, double y) {
  const double u = g.u(x);
  switch (kind) {
    case EstimatorKind::Hard:
      return std::abs(u) > g.spec.xi * y ? g.b * normal_pdf(g.b * x) : 0.0;
    case EstimatorKind::Soft:
      if (x > g.atom) return g.b * normal_pdf(g.b * x + g.rn * y);
      if (x < g.atom) return g.b * normal_pdf(g.b * x - g.rn * y);
      return 0.0;
    case EstimatorKind::AdaptiveSoft: {
      if (x == g.atom) return 0.0;
      auto [z1, z2] = z_pair(g, x, y);
      const double h = 0.5 * u / g.spec.xi;
      const double t = h / std::hypot(h, y);
      return x > g.atom ? 0.5 * g.b * normal_pdf(z2) * (1.0 + t)
                     : 0.5 * g.b * normal_pdf(z1) * (1.0 - t);
    }
  }
  return 0.0;
}

inline double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace detail

/// (z1, z2) with z1 <= z2 for the adaptive soft formulas.
inline std::pair<double, double> z_bounds(const ComponentSpec &spec, double x, double y) {
  spec.validate();
  if (!(y >= 0.0)) throw std::invalid_argument("z_bounds: y must be nonnegative");
  return detail::z_pair(detail::Geometry(spec), x, y);
}

/// Probability that the estimator is exactly zero; the same for all kinds.
inline double deletion_probability(const ComponentSpec &spec, const VarianceMode &mode) {
  validate(spec, mode);
  detail::Geometry g(spec);
  const double e = g.rn * spec.eta;
  if (is_known(mode)) return detail::clamp01(normal_interval(-g.c0 - e, -g.c0 + e));
  const int m = std::get<Unknown>(mode).m;
  return detail::clamp01(integrate_rho(m, [&](double s) {
    return normal_interval(-g.c0 - e * s, -g.c0 + e * s);
  }));
}

/// Exact cdf of alpha (estimate - theta) / sigma.
inline double cdf(EstimatorKind kind, const VarianceMode &mode,
                  const ComponentSpec &spec, ExtReal x) {
  validate(spec, mode);
  if (x.is_pos_inf()) return 1.0;
  if (x.is_neg_inf()) return 0.0;
  const double xv = x.value();
  detail::Geometry g(spec);
  if (is_known(mode)) return detail::clamp01(detail::known_cdf(kind, g, xv, spec.eta));

  const int m = std::get<Unknown>(mode).m;
  const double u = g.u(xv);
  const double e = g.rn * spec.eta;
  switch (kind) {
    case EstimatorKind::Hard: {
      // the indicator |u| > xi s eta is active exactly for s < v
      const double v = std::abs(u) / g.band;
      const double kept = normal_cdf(g.b * xv) * chi_scaled_cdf(m, v);
      ChiScaledMeasure S(m);
      const double lo = std::max(v, S.lo());
      double deleted = 0.0;
      if (lo < S.hi()) {
        const double sgn = g.right_of_atom(xv) ? 1.0 : -1.0;
        auto f = [&](double s) {
          return normal_cdf(-g.c0 + sgn * e * s) * chi_scaled_density(m, s);
        };
        deleted = integrate_adaptive(f, lo, S.hi(), kDefaultTol).value;
      }
      return detail::clamp01(kept + deleted);
    }
    case EstimatorKind::Soft:
      return noncentral_t_cdf(m, -g.b * xv, g.right_of_atom(xv) ? e : -e);
    case EstimatorKind::AdaptiveSoft:
      return detail::clamp01(integrate_rho(m, [&](double s) {
        return detail::known_cdf(kind, g, xv, s * spec.eta);
      }));
  }
  return 0.0;
}

/// Density of the absolutely continuous part.
inline double ac_density(EstimatorKind kind, const VarianceMode &mode,
                         const ComponentSpec &spec, double x) {
  validate(spec, mode);
  if (!std::isfinite(x)) return 0.0;
  detail::Geometry g(spec);
  if (is_known(mode)) return detail::known_density(kind, g, x, spec.eta);

  const int m = std::get<Unknown>(mode).m;
  if (kind == EstimatorKind::Hard) {
    const double v = std::abs(g.u(x)) / g.band;
    return g.b * normal_pdf(g.b * x) * chi_scaled_cdf(m, v);
  }
  if (x == g.atom) return 0.0;
  const double d = integrate_rho(m, [&](double s) {
    return detail::known_density(kind, g, x, s * spec.eta);
  }, 1e-12);
  return std::max(d, 0.0);
}

/// An atom plus an absolutely continuous part.
struct MixtureDistribution {
  double atom_location = 0.0;
  double atom_weight = 0.0;
  std::function<double(double)> ac_density;
  std::function<double(ExtReal)> cdf;
  // where the density may jump or kink; integration splits there
  std::vector<double> density_breaks;
  // interval holding all but a negligible part of the continuous mass
  double support_lo = -40.0;
  double support_hi = 40.0;
};

inline MixtureDistribution as_mixture(EstimatorKind kind, const VarianceMode &mode,
                                      const ComponentSpec &spec) {
  validate(spec, mode);
  detail::Geometry g(spec);
  MixtureDistribution out;
  out.atom_location = g.atom;
  out.atom_weight = deletion_probability(spec, mode);
  out.ac_density = [kind, mode, spec](double x) { return ac_density(kind, mode, spec, x); };
  out.cdf = [kind, mode, spec](ExtReal x) { return cdf(kind, mode, spec, x); };
  out.density_breaks = {g.atom};
  // the estimate lies between 0 and the LS estimate, which is N(0, 1/b^2) here
  out.support_lo = std::min(g.atom, -12.0 / g.b);
  out.support_hi = std::max(g.atom, 12.0 / g.b);
  if (kind == EstimatorKind::Hard && is_known(mode)) {
    const double w = spec.alpha * g.band;
    out.density_breaks.push_back(g.atom - w);
    out.density_breaks.push_back(g.atom + w);
  }
  return out;
}

}  // namespace thresholding

#endif  // THRESHOLDING_FINITE_DIST_HPP_
