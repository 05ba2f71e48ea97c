#ifndef THRESHOLDING_ASYMPTOTICS_HPP_
#define THRESHOLDING_ASYMPTOTICS_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "thresholding/errors.hpp"
#include "thresholding/ext_real.hpp"
#include "thresholding/finite_dist.hpp"
#include "thresholding/specfun.hpp"

namespace thresholding {

struct FixedDof {
  int m;
};
struct DivergingDof {};
using DofMode = std::variant<FixedDof, DivergingDof>;

/// Limits of the tuning and parameter sequences. Any field may be absent; a
/// limit that needs an absent field throws MissingRegimeField.
struct RegimeParams {
  std::optional<ExtReal> e;        // lim n^{1/2} eta
  std::optional<ExtReal> nu;       // lim n^{1/2} theta / (sigma xi)
  std::optional<ExtReal> zeta;     // lim theta / (sigma xi eta)
  std::optional<ExtReal> r;        // lim n^{1/2} (eta - zeta theta / (sigma xi))
  std::optional<ExtReal> d;        // n^{1/2} eta / (n-k)^{1/2} -> 2^{1/2} d
  std::optional<ExtReal> r_prime;
  std::optional<ExtReal> w;        // lim n^{1/2} eta^2 xi sigma / theta
  std::optional<DofMode> dof;

  bool consistent() const { return need_e().is_pos_inf(); }

  ExtReal need_e() const {
    auto v = need(e, "e");
    if (v < ExtReal(0.0)) throw std::invalid_argument("e must be >= 0");
    return v;
  }
  ExtReal need_d() const {
    auto v = need(d, "d");
    if (v < ExtReal(0.0)) throw std::invalid_argument("d must be >= 0");
    return v;
  }
  ExtReal need_nu() const { return need(nu, "nu"); }
  ExtReal need_zeta() const { return need(zeta, "zeta"); }
  ExtReal need_r() const { return need(r, "r"); }
  ExtReal need_r_prime() const { return need(r_prime, "r_prime"); }
  ExtReal need_w() const { return need(w, "w"); }
  DofMode need_dof() const {
    if (!dof) throw MissingRegimeField("dof");
    if (auto f = std::get_if<FixedDof>(&*dof)) require_dof(f->m);
    return *dof;
  }

 private:
  static ExtReal need(const std::optional<ExtReal> &v, const char *name) {
    if (!v) throw MissingRegimeField(name);
    return *v;
  }
};

enum class LimitMode { Known, Unknown };

// ---- limit families -------------------------------------------------------

struct StdNormal {};
struct PointMass {
  double loc;
};
struct TwoPointMixture {
  double weight;  // at loc1
  double loc1, loc2;
};
struct ExcisedNormal {
  ExtReal nu;
  double e;
};
struct SoftShiftNormal {
  ExtReal nu;
  double e;
};
struct AdaptiveKnown {
  ExtReal nu;
  double e;
};
struct HardSmoothed {
  ExtReal nu;
  double e;
  int m;
};
struct SoftSmoothed {
  ExtReal nu;
  double e;
  int m;
};
struct AdaptiveSmoothed {
  ExtReal nu;
  double e;
  int m;
};
struct SoftChiFold {
  ExtReal zeta;
  int m;
};
struct AdaptiveChiCdf {
  ExtReal zeta;
  int m;
};
/// Limit of the hard estimator under n^{1/2}/xi scaling when |zeta| = 1. Part
/// of the mass escapes to infinity, so the cdf does not reach 0 (zeta = 1) or
/// 1 (zeta = -1) over the real line.
struct OracleHardBoundary {
  int zeta;  // +1 or -1
  ExtReal r;
};
/// cdf x -> Phi(x + w)
struct ShiftedNormal {
  double w;
};
/// All mass drifts to +inf (direction +1, cdf -> 0) or -inf (direction -1).
struct EscapesToInfinity {
  int direction;
};

using LimitDistribution =
    std::variant<StdNormal, PointMass, TwoPointMixture, ExcisedNormal,
                 SoftShiftNormal, AdaptiveKnown, HardSmoothed, SoftSmoothed,
                 AdaptiveSmoothed, SoftChiFold, AdaptiveChiCdf,
                 OracleHardBoundary, ShiftedNormal, EscapesToInfinity>;

namespace detail {

// The known-variance conservative limits are the finite-sample laws at
// n = 1, xi = 1, sigma = 1, alpha = 1, theta = nu, eta = e; the fixed-dof
// limits are the same laws averaged over rho_m.
inline ComponentSpec canonical_spec(double nu, double e) {
  ComponentSpec s;
  s.n = 1;
  s.xi = 1.0;
  s.sigma = 1.0;
  s.alpha = 1.0;
  s.theta = nu;
  s.eta = e;
  return s;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline double step(double x, double loc) { return x >= loc ? 1.0 : 0.0; }

inline double soft_infinite_nu(ExtReal nu, double e, double x, std::optional<int> m) {
  // |nu| = inf leaves one branch of the soft cdf: N(-sign(nu) e, 1), smoothed
  const double shift = nu.sign() > 0 ? e : -e;
  if (!m) return normal_cdf(x + shift);
  return noncentral_t_cdf(*m, -x, shift);
}

}  // namespace detail

inline std::string limit_name(const LimitDistribution &d) {
  static const char *names[] = {
      "StdNormal",     "PointMass",        "TwoPointMixture", "ExcisedNormal",
      "SoftShiftNormal", "AdaptiveKnown",  "HardSmoothed",    "SoftSmoothed",
      "AdaptiveSmoothed", "SoftChiFold",   "AdaptiveChiCdf",  "OracleHardBoundary",
      "ShiftedNormal", "EscapesToInfinity"};
  return names[d.index()];
}

/// Cdf of a limit family. For EscapesToInfinity this is the pointwise limit
/// on the real line.
inline double limit_cdf(const LimitDistribution &dist, ExtReal x) {
  using detail::canonical_spec;
  using detail::step;
  const bool finite = x.is_finite();
  const double xv = x.value();
  return std::visit(
      detail::overloaded{
          [&](const StdNormal &) { return normal_cdf(x); },
          [&](const PointMass &p) { return step(xv, p.loc); },
          [&](const TwoPointMixture &t) {
            return t.weight * step(xv, t.loc1) + (1.0 - t.weight) * step(xv, t.loc2);
          },
          [&](const ExcisedNormal &h) {
            if (!finite || h.e == 0.0 || h.nu.is_infinite()) return normal_cdf(x);
            return cdf(EstimatorKind::Hard, Known{}, canonical_spec(h.nu.value(), h.e), x);
          },
          [&](const SoftShiftNormal &s) {
            if (!finite || s.e == 0.0) return normal_cdf(x);
            if (s.nu.is_infinite()) return detail::soft_infinite_nu(s.nu, s.e, xv, {});
            return cdf(EstimatorKind::Soft, Known{}, canonical_spec(s.nu.value(), s.e), x);
          },
          [&](const AdaptiveKnown &a) {
            if (!finite || a.e == 0.0 || a.nu.is_infinite()) return normal_cdf(x);
            return cdf(EstimatorKind::AdaptiveSoft, Known{},
                       canonical_spec(a.nu.value(), a.e), x);
          },
          [&](const HardSmoothed &h) {
            if (!finite || h.e == 0.0 || h.nu.is_infinite()) return normal_cdf(x);
            return cdf(EstimatorKind::Hard, Unknown{h.m}, canonical_spec(h.nu.value(), h.e), x);
          },
          [&](const SoftSmoothed &s) {
            if (!finite || s.e == 0.0) return normal_cdf(x);
            if (s.nu.is_infinite()) return detail::soft_infinite_nu(s.nu, s.e, xv, s.m);
            return cdf(EstimatorKind::Soft, Unknown{s.m}, canonical_spec(s.nu.value(), s.e), x);
          },
          [&](const AdaptiveSmoothed &a) {
            if (!finite || a.e == 0.0 || a.nu.is_infinite()) return normal_cdf(x);
            return cdf(EstimatorKind::AdaptiveSoft, Unknown{a.m},
                       canonical_spec(a.nu.value(), a.e), x);
          },
          [&](const SoftChiFold &f) {
            if (!finite) return x.is_pos_inf() ? 1.0 : 0.0;
            const int m = f.m;
            if (f.zeta.is_pos_inf()) return xv >= 0.0 ? 1.0 : chi_scaled_sf(m, -xv);
            if (f.zeta.is_neg_inf()) return chi_scaled_cdf(m, xv);
            const double z = f.zeta.value();
            if (z >= 0.0) {
              if (xv < -z) return 0.0;
              if (xv >= 0.0) return 1.0;
              const double w = chi_scaled_sf(m, z);
              return std::min(1.0, w + chi_scaled_cdf(m, z) - chi_scaled_cdf(m, -xv));
            }
            return xv >= -z ? 1.0 : chi_scaled_cdf(m, xv);
          },
          [&](const AdaptiveChiCdf &a) {
            if (!finite) return x.is_pos_inf() ? 1.0 : 0.0;
            if (a.zeta.is_infinite()) return step(xv, 0.0);
            const double z = a.zeta.value();
            if (z >= 0.0) {
              if (xv >= 0.0) return 1.0;
              return xv >= -z ? chi_square_tail(a.m, a.m * std::abs(xv * z)) : 0.0;
            }
            if (xv >= -z) return 1.0;
            return xv >= 0.0 ? chi_square_cdf(a.m, a.m * std::abs(xv * z)) : 0.0;
          },
          [&](const OracleHardBoundary &o) {
            if (o.zeta > 0) {
              const double pr = normal_cdf(o.r);
              return pr + std::max(normal_cdf(x) - pr, 0.0);
            }
            return normal_cdf(std::min(x, -o.r));
          },
          [&](const ShiftedNormal &s) {
            if (!finite) return x.is_pos_inf() ? 1.0 : 0.0;
            return normal_cdf(xv + s.w);
          },
          [&](const EscapesToInfinity &esc) {
            if (!finite) return x.is_pos_inf() ? 1.0 : 0.0;
            return esc.direction > 0 ? 0.0 : 1.0;
          },
      },
      dist);
}

/// Point masses of a limit family as (location, weight) pairs.
inline std::vector<std::pair<double, double>> limit_atoms(const LimitDistribution &dist) {
  using Atoms = std::vector<std::pair<double, double>>;
  auto conservative_atom = [](ExtReal nu, double e, std::optional<int> m) -> Atoms {
    if (nu.is_infinite() || e == 0.0) return {};
    const auto spec = detail::canonical_spec(nu.value(), e);
    const double w = m ? deletion_probability(spec, Unknown{*m})
                       : deletion_probability(spec, Known{});
    return {{-nu.value(), w}};
  };
  return std::visit(
      detail::overloaded{
          [](const StdNormal &) { return Atoms{}; },
          [](const PointMass &p) { return Atoms{{p.loc, 1.0}}; },
          [](const TwoPointMixture &t) {
            return Atoms{{t.loc1, t.weight}, {t.loc2, 1.0 - t.weight}};
          },
          [&](const ExcisedNormal &h) { return conservative_atom(h.nu, h.e, {}); },
          [&](const SoftShiftNormal &h) { return conservative_atom(h.nu, h.e, {}); },
          [&](const AdaptiveKnown &h) { return conservative_atom(h.nu, h.e, {}); },
          [&](const HardSmoothed &h) { return conservative_atom(h.nu, h.e, h.m); },
          [&](const SoftSmoothed &h) { return conservative_atom(h.nu, h.e, h.m); },
          [&](const AdaptiveSmoothed &h) { return conservative_atom(h.nu, h.e, h.m); },
          [](const SoftChiFold &f) {
            if (f.zeta.is_infinite()) return Atoms{};
            return Atoms{{-f.zeta.value(), chi_scaled_sf(f.m, std::abs(f.zeta.value()))}};
          },
          [](const AdaptiveChiCdf &a) {
            if (a.zeta.is_infinite()) return Atoms{{0.0, 1.0}};
            return Atoms{{-a.zeta.value(), chi_scaled_sf(a.m, std::abs(a.zeta.value()))}};
          },
          [](const OracleHardBoundary &) { return Atoms{}; },
          [](const ShiftedNormal &) { return Atoms{}; },
          [](const EscapesToInfinity &) { return Atoms{}; },
      },
      dist);
}

/// Density of the absolutely continuous part of a limit family.
inline double limit_density(const LimitDistribution &dist, double x) {
  using detail::canonical_spec;
  if (!std::isfinite(x)) return 0.0;
  return std::visit(
      detail::overloaded{
          [&](const StdNormal &) { return normal_pdf(x); },
          [](const PointMass &) { return 0.0; },
          [](const TwoPointMixture &) { return 0.0; },
          [&](const ExcisedNormal &h) {
            if (h.e == 0.0 || h.nu.is_infinite()) return normal_pdf(x);
            return ac_density(EstimatorKind::Hard, Known{}, canonical_spec(h.nu.value(), h.e), x);
          },
          [&](const SoftShiftNormal &s) {
            if (s.e == 0.0) return normal_pdf(x);
            if (s.nu.is_infinite()) return normal_pdf(x + (s.nu.sign() > 0 ? s.e : -s.e));
            return ac_density(EstimatorKind::Soft, Known{}, canonical_spec(s.nu.value(), s.e), x);
          },
          [&](const AdaptiveKnown &a) {
            if (a.e == 0.0 || a.nu.is_infinite()) return normal_pdf(x);
            return ac_density(EstimatorKind::AdaptiveSoft, Known{},
                              canonical_spec(a.nu.value(), a.e), x);
          },
          [&](const HardSmoothed &h) {
            if (h.e == 0.0 || h.nu.is_infinite()) return normal_pdf(x);
            return ac_density(EstimatorKind::Hard, Unknown{h.m},
                              canonical_spec(h.nu.value(), h.e), x);
          },
          [&](const SoftSmoothed &s) {
            if (s.e == 0.0) return normal_pdf(x);
            if (s.nu.is_infinite()) {
              const double sh = s.nu.sign() > 0 ? s.e : -s.e;
              return integrate_rho(s.m, [&](double t) { return normal_pdf(x + t * sh); });
            }
            return ac_density(EstimatorKind::Soft, Unknown{s.m},
                              canonical_spec(s.nu.value(), s.e), x);
          },
          [&](const AdaptiveSmoothed &a) {
            if (a.e == 0.0 || a.nu.is_infinite()) return normal_pdf(x);
            return ac_density(EstimatorKind::AdaptiveSoft, Unknown{a.m},
                              canonical_spec(a.nu.value(), a.e), x);
          },
          [&](const SoftChiFold &f) {
            const double z = f.zeta.value();
            const double left = (x + z < 0.0) ? chi_scaled_density(f.m, x) : 0.0;
            const double right = (x + z > 0.0) ? chi_scaled_density(f.m, -x) : 0.0;
            if (f.zeta.is_pos_inf()) return chi_scaled_density(f.m, -x);
            if (f.zeta.is_neg_inf()) return chi_scaled_density(f.m, x);
            return left + right;
          },
          [&](const AdaptiveChiCdf &a) {
            if (a.zeta.is_infinite()) return 0.0;
            const double z = a.zeta.value();
            const int m = a.m;
            if (z > 0.0 && x > -z && x < 0.0) return m * z * chi_square_density(m, -m * x * z);
            if (z < 0.0 && x > 0.0 && x < -z) return -m * z * chi_square_density(m, -m * x * z);
            return 0.0;
          },
          [&](const OracleHardBoundary &o) {
            const bool on = o.zeta > 0 ? ExtReal(x) > o.r : ExtReal(-x) > o.r;
            return on ? normal_pdf(x) : 0.0;
          },
          [&](const ShiftedNormal &s) { return normal_pdf(x + s.w); },
          [](const EscapesToInfinity &) { return 0.0; },
      },
      dist);
}

// ---- selection probabilities ----------------------------------------------

namespace detail {

inline double interval_prob(ExtReal nu, double e) {
  // Phi(-nu + e) - Phi(-nu - e); nu may be infinite, e is finite here
  return normal_interval(ExtReal(-nu.value() - e), ExtReal(-nu.value() + e));
}

inline double smoothed_interval_prob(ExtReal nu, double e, int m) {
  if (nu.is_infinite()) return 0.0;
  const double v = nu.value();
  return std::clamp(integrate_rho(m, [&](double s) {
                      return normal_interval(-v - s * e, -v + s * e);
                    }),
                    0.0, 1.0);
}

/// The integral of Phi(d t + r) phi(t) over the real line.
inline double gaussian_smoothed_phi(double d, ExtReal r) {
  if (r.is_pos_inf()) return 1.0;
  if (r.is_neg_inf()) return 0.0;
  const double rv = r.value();
  auto f = [&](double t) { return normal_cdf(d * t + rv) * normal_pdf(t); };
  const double c = d > 0.0 ? -rv / d : 0.0;
  const double lo = std::min(-40.0, c - 40.0), hi = std::max(40.0, c + 40.0);
  return std::clamp(integrate_adaptive(f, lo, hi, 1e-12, {c}).value, 0.0, 1.0);
}

inline bool abs_is_one(ExtReal z) { return z.is_finite() && std::abs(z.value()) == 1.0; }
inline bool abs_below_one(ExtReal z) { return z.is_finite() && std::abs(z.value()) < 1.0; }

}  // namespace detail

/// Limit of the deletion probability along a moving-parameter sequence.
inline double limit_selection_probability(const RegimeParams &p, LimitMode mode) {
  const ExtReal e = p.need_e();
  if (!e.is_pos_inf()) {
    const ExtReal nu = p.need_nu();
    if (mode == LimitMode::Known) return detail::interval_prob(nu, e.value());
    const DofMode dof = p.need_dof();
    if (auto f = std::get_if<FixedDof>(&dof))
      return detail::smoothed_interval_prob(nu, e.value(), f->m);
    return detail::interval_prob(nu, e.value());
  }

  const ExtReal zeta = p.need_zeta();
  if (mode == LimitMode::Unknown) {
    const DofMode dof = p.need_dof();
    if (auto f = std::get_if<FixedDof>(&dof))
      return zeta.is_infinite() ? 0.0 : chi_scaled_sf(f->m, std::abs(zeta.value()));
  }
  if (detail::abs_below_one(zeta)) return 1.0;
  if (!detail::abs_is_one(zeta)) return 0.0;
  if (mode == LimitMode::Known) return normal_cdf(p.need_r());

  const ExtReal d = p.need_d();
  if (d.value() == 0.0) return normal_cdf(p.need_r());
  if (d.is_finite()) return detail::gaussian_smoothed_phi(d.value(), p.need_r());
  return normal_cdf(p.need_r_prime());
}

// ---- limit distributions --------------------------------------------------

namespace detail {

inline LimitDistribution two_point(double w, double loc1, double loc2) {
  if (w >= 1.0) return PointMass{loc1};
  if (w <= 0.0) return PointMass{loc2};
  return TwoPointMixture{w, loc1, loc2};
}

inline LimitDistribution soft_consistent_point(ExtReal zeta) {
  const double mag = zeta.is_infinite() ? 1.0 : std::min(1.0, std::abs(zeta.value()));
  return PointMass{zeta.sign() == 0 ? 0.0 : -zeta.sign() * mag};
}

inline LimitDistribution adaptive_consistent_point(ExtReal zeta, bool known) {
  if (zeta.is_infinite()) return PointMass{0.0};
  const double z = zeta.value();
  const bool shrink_to_inverse = known ? std::abs(z) >= 1.0 : std::abs(z) > 1.0;
  return PointMass{shrink_to_inverse ? -1.0 / z : -z};
}

inline LimitDistribution hard_consistent_diverging(const RegimeParams &p, ExtReal zeta,
                                                   bool known) {
  if (abs_below_one(zeta)) return PointMass{-zeta.value()};
  if (!abs_is_one(zeta)) return PointMass{0.0};
  const double loc = -zeta.value();
  if (known) return two_point(normal_cdf(p.need_r()), loc, 0.0);
  const ExtReal d = p.need_d();
  if (d.value() == 0.0) return two_point(normal_cdf(p.need_r()), loc, 0.0);
  if (d.is_finite()) return two_point(gaussian_smoothed_phi(d.value(), p.need_r()), loc, 0.0);
  return two_point(normal_cdf(p.need_r_prime()), loc, 0.0);
}

inline LimitDistribution known_conservative(EstimatorKind kind, ExtReal nu, double e) {
  if (e == 0.0) return StdNormal{};
  switch (kind) {
    case EstimatorKind::Hard:
      if (nu.is_infinite()) return StdNormal{};
      return ExcisedNormal{nu, e};
    case EstimatorKind::Soft:
      if (nu.is_infinite()) return ShiftedNormal{nu.sign() * e};
      return SoftShiftNormal{nu, e};
    case EstimatorKind::AdaptiveSoft:
      if (nu.is_infinite()) return StdNormal{};
      return AdaptiveKnown{nu, e};
  }
  return StdNormal{};
}

}  // namespace detail

/// Moving-parameter limit law. Scaling is n^{1/2}/xi under conservative
/// tuning and (xi eta)^{-1} under consistent tuning.
inline LimitDistribution limit_distribution(EstimatorKind kind, LimitMode mode,
                                            const RegimeParams &p) {
  const ExtReal e = p.need_e();
  const bool known = mode == LimitMode::Known;

  if (!e.is_pos_inf()) {
    const ExtReal nu = p.need_nu();
    const double ev = e.value();
    if (known) return detail::known_conservative(kind, nu, ev);
    const DofMode dof = p.need_dof();
    const auto *fixed = std::get_if<FixedDof>(&dof);
    if (!fixed) return detail::known_conservative(kind, nu, ev);
    if (ev == 0.0) return StdNormal{};
    switch (kind) {
      case EstimatorKind::Hard:
        if (nu.is_infinite()) return StdNormal{};
        return HardSmoothed{nu, ev, fixed->m};
      case EstimatorKind::Soft:
        return SoftSmoothed{nu, ev, fixed->m};
      case EstimatorKind::AdaptiveSoft:
        if (nu.is_infinite()) return StdNormal{};
        return AdaptiveSmoothed{nu, ev, fixed->m};
    }
  }

  const ExtReal zeta = p.need_zeta();
  if (known) {
    switch (kind) {
      case EstimatorKind::Hard: return detail::hard_consistent_diverging(p, zeta, true);
      case EstimatorKind::Soft: return detail::soft_consistent_point(zeta);
      case EstimatorKind::AdaptiveSoft: return detail::adaptive_consistent_point(zeta, true);
    }
  }
  const DofMode dof = p.need_dof();
  if (const auto *fixed = std::get_if<FixedDof>(&dof)) {
    switch (kind) {
      case EstimatorKind::Hard:
        if (zeta.is_infinite()) return PointMass{0.0};
        return detail::two_point(chi_scaled_sf(fixed->m, std::abs(zeta.value())),
                                 -zeta.value(), 0.0);
      case EstimatorKind::Soft: return SoftChiFold{zeta, fixed->m};
      case EstimatorKind::AdaptiveSoft:
        if (zeta.is_infinite()) return PointMass{0.0};
        return AdaptiveChiCdf{zeta, fixed->m};
    }
  }
  switch (kind) {
    case EstimatorKind::Hard: return detail::hard_consistent_diverging(p, zeta, false);
    case EstimatorKind::Soft: return detail::soft_consistent_point(zeta);
    case EstimatorKind::AdaptiveSoft: return detail::adaptive_consistent_point(zeta, false);
  }
  throw RegimeNotCovered("unreachable estimator kind");
}

/// Known-variance, consistently tuned limit under the faster n^{1/2}/xi
/// scaling, where the oracle property lives.
inline LimitDistribution oracle_limit(EstimatorKind kind, const RegimeParams &p) {
  if (p.e && !p.e->is_pos_inf())
    throw RegimeNotCovered("oracle limits require consistent tuning (e = inf)");

  auto escape_from_nu = [](ExtReal nu) -> LimitDistribution {
    if (nu.is_finite()) return PointMass{-nu.value()};
    return EscapesToInfinity{-nu.sign()};
  };
  // zeta != 0 forces nu = sign(zeta) inf
  auto implied_nu = [&](ExtReal zeta) -> ExtReal {
    if (zeta.sign() == 0) return p.need_nu();
    const ExtReal nu = zeta.sign() > 0 ? ExtReal::pos_inf() : ExtReal::neg_inf();
    if (p.nu && *p.nu != nu)
      throw std::invalid_argument("nu is inconsistent with a nonzero zeta");
    return nu;
  };

  switch (kind) {
    case EstimatorKind::Soft:
      return escape_from_nu(p.need_nu());
    case EstimatorKind::Hard: {
      const ExtReal zeta = p.need_zeta();
      if (detail::abs_below_one(zeta)) return escape_from_nu(implied_nu(zeta));
      if (!detail::abs_is_one(zeta)) return StdNormal{};
      const ExtReal r = p.need_r();
      if (r.is_neg_inf()) return StdNormal{};
      return OracleHardBoundary{zeta.sign(), r};
    }
    case EstimatorKind::AdaptiveSoft: {
      const ExtReal zeta = p.need_zeta();
      if (zeta.sign() == 0) return escape_from_nu(p.need_nu());
      if (zeta.is_finite()) return EscapesToInfinity{zeta.sign() < 0 ? 1 : -1};
      const ExtReal w = p.need_w();
      if (w.is_finite()) return ShiftedNormal{w.value()};
      if (w.sign() != zeta.sign())
        throw RegimeNotCovered("w and zeta diverge with opposite signs");
      return EscapesToInfinity{w.sign() < 0 ? 1 : -1};
    }
  }
  throw RegimeNotCovered("unreachable estimator kind");
}

/// min(n^{1/2}/xi, (xi eta)^{-1})
inline double uniform_rate(int n, double xi, double eta) {
  if (n < 1 || !(xi > 0.0) || !(eta > 0.0))
    throw std::invalid_argument("uniform_rate: n, xi, eta must be positive");
  return std::min(std::sqrt(double(n)) / xi, 1.0 / (xi * eta));
}

/// |w_a - w_b| + L1 distance of the continuous parts, an upper bound for the
/// total variation distance of two mixtures sharing an atom location.
inline double tv_distance(const MixtureDistribution &a, const MixtureDistribution &b,
                          double tol = 1e-6) {
  const double scale = std::max({1.0, std::abs(a.atom_location), std::abs(b.atom_location)});
  if (std::abs(a.atom_location - b.atom_location) > 1e-12 * scale)
    throw std::invalid_argument("tv_distance: atom locations differ");
  std::vector<double> breaks = a.density_breaks;
  breaks.insert(breaks.end(), b.density_breaks.begin(), b.density_breaks.end());
  const double lo = std::min(a.support_lo, b.support_lo);
  const double hi = std::max(a.support_hi, b.support_hi);
  auto f = [&](double x) { return std::abs(a.ac_density(x) - b.ac_density(x)); };
  const double l1 = integrate_adaptive(f, lo, hi, 0.1 * tol, breaks, 20000).value;
  return std::abs(a.atom_weight - b.atom_weight) + l1;
}

}  // namespace thresholding

#endif  // THRESHOLDING_ASYMPTOTICS_HPP_
