#ifndef THRESHOLDING_SELFCHECK_HPP_
#define THRESHOLDING_SELFCHECK_HPP_

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "thresholding/asymptotics.hpp"
#include "thresholding/estimators.hpp"
#include "thresholding/finite_dist.hpp"
#include "thresholding/mc_harness.hpp"
#include "thresholding/specfun.hpp"

namespace thresholding {

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

namespace detail {

inline const EstimatorKind kAllKinds[] = {EstimatorKind::Hard, EstimatorKind::Soft,
                                          EstimatorKind::AdaptiveSoft};

inline ComponentSpec study_spec(double theta) {
  ComponentSpec s;
  s.n = 8;
  s.theta = theta;
  s.eta = default_eta(8);
  s.alpha = alpha_preset::root_n_over_xi(8, 1.0);
  return s;
}

inline CheckResult check(std::string name, const std::function<std::string()> &body) {
  try {
    std::string failure = body();
    return {std::move(name), failure.empty(), failure};
  } catch (const std::exception &e) {
    return {std::move(name), false, std::string("threw: ") + e.what()};
  }
}

}  // namespace detail

/// Quick versions of the library's invariants. Each entry passes or carries a
/// short reason.
inline std::vector<CheckResult> run_selfcheck() {
  using detail::check;
  using detail::kAllKinds;
  using detail::study_spec;
  std::vector<CheckResult> out;

  out.push_back(check("chi-square tail matches the m=4 closed form", [] {
    for (double x : {0.5, 4.0, 12.0})
      if (std::abs(chi_square_tail(4, x) - std::exp(-x / 2) * (1 + x / 2)) > 1e-13)
        return std::string("mismatch at x=") + std::to_string(x);
    return std::string();
  }));

  out.push_back(check("rescaled chi converges to phi in L1", [] {
    double prev = 2.0;
    for (int m : {4, 16, 64, 256}) {
      const double d = rescaled_chi_l1_distance(m);
      if (!(d < prev)) return "not decreasing at m=" + std::to_string(m);
      prev = d;
    }
    return prev <= 0.05 ? std::string() : std::string("distance above 0.05 at m=256");
  }));

  out.push_back(check("deletion probability 0.95 under the default tuning", [] {
    const double p = deletion_probability(study_spec(0.0), Known{});
    return std::abs(p - 0.95) <= 1e-12 ? std::string() : "got " + std::to_string(p);
  }));

  out.push_back(check("cdfs are monotone with the atom jump equal to the deletion probability", [] {
    for (auto kind : kAllKinds)
      for (VarianceMode mode : {VarianceMode(Known{}), VarianceMode(Unknown{4})}) {
        const auto mix = as_mixture(kind, mode, study_spec(1.5));
        double prev = 0.0;
        for (double x = -8.0; x <= 8.0; x += 0.25) {
          const double f = mix.cdf(x);
          if (f < prev - 1e-12) return std::string("decreasing cdf for ") + to_string(kind);
          prev = f;
        }
        const double a = mix.atom_location;
        const double jump = mix.cdf(a) - mix.cdf(std::nextafter(a, -1e9));
        if (std::abs(jump - mix.atom_weight) > 1e-8)
          return std::string("atom jump mismatch for ") + to_string(kind);
      }
    return std::string();
  }));

  out.push_back(check("atom plus continuous mass is one", [] {
    for (auto kind : kAllKinds)
      for (VarianceMode mode : {VarianceMode(Known{}), VarianceMode(Unknown{4})}) {
        const auto mix = as_mixture(kind, mode, study_spec(1.5));
        const double ac = integrate_adaptive(mix.ac_density, mix.support_lo, mix.support_hi, 1e-8,
                                             mix.density_breaks, 20000)
                              .value;
        if (std::abs(ac + mix.atom_weight - 1.0) > 1e-6)
          return std::string("total mass off for ") + to_string(kind);
      }
    return std::string();
  }));

  out.push_back(check("unknown-variance cdf is the rho-average of the known one", [] {
    auto spec = study_spec(1.5);
    for (auto kind : kAllKinds)
      for (double x : {-5.0, -4.2426, -1.0, 0.0, 2.0}) {
        const double direct = cdf(kind, Unknown{4}, spec, x);
        const double avg = integrate_rho(4, [&](double s) {
          auto t = spec;
          t.eta = s * spec.eta;
          return t.eta > 0.0 ? cdf(kind, Known{}, t, x) : 0.0;
        }, 1e-11, {});
        if (std::abs(direct - avg) > 1e-7) return std::string("mismatch for ") + to_string(kind);
      }
    return std::string();
  }));

  out.push_back(check("ordering chain 0 <= soft <= adaptive <= hard <= LS", [] {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> z(0.0, 2.0);
    for (int i = 0; i < 1000; ++i) {
      const double ls = std::abs(z(gen));
      const double s = threshold_estimate(EstimatorKind::Soft, ls, 1.0, 1.0, 0.7);
      const double a = threshold_estimate(EstimatorKind::AdaptiveSoft, ls, 1.0, 1.0, 0.7);
      const double h = threshold_estimate(EstimatorKind::Hard, ls, 1.0, 1.0, 0.7);
      if (!(0.0 <= s && s <= a && a <= h && h <= ls)) return "violated at ls=" + std::to_string(ls);
    }
    return std::string();
  }));

  out.push_back(check("lasso and adaptive lasso reduce to thresholding on diagonal designs", [] {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int rep = 0; rep < 10; ++rep) {
      Matrix X = Matrix::Zero(8, 4);
      for (int i = 0; i < 4; ++i) X(i, i) = u(gen) * std::sqrt(8.0);
      Vector Y(8);
      for (int i = 0; i < 8; ++i) Y(i) = z(gen);
      const RegressionData data{X, Y};
      const auto ls = least_squares(data);
      const double sh = std::sqrt(*ls.sigma2);
      const Vector xi = xi_values(X);
      LassoConfig cfg;
      cfg.penalty_rule = penalty::EtaXiInverse{0.6};
      const Vector l = lasso(data, cfg, sh);
      cfg.penalty_rule = penalty::Constant{0.6};
      const Vector al = adaptive_lasso(data, cfg, sh);
      for (int i = 0; i < 4; ++i) {
        if (std::abs(l(i) - threshold_estimate(EstimatorKind::Soft, ls.theta(i), sh, xi(i), 0.6)) > 1e-10)
          return std::string("lasso mismatch");
        if (std::abs(al(i) - threshold_estimate(EstimatorKind::AdaptiveSoft, ls.theta(i), sh, xi(i), 0.6)) > 1e-10)
          return std::string("adaptive lasso mismatch");
      }
    }
    return std::string();
  }));

  out.push_back(check("design condition numbers", [] {
    const double c81 = condition_number(make_design({DesignII{2.0}, 8, 4}));
    const double c25 = condition_number(make_design({DesignII{-0.2}, 8, 4}));
    if (std::abs(c81 - 81.0) > 1e-9 || std::abs(c25 - 25.0) > 1e-9) return std::string("off");
    return std::string();
  }));

  out.push_back(check("monte carlo is independent of the thread count", [] {
    SimConfig cfg;
    cfg.reps = 400;
    cfg.seed = 5;
    cfg.overlay = false;
    cfg.threads = 1;
    const auto a = run_study(cfg);
    cfg.threads = 3;
    const auto b = run_study(cfg);
    for (std::size_t i = 0; i < a.components.size(); ++i)
      if (a.components[i].scaled_samples != b.components[i].scaled_samples)
        return std::string("samples differ");
    for (const auto &c : a.components)
      if (std::abs(c.zero_proportion + c.histogram.mass() - 1.0) > 1e-12)
        return std::string("histogram mass does not complete the zero proportion");
    return std::string();
  }));

  out.push_back(check("limit laws are proper where they should be", [] {
    RegimeParams p;
    p.e = 1.95996;
    p.nu = 1.0;
    p.dof = FixedDof{4};
    for (auto kind : kAllKinds)
      for (auto mode : {LimitMode::Known, LimitMode::Unknown}) {
        const auto d = limit_distribution(kind, mode, p);
        if (limit_cdf(d, -40.0) > 1e-9 || limit_cdf(d, 40.0) < 1.0 - 1e-9)
          return "improper " + limit_name(d);
      }
    return std::string();
  }));

  out.push_back(check("uniform rate", [] {
    return std::abs(uniform_rate(100, 1.0, 0.5) - 2.0) < 1e-15 ? std::string() : std::string("off");
  }));

  return out;
}

}  // namespace thresholding

#endif  // THRESHOLDING_SELFCHECK_HPP_
