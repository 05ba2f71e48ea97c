#ifndef THRESHOLDING_MC_HARNESS_HPP_
#define THRESHOLDING_MC_HARNESS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "thresholding/csv.hpp"
#include "thresholding/estimators.hpp"
#include "thresholding/finite_dist.hpp"

namespace thresholding {

// ---- random streams -------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// SplitMix64 as a UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64(state_ - 0x9E3779B97F4A7C15ULL);
  }

 private:
  std::uint64_t state_;
};

/// The stream of replication rep under seed; independent of scheduling.
inline SplitMix64 replication_stream(std::uint64_t seed, std::uint64_t rep) {
  return SplitMix64(splitmix64(splitmix64(seed) ^ (rep * 0xD1B54A32D192ED03ULL + 1)));
}

namespace detail {

template <typename Body>
void parallel_reps(int reps, int threads, const Body &body) {
  if (threads <= 0) threads = int(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, std::max(reps, 1));
  if (threads == 1) {
    for (int r = 0; r < reps; ++r) body(r);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int r = t; r < reps; r += threads) body(r);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto &th : pool) th.join();
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

// ---- empirical laws -------------------------------------------------------

/// Right-continuous step cdf of a sample; the atom sits among the samples.
class EmpiricalMixedCdf {
 public:
  EmpiricalMixedCdf(std::vector<double> samples, double zero_location)
      : sorted_(std::move(samples)), zero_location_(zero_location) {
    if (sorted_.empty()) throw std::invalid_argument("empirical cdf needs samples");
    std::sort(sorted_.begin(), sorted_.end());
  }

  double operator()(ExtReal x) const {
    if (x.is_pos_inf()) return 1.0;
    if (x.is_neg_inf()) return 0.0;
    auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x.value());
    return double(it - sorted_.begin()) / sorted_.size();
  }

  double left_limit(double x) const {
    auto it = std::lower_bound(sorted_.begin(), sorted_.end(), x);
    return double(it - sorted_.begin()) / sorted_.size();
  }

  double zero_location() const { return zero_location_; }
  std::size_t size() const { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
  double zero_location_;
};

inline EmpiricalMixedCdf empirical_mixed_cdf(std::vector<double> samples, double zero_location) {
  return EmpiricalMixedCdf(std::move(samples), zero_location);
}

/// Largest gap between the two cdfs on the grid, also comparing left limits
/// so the jump at the atom is seen from both sides.
inline double ks_distance(const EmpiricalMixedCdf &emp, const MixtureDistribution &analytic,
                          const std::vector<double> &grid) {
  double worst = 0.0;
  for (double x : grid) {
    const double fa = analytic.cdf(x);
    worst = std::max(worst, std::abs(emp(x) - fa));
    const double fa_left = x == analytic.atom_location ? fa - analytic.atom_weight : fa;
    worst = std::max(worst, std::abs(emp.left_limit(x) - fa_left));
  }
  return worst;
}

/// count equally spaced points on [lo, hi] plus the atom and a point just
/// below it.
inline std::vector<double> distribution_grid(double lo, double hi, int count,
                                             std::optional<double> atom = {}) {
  std::vector<double> g;
  g.reserve(count + 2);
  for (int i = 0; i < count; ++i) g.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  if (atom) {
    g.push_back(*atom);
    g.push_back(std::nextafter(*atom, -std::numeric_limits<double>::infinity()));
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

// ---- study ----------------------------------------------------------------

enum class StudyEstimator { Lasso, AdaptiveLasso, Hard, Soft, AdaptiveSoft };

inline const char *to_string(StudyEstimator e) {
  switch (e) {
    case StudyEstimator::Lasso: return "lasso";
    case StudyEstimator::AdaptiveLasso: return "adaptive-lasso";
    case StudyEstimator::Hard: return "hard";
    case StudyEstimator::Soft: return "soft";
    case StudyEstimator::AdaptiveSoft: return "adaptive";
  }
  return "?";
}

/// The thresholding estimator whose law the study overlays.
inline EstimatorKind overlay_kind(StudyEstimator e) {
  switch (e) {
    case StudyEstimator::Hard: return EstimatorKind::Hard;
    case StudyEstimator::Lasso:
    case StudyEstimator::Soft: return EstimatorKind::Soft;
    case StudyEstimator::AdaptiveLasso:
    case StudyEstimator::AdaptiveSoft: return EstimatorKind::AdaptiveSoft;
  }
  return EstimatorKind::Soft;
}

struct SimConfig {
  DesignSpec design{DesignI{0.3}, 8, 4};
  std::vector<double> theta{3.0, 1.5, 0.0, 0.0};
  double sigma = 1.0;
  std::optional<double> eta;  // defaults to default_eta(n)
  StudyEstimator estimator = StudyEstimator::AdaptiveLasso;
  bool feasible = true;
  int reps = 10000;
  std::uint64_t seed = 0;
  int threads = 0;                    // 0: hardware concurrency
  std::optional<double> noise_sigma;  // test hook; defaults to sigma
  bool overlay = true;
  int overlay_points = 601;

  double eta_value() const { return eta ? *eta : default_eta(design.n); }

  void validate() const {
    design.validate();
    if (reps < 1) throw std::invalid_argument("reps must be >= 1");
    if (int(theta.size()) != design.k) throw std::invalid_argument("theta must have length k");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!(eta_value() > 0.0)) throw std::invalid_argument("eta must be positive");
    if (noise_sigma && !(*noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
    if (feasible && design.n <= design.k)
      throw std::invalid_argument("feasible estimators need n > k");
  }
};

struct Histogram {
  std::vector<double> edges;    // bins + 1 edges
  std::vector<double> heights;  // mass-normalized
  int below = 0, above = 0;     // clipped into the end bins

  double mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < heights.size(); ++i) m += heights[i] * (edges[i + 1] - edges[i]);
    return m;
  }
};

struct OverlayPoint {
  double x, cdf, ac_density;
};

struct ComponentResult {
  double theta = 0.0, xi = 0.0;
  double zero_proportion = 0.0;
  std::vector<double> scaled_samples;  // includes the atom values
  Histogram histogram;
  double atom_location = 0.0;  // scaled location of a zero estimate
  double atom_weight = 0.0;    // analytic, from the overlay law
  std::vector<OverlayPoint> overlay;
};

struct SimResult {
  std::vector<ComponentResult> components;
  int failures = 0;  // replications where the solver did not converge
  int reps = 0;
  double condition_number = 0.0;
};

inline constexpr int kHistogramBins = 60;
inline constexpr double kHistogramHalfWidth = 6.0;

/// Mass-normalized histogram of the nonzero values: total mass is their share
/// among total_count.
inline Histogram make_histogram(const std::vector<double> &nonzero, std::size_t total_count) {
  Histogram h;
  const double lo = -kHistogramHalfWidth, hi = kHistogramHalfWidth;
  const double width = (hi - lo) / kHistogramBins;
  for (int i = 0; i <= kHistogramBins; ++i) h.edges.push_back(lo + i * width);
  std::vector<std::size_t> counts(kHistogramBins, 0);
  for (double v : nonzero) {
    int bin = int(std::floor((v - lo) / width));
    if (bin < 0) {
      bin = 0;
      ++h.below;
    } else if (bin >= kHistogramBins) {
      if (v > hi) ++h.above;
      bin = kHistogramBins - 1;
    }
    ++counts[bin];
  }
  for (auto c : counts) h.heights.push_back(double(c) / (double(total_count) * width));
  return h;
}

/// Finite-sample law of the overlay estimator for component i, on the scale
/// n^{1/2} (estimate - theta) / (sigma xi).
inline MixtureDistribution component_law(EstimatorKind kind, const VarianceMode &mode, int n,
                                         double xi, double theta, double sigma, double eta) {
  ComponentSpec spec;
  spec.n = n;
  spec.xi = xi;
  spec.theta = theta;
  spec.sigma = sigma;
  spec.eta = eta;
  spec.alpha = alpha_preset::root_n_over_xi(n, xi);
  return as_mixture(kind, mode, spec);
}

inline SimResult run_study(const SimConfig &config) {
  config.validate();
  const Matrix X = make_design(config.design);
  const int n = config.design.n, k = config.design.k;
  const Vector xi = xi_values(X);
  const Vector theta = Eigen::Map<const Vector>(config.theta.data(), k);
  const Vector mean = X * theta;
  const double eta = config.eta_value();
  const double noise = config.noise_sigma.value_or(config.sigma);

  // one factorization serves every replication
  Eigen::ColPivHouseholderQR<Matrix> qr(X);
  const Matrix G = X.transpose() * X;
  LassoConfig lasso_cfg;
  Vector eta_p;
  if (config.estimator == StudyEstimator::Lasso) {
    lasso_cfg.penalty_rule = penalty::EtaXiInverse{eta};
  } else {
    lasso_cfg.penalty_rule = penalty::Constant{eta};
  }
  eta_p = eta_prime(lasso_cfg.penalty_rule, X);

  const int reps = config.reps;
  std::vector<double> estimates(std::size_t(reps) * k, 0.0);
  std::vector<char> failed(reps, 0);

  detail::parallel_reps(reps, config.threads, [&](int r) {
    auto gen = replication_stream(config.seed, std::uint64_t(r));
    std::normal_distribution<double> z;
    Vector Y(n);
    for (int j = 0; j < n; ++j) Y(j) = mean(j) + noise * z(gen);
    const Vector ls = qr.solve(Y);
    double scale = config.sigma;
    if (config.feasible) scale = std::sqrt((Y - X * ls).squaredNorm() / double(n - k));
    double *out = &estimates[std::size_t(r) * k];
    switch (config.estimator) {
      case StudyEstimator::Hard:
      case StudyEstimator::Soft:
      case StudyEstimator::AdaptiveSoft: {
        const auto kind = overlay_kind(config.estimator);
        for (int i = 0; i < k; ++i) out[i] = threshold_estimate(kind, ls(i), scale, xi(i), eta);
        return;
      }
      case StudyEstimator::Lasso:
      case StudyEstimator::AdaptiveLasso: {
        Vector lambda = double(n) * scale * eta_p;
        if (config.estimator == StudyEstimator::AdaptiveLasso) {
          if ((ls.array() == 0.0).any()) {
            failed[r] = 1;
            return;
          }
          lambda = (double(n) * scale * scale * eta_p.array().square() / ls.array().abs()).matrix();
        }
        try {
          const Vector th = weighted_lasso_cd(G, X.transpose() * Y, lambda, lasso_cfg.tol,
                                              lasso_cfg.max_sweeps, ls);
          for (int i = 0; i < k; ++i) out[i] = th(i);
        } catch (const NonConvergence &) {
          failed[r] = 1;
        }
        return;
      }
    }
  });

  SimResult result;
  result.reps = reps;
  result.condition_number = condition_number(X);
  result.failures = int(std::count(failed.begin(), failed.end(), 1));
  if (result.failures * 1000 > reps)
    throw NonConvergence("more than 0.1% of replications failed (" +
                             std::to_string(result.failures) + " of " + std::to_string(reps) + ")",
                         double(result.failures) / reps);
  const std::size_t used = std::size_t(reps - result.failures);

  const EstimatorKind kind = overlay_kind(config.estimator);
  const VarianceMode mode = config.feasible ? VarianceMode(Unknown{n - k}) : VarianceMode(Known{});
  const double rn = std::sqrt(double(n));

  for (int i = 0; i < k; ++i) {
    ComponentResult c;
    c.theta = theta(i);
    c.xi = xi(i);
    const double scale = rn / (config.sigma * xi(i));
    c.atom_location = -scale * theta(i);
    std::vector<double> nonzero;
    std::size_t zeros = 0;
    c.scaled_samples.reserve(used);
    for (int r = 0; r < reps; ++r) {
      if (failed[r]) continue;
      const double est = estimates[std::size_t(r) * k + i];
      const double v = est == 0.0 ? c.atom_location : scale * (est - theta(i));
      c.scaled_samples.push_back(v);
      if (est == 0.0)
        ++zeros;
      else
        nonzero.push_back(v);
    }
    c.zero_proportion = double(zeros) / double(used);
    c.histogram = make_histogram(nonzero, used);
    if (config.overlay) {
      const auto law = component_law(kind, mode, n, xi(i), theta(i), config.sigma, eta);
      c.atom_weight = law.atom_weight;
      const auto grid = distribution_grid(-kHistogramHalfWidth, kHistogramHalfWidth,
                                          config.overlay_points, c.atom_location);
      for (double x : grid) c.overlay.push_back({x, law.cdf(x), law.ac_density(x)});
    }
    result.components.push_back(std::move(c));
  }
  return result;
}

// ---- single-component sampler ---------------------------------------------

/// Draws the thresholding estimator of one coordinate straight from its
/// ingredients: LS ~ N(theta, sigma^2 xi^2 / n) and, for unknown variance,
/// sigma-hat^2 ~ sigma^2 chi2_m / m independent of it. For a diagonal design
/// this is the estimator's exact law without forming Y.
/// Returns (estimate - theta) / sigma per replication.
inline std::vector<double> sample_component(EstimatorKind kind, const VarianceMode &mode,
                                            const ComponentSpec &spec, int reps,
                                            std::uint64_t seed, int threads = 0) {
  validate(spec, mode);
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  std::vector<double> out(reps);
  const double sd = spec.sigma * spec.xi / std::sqrt(double(spec.n));
  const std::optional<int> m =
      is_known(mode) ? std::nullopt : std::optional<int>(std::get<Unknown>(mode).m);
  detail::parallel_reps(reps, threads, [&](int r) {
    auto gen = replication_stream(seed, std::uint64_t(r));
    std::normal_distribution<double> z;
    const double ls = spec.theta + sd * z(gen);
    double scale = spec.sigma;
    if (m) {
      std::chi_squared_distribution<double> chi(*m);
      scale = spec.sigma * std::sqrt(chi(gen) / *m);
    }
    out[r] = (threshold_estimate(kind, ls, scale, spec.xi, spec.eta) - spec.theta) / spec.sigma;
  });
  return out;
}

// ---- figure data ----------------------------------------------------------

struct Panel {
  int figure;  // 1..12
  StudyEstimator estimator;
  DesignSpec design;
};

inline std::vector<Panel> study_panels() {
  const std::vector<DesignSpec> designs = {
      {DesignI{0.3}, 8, 4},  {DesignI{0.5}, 8, 4}, {DesignI{0.9}, 8, 4},
      {DesignII{0.2}, 8, 4}, {DesignII{2.0}, 8, 4}, {DesignII{-0.2}, 8, 4}};
  std::vector<Panel> out;
  int fig = 1;
  for (auto est : {StudyEstimator::AdaptiveLasso, StudyEstimator::Lasso})
    for (const auto &d : designs) out.push_back({fig++, est, d});
  return out;
}

inline std::string panel_slug(const Panel &p) {
  std::string d;
  if (auto a = std::get_if<DesignI>(&p.design.variant))
    d = "design1_rho" + format_double(a->rho);
  else
    d = "design2_c" + format_double(std::get<DesignII>(p.design.variant).c);
  std::string s = "fig" + std::string(p.figure < 10 ? "0" : "") + std::to_string(p.figure) + "_" +
                  to_string(p.estimator) + "_" + d;
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

inline const char *kFigureSchema =
    "component_<i>.csv columns\n"
    "  record       zero | bin | overlay\n"
    "  x            zero: scaled location of a zero estimate; bin: left edge; overlay: grid point\n"
    "  x_hi         bin: right edge\n"
    "  height       zero: empirical zero proportion; bin: mass-normalized histogram height\n"
    "  cdf          overlay: analytic cdf of the thresholding counterpart\n"
    "  ac_density   overlay: density of its absolutely continuous part\n"
    "  atom_location, atom_weight   analytic atom of the thresholding counterpart\n"
    "Scaled units are n^(1/2) (estimate - theta) / (sigma xi).\n"
    "panel.json holds design, condition number, correlation, seed, reps, eta, failures.\n";

/// Writes the data behind the twelve study figures. Returns the files written.
inline std::vector<std::string> reproduce_figures(const std::string &out_dir, std::uint64_t seed,
                                                  int reps = 10000, int threads = 0,
                                                  std::optional<std::vector<int>> only = {}) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  fs::create_directories(out_dir);
  {
    const std::string path = (fs::path(out_dir) / "schema.txt").string();
    auto f = open_for_write(path);
    f << kFigureSchema;
    files.push_back(path);
  }
  for (const auto &panel : study_panels()) {
    if (only && std::find(only->begin(), only->end(), panel.figure) == only->end()) continue;
    SimConfig cfg;
    cfg.design = panel.design;
    cfg.estimator = panel.estimator;
    cfg.reps = reps;
    cfg.seed = splitmix64(seed ^ std::uint64_t(panel.figure));
    cfg.threads = threads;
    const SimResult res = run_study(cfg);

    const fs::path dir = fs::path(out_dir) / panel_slug(panel);
    fs::create_directories(dir);
    for (std::size_t i = 0; i < res.components.size(); ++i) {
      const auto &c = res.components[i];
      const std::string path = (dir / ("component_" + std::to_string(i + 1) + ".csv")).string();
      auto f = open_for_write(path);
      CsvWriter w(f);
      const std::string al = format_double(c.atom_location), aw = format_double(c.atom_weight);
      w.row(std::vector<std::string>{"record", "x", "x_hi", "height", "cdf", "ac_density",
                                     "atom_location", "atom_weight"});
      w.row(std::vector<std::string>{"zero", al, "", format_double(c.zero_proportion), "", "", al, aw});
      for (std::size_t b = 0; b < c.histogram.heights.size(); ++b)
        w.row(std::vector<std::string>{"bin", format_double(c.histogram.edges[b]),
                                       format_double(c.histogram.edges[b + 1]),
                                       format_double(c.histogram.heights[b]), "", "", al, aw});
      for (const auto &o : c.overlay)
        w.row(std::vector<std::string>{"overlay", format_double(o.x), "", "", format_double(o.cdf),
                                       format_double(o.ac_density), al, aw});
      files.push_back(path);
    }

    const Matrix X = make_design(panel.design);
    nlohmann::ordered_json meta;
    meta["figure"] = panel.figure;
    meta["estimator"] = to_string(panel.estimator);
    meta["overlay"] = to_string(overlay_kind(panel.estimator));
    meta["design"] = panel.design.label();
    meta["n"] = panel.design.n;
    meta["k"] = panel.design.k;
    meta["condition_number"] = res.condition_number;
    meta["correlation_12"] = regressor_correlation(X)(0, 1);
    meta["seed"] = cfg.seed;
    meta["reps"] = reps;
    meta["eta"] = cfg.eta_value();
    meta["sigma"] = cfg.sigma;
    meta["theta"] = cfg.theta;
    meta["failures"] = res.failures;
    std::vector<double> zp, aw;
    for (const auto &c : res.components) {
      zp.push_back(c.zero_proportion);
      aw.push_back(c.atom_weight);
    }
    meta["zero_proportion"] = zp;
    meta["overlay_atom_weight"] = aw;
    const std::string path = (dir / "panel.json").string();
    auto f = open_for_write(path);
    f << meta.dump(2) << '\n';
    files.push_back(path);
  }
  return files;
}

}  // namespace thresholding

#endif  // THRESHOLDING_MC_HARNESS_HPP_
