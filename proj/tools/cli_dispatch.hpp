#ifndef THRESHOLDING_TOOLS_CLI_DISPATCH_HPP_
#define THRESHOLDING_TOOLS_CLI_DISPATCH_HPP_

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "thresholding.hpp"
#include "thresholding/selfcheck.hpp"

namespace thresholding::cli {

enum ExitCode { kOk = 0, kCheckFailed = 1, kUsage = 2, kNumeric = 3, kNotCovered = 4 };

/// Raw flag values; every subcommand registers the subset it understands.
struct Flags {
  int n = 8, k = 0, dof = 0, reps = 10000, threads = 0, points = 601;
  double xi = 1.0, sigma = 1.0, eta = 0.0, rho = 0.0, c = 0.0, x_min = -6.0, x_max = 6.0;
  std::string theta = "0", eta_rule = "default", alpha = "root-n-over-xi", mode = "known",
              kind = "hard", variant = "I", out, format = "csv", estimator = "adaptive-lasso";
  std::uint64_t seed = 0;
  std::string e, nu, zeta, r, d, r_prime, w;
  std::string dof_mode;  // fixed | diverging
  std::vector<int> figures;
  bool limit = false, oracle = false;
};

struct Row {
  double x, cdf, ac_density;
  std::optional<double> atom_location, atom_weight;
};

class Emitter {
 public:
  Emitter(const Flags &f, std::ostream &stdout_) : format_(f.format) {
    if (!f.out.empty()) {
      file_ = std::make_unique<std::ofstream>(f.out);
      if (!*file_) throw std::runtime_error("cannot open " + f.out);
      os_ = file_.get();
    } else {
      os_ = &stdout_;
    }
  }

  std::ostream &os() { return *os_; }
  bool json() const { return format_ == "json"; }

  void grid(const std::vector<Row> &rows, nlohmann::ordered_json extra = nlohmann::ordered_json::object()) {
    if (json()) {
      auto opt_json = [](std::optional<double> v) {
        return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json();  // null
      };
      auto arr = nlohmann::ordered_json::array();
      for (const auto &r : rows) {
        nlohmann::ordered_json o;
        o["x"] = r.x;
        o["cdf"] = r.cdf;
        o["ac_density"] = r.ac_density;
        o["atom_location"] = opt_json(r.atom_location);
        o["atom_weight"] = opt_json(r.atom_weight);
        arr.push_back(o);
      }
      extra["grid"] = arr;
      os() << extra.dump(2) << '\n';
      return;
    }
    CsvWriter w(os());
    w.row(std::vector<std::string>{"x", "cdf", "ac_density", "atom_location", "atom_weight"});
    auto opt = [](std::optional<double> v) { return v ? format_double(*v) : std::string(); };
    for (const auto &r : rows)
      w.row(std::vector<std::string>{format_double(r.x), format_double(r.cdf),
                                     format_double(r.ac_density), opt(r.atom_location),
                                     opt(r.atom_weight)});
  }

  /// A flat record: one header row and one value row in csv.
  void record(const nlohmann::ordered_json &obj) {
    if (json()) {
      os() << obj.dump(2) << '\n';
      return;
    }
    std::vector<std::string> keys, vals;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      keys.push_back(it.key());
      if (it->is_number_float())
        vals.push_back(format_double(it->get<double>()));
      else if (it->is_string())
        vals.push_back(it->get<std::string>());
      else
        vals.push_back(it->dump());
    }
    CsvWriter w(os());
    w.row(keys);
    w.row(vals);
  }

 private:
  std::string format_;
  std::unique_ptr<std::ofstream> file_;
  std::ostream *os_;
};

// ---- flag interpretation --------------------------------------------------

inline EstimatorKind parse_kind(const std::string &s) {
  if (s == "hard") return EstimatorKind::Hard;
  if (s == "soft") return EstimatorKind::Soft;
  if (s == "adaptive") return EstimatorKind::AdaptiveSoft;
  throw std::invalid_argument("unknown --kind " + s);
}

inline StudyEstimator parse_estimator(const std::string &s) {
  if (s == "lasso") return StudyEstimator::Lasso;
  if (s == "adaptive-lasso") return StudyEstimator::AdaptiveLasso;
  if (s == "hard") return StudyEstimator::Hard;
  if (s == "soft") return StudyEstimator::Soft;
  if (s == "adaptive") return StudyEstimator::AdaptiveSoft;
  throw std::invalid_argument("unknown --estimator " + s);
}

inline std::vector<double> parse_list(const std::string &s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    out.push_back(std::stod(item, &used));
    if (used != item.size()) throw std::invalid_argument("bad number in list: " + item);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

inline double parse_scalar(const std::string &s, const char *flag) {
  const auto v = parse_list(s);
  if (v.size() != 1) throw std::invalid_argument(std::string(flag) + " takes one value here");
  return v[0];
}

inline double eta_of(const Flags &f, const CLI::App &app) {
  if (app.count("--eta")) return f.eta;
  if (f.eta_rule == "default") return default_eta(f.n);
  throw std::invalid_argument("unknown --eta-rule " + f.eta_rule + " (use default or --eta)");
}

inline VarianceMode mode_of(const Flags &f) {
  if (f.mode == "known") return Known{};
  if (f.mode != "unknown") throw std::invalid_argument("--mode must be known or unknown");
  int m = f.dof;
  if (m == 0 && f.k > 0) m = f.n - f.k;
  if (m < 1) throw std::invalid_argument("unknown variance needs --dof (or --k < --n)");
  return Unknown{m};
}

inline ComponentSpec spec_of(const Flags &f, const CLI::App &app) {
  ComponentSpec s;
  s.n = f.n;
  s.xi = f.xi;
  s.theta = parse_scalar(f.theta, "--theta");
  s.sigma = f.sigma;
  s.eta = eta_of(f, app);
  if (f.alpha == "root-n-over-xi")
    s.alpha = alpha_preset::root_n_over_xi(s.n, s.xi);
  else if (f.alpha == "inverse-xi-eta")
    s.alpha = alpha_preset::inverse_xi_eta(s.xi, s.eta);
  else
    s.alpha = parse_scalar(f.alpha, "--alpha");
  s.validate();
  return s;
}

inline DesignSpec design_of(const Flags &f) {
  DesignSpec d;
  d.n = f.n;
  d.k = f.k > 0 ? f.k : 4;
  if (f.variant == "I")
    d.variant = DesignI{f.rho};
  else if (f.variant == "II")
    d.variant = DesignII{f.c};
  else
    throw std::invalid_argument("--variant must be I or II");
  d.validate();
  return d;
}

inline RegimeParams regime_of(const Flags &f) {
  RegimeParams p;
  auto set = [](std::optional<ExtReal> &dst, const std::string &s) {
    if (!s.empty()) dst = ExtReal::parse(s);
  };
  set(p.e, f.e);
  set(p.nu, f.nu);
  set(p.zeta, f.zeta);
  set(p.r, f.r);
  set(p.d, f.d);
  set(p.r_prime, f.r_prime);
  set(p.w, f.w);
  if (f.dof_mode == "diverging")
    p.dof = DivergingDof{};
  else if (f.dof > 0)
    p.dof = FixedDof{f.dof};
  else if (!f.dof_mode.empty() && f.dof_mode != "fixed")
    throw std::invalid_argument("--dof-mode must be fixed or diverging");
  return p;
}

inline LimitMode limit_mode_of(const Flags &f) {
  if (f.mode == "known") return LimitMode::Known;
  if (f.mode == "unknown") return LimitMode::Unknown;
  throw std::invalid_argument("--mode must be known or unknown");
}

inline std::vector<double> grid_of(const Flags &f, std::optional<double> atom) {
  if (f.points < 2 || !(f.x_max > f.x_min)) throw std::invalid_argument("bad grid");
  const bool inside = atom && *atom >= f.x_min && *atom <= f.x_max;
  return distribution_grid(f.x_min, f.x_max, f.points, inside ? atom : std::nullopt);
}

// ---- subcommands ----------------------------------------------------------

inline int run_dist(const Flags &f, const CLI::App &app, std::ostream &out) {
  const auto spec = spec_of(f, app);
  const auto mode = mode_of(f);
  const auto mix = as_mixture(parse_kind(f.kind), mode, spec);
  std::vector<Row> rows;
  for (double x : grid_of(f, mix.atom_location))
    rows.push_back({x, mix.cdf(x), mix.ac_density(x), mix.atom_location, mix.atom_weight});
  Emitter em(f, out);
  nlohmann::ordered_json meta;
  meta["kind"] = f.kind;
  meta["mode"] = f.mode;
  meta["alpha"] = spec.alpha;
  meta["eta"] = spec.eta;
  em.grid(rows, meta);
  return kOk;
}

inline int run_selprob(const Flags &f, const CLI::App &app, std::ostream &out) {
  nlohmann::ordered_json rec;
  if (f.limit) {
    rec["deletion_probability"] = limit_selection_probability(regime_of(f), limit_mode_of(f));
  } else {
    rec["deletion_probability"] = deletion_probability(spec_of(f, app), mode_of(f));
  }
  Emitter(f, out).record(rec);
  return kOk;
}

inline int run_limit(const Flags &f, std::ostream &out) {
  const auto p = regime_of(f);
  const auto kind = parse_kind(f.kind);
  const LimitDistribution dist =
      f.oracle ? oracle_limit(kind, p) : limit_distribution(kind, limit_mode_of(f), p);
  const auto atoms = limit_atoms(dist);
  // the csv atom columns carry the heaviest atom; json lists them all
  std::optional<double> loc, weight;
  for (const auto &[l, w] : atoms)
    if (!weight || w > *weight) {
      loc = l;
      weight = w;
    }
  std::vector<double> grid = grid_of(f, loc);
  for (const auto &a : atoms)
    if (a.first >= f.x_min && a.first <= f.x_max) {
      grid.push_back(a.first);
      grid.push_back(std::nextafter(a.first, -1e300));
    }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<Row> rows;
  for (double x : grid) rows.push_back({x, limit_cdf(dist, x), limit_density(dist, x), loc, weight});
  nlohmann::ordered_json meta;
  meta["family"] = limit_name(dist);
  auto arr = nlohmann::ordered_json::array();
  for (const auto &[l, w] : atoms) arr.push_back({{"location", l}, {"weight", w}});
  meta["atoms"] = arr;
  Emitter(f, out).grid(rows, meta);
  return kOk;
}

inline int run_rate(const Flags &f, const CLI::App &app, std::ostream &out) {
  if (!app.count("--eta")) throw std::invalid_argument("rate needs --eta");
  nlohmann::ordered_json rec;
  rec["uniform_rate"] = uniform_rate(f.n, f.xi, f.eta);
  Emitter(f, out).record(rec);
  return kOk;
}

inline void write_matrix(std::ostream &os, const Matrix &X) {
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) os << (j ? " " : "") << format_double(X(i, j));
    os << '\n';
  }
}

inline int run_design(const Flags &f, std::ostream &out) {
  const auto spec = design_of(f);
  const Matrix X = make_design(spec);
  const Vector xi = xi_values(X);
  nlohmann::ordered_json rec;
  rec["variant"] = f.variant;
  rec["n"] = spec.n;
  rec["k"] = spec.k;
  rec["condition_number"] = condition_number(X);
  rec["correlation_12"] = regressor_correlation(X)(0, 1);
  for (Eigen::Index i = 0; i < xi.size(); ++i) rec["xi_" + std::to_string(i + 1)] = xi(i);
  if (!f.out.empty()) {
    auto file = open_for_write(f.out);
    write_matrix(file, X);
  } else if (f.format == "json") {
    auto rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      std::vector<double> r(X.cols());
      for (Eigen::Index j = 0; j < X.cols(); ++j) r[j] = X(i, j);
      rows.push_back(r);
    }
    rec["matrix"] = rows;
  }
  Flags g = f;
  g.out.clear();  // metadata always goes to stdout
  Emitter(g, out).record(rec);
  return kOk;
}

inline int run_simulate(const Flags &f, const CLI::App &app, std::ostream &out) {
  SimConfig cfg;
  cfg.design = design_of(f);
  if (app.count("--theta")) cfg.theta = parse_list(f.theta);  // else the study's (3, 1.5, 0, 0)
  cfg.sigma = f.sigma;
  cfg.eta = eta_of(f, app);
  cfg.estimator = parse_estimator(f.estimator);
  cfg.feasible = f.mode == "unknown";
  if (f.mode != "known" && f.mode != "unknown")
    throw std::invalid_argument("--mode must be known or unknown");
  cfg.reps = f.reps;
  cfg.seed = f.seed;
  cfg.threads = f.threads;
  const auto res = run_study(cfg);
  Flags g = f;
  g.out.clear();
  Emitter em(g, out);
  if (em.json()) {
    nlohmann::ordered_json j;
    j["condition_number"] = res.condition_number;
    j["failures"] = res.failures;
    auto comps = nlohmann::ordered_json::array();
    for (const auto &c : res.components)
      comps.push_back({{"theta", c.theta}, {"xi", c.xi}, {"zero_proportion", c.zero_proportion},
                       {"atom_location", c.atom_location}, {"atom_weight", c.atom_weight},
                       {"outliers", c.histogram.below + c.histogram.above}});
    j["components"] = comps;
    em.os() << j.dump(2) << '\n';
  } else {
    CsvWriter w(em.os());
    w.row(std::vector<std::string>{"component", "theta", "xi", "zero_proportion", "atom_location",
                                   "atom_weight", "outliers"});
    for (std::size_t i = 0; i < res.components.size(); ++i) {
      const auto &c = res.components[i];
      w.row(std::vector<std::string>{std::to_string(i + 1), format_double(c.theta),
                                     format_double(c.xi), format_double(c.zero_proportion),
                                     format_double(c.atom_location), format_double(c.atom_weight),
                                     std::to_string(c.histogram.below + c.histogram.above)});
    }
  }
  if (!f.out.empty()) {
    auto file = open_for_write(f.out);
    CsvWriter w(file);
    w.row(std::vector<std::string>{"replication", "component", "scaled_value"});
    for (std::size_t i = 0; i < res.components.size(); ++i) {
      const auto &s = res.components[i].scaled_samples;
      for (std::size_t r = 0; r < s.size(); ++r)
        w.row(std::vector<std::string>{std::to_string(r), std::to_string(i + 1), format_double(s[r])});
    }
  }
  return kOk;
}

inline int run_reproduce(const Flags &f, std::ostream &out) {
  if (f.out.empty()) throw std::invalid_argument("reproduce needs --out <directory>");
  std::optional<std::vector<int>> only;
  if (!f.figures.empty()) only = f.figures;
  const auto files = reproduce_figures(f.out, f.seed, f.reps, f.threads, only);
  for (const auto &p : files) out << p << '\n';
  return kOk;
}

inline int run_selfcheck_cmd(std::ostream &out) {
  bool ok = true;
  for (const auto &r : run_selfcheck()) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.passed) out << ": " << r.detail;
    out << '\n';
    ok = ok && r.passed;
  }
  return ok ? kOk : kCheckFailed;
}

// ---- entry ----------------------------------------------------------------

inline void error_record(std::ostream &err, int code, const std::string &type,
                         const std::string &message) {
  nlohmann::ordered_json j;
  j["error"] = type;
  j["message"] = message;
  j["exit_code"] = code;
  err << j.dump() << '\n';
}

inline int dispatch(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Finite-sample and limiting laws of thresholding estimators"};
  app.require_subcommand(1);
  Flags f;

  auto fmt = [&](CLI::App *s) {
    s->add_option("--format", f.format)->check(CLI::IsMember({"csv", "json"}));
    s->add_option("--out", f.out);
  };
  auto component = [&](CLI::App *s) {
    s->add_option("--n", f.n);
    s->add_option("--k", f.k);
    s->add_option("--xi", f.xi);
    s->add_option("--theta", f.theta);
    s->add_option("--sigma", f.sigma);
    s->add_option("--eta", f.eta);
    s->add_option("--eta-rule", f.eta_rule);
    s->add_option("--alpha", f.alpha);
    s->add_option("--mode", f.mode)->check(CLI::IsMember({"known", "unknown"}));
    s->add_option("--dof", f.dof);
  };
  auto regime = [&](CLI::App *s) {
    s->add_option("--e", f.e);
    s->add_option("--nu", f.nu);
    s->add_option("--zeta", f.zeta);
    s->add_option("--r", f.r);
    s->add_option("--d", f.d);
    s->add_option("--r-prime", f.r_prime);
    s->add_option("--w", f.w);
    s->add_option("--dof-mode", f.dof_mode)->check(CLI::IsMember({"fixed", "diverging"}));
  };
  auto grid = [&](CLI::App *s) {
    s->add_option("--x-min", f.x_min);
    s->add_option("--x-max", f.x_max);
    s->add_option("--points", f.points);
  };
  auto design = [&](CLI::App *s) {
    s->add_option("--variant", f.variant)->check(CLI::IsMember({"I", "II"}));
    s->add_option("--rho", f.rho);
    s->add_option("--c", f.c);
    s->add_option("--n", f.n);
    s->add_option("--k", f.k);
  };

  auto *dist = app.add_subcommand("dist", "cdf, density and atom on an x-grid");
  component(dist);
  dist->add_option("--kind", f.kind)->check(CLI::IsMember({"hard", "soft", "adaptive"}));
  grid(dist);
  fmt(dist);

  auto *sel = app.add_subcommand("selprob", "deletion probability, finite or limiting");
  component(sel);
  regime(sel);
  sel->add_flag("--limit", f.limit, "use the regime parameters instead of a finite spec");
  fmt(sel);

  auto *lim = app.add_subcommand("limit", "limit law cdf grid for given regime parameters");
  regime(lim);
  lim->add_option("--kind", f.kind)->check(CLI::IsMember({"hard", "soft", "adaptive"}));
  lim->add_option("--mode", f.mode)->check(CLI::IsMember({"known", "unknown"}));
  lim->add_option("--dof", f.dof);
  lim->add_flag("--oracle", f.oracle, "oracle scaling n^{1/2}/xi under consistent tuning");
  grid(lim);
  fmt(lim);

  auto *rate = app.add_subcommand("rate", "uniform consistency rate");
  rate->add_option("--n", f.n);
  rate->add_option("--xi", f.xi);
  rate->add_option("--eta", f.eta);
  fmt(rate);

  auto *des = app.add_subcommand("design", "design matrix, condition number and xi");
  design(des);
  fmt(des);

  auto *sim = app.add_subcommand("simulate", "Monte Carlo study");
  design(sim);
  sim->add_option("--theta", f.theta);
  sim->add_option("--sigma", f.sigma);
  sim->add_option("--eta", f.eta);
  sim->add_option("--eta-rule", f.eta_rule);
  sim->add_option("--mode", f.mode)->check(CLI::IsMember({"known", "unknown"}));
  sim->add_option("--estimator,--kind", f.estimator)
      ->check(CLI::IsMember({"lasso", "adaptive-lasso", "hard", "soft", "adaptive"}));
  sim->add_option("--reps", f.reps);
  sim->add_option("--seed", f.seed)->required();
  sim->add_option("--threads", f.threads);
  fmt(sim);

  auto *rep = app.add_subcommand("reproduce", "data behind the twelve study figures");
  rep->add_option("--out", f.out)->required();
  rep->add_option("--seed", f.seed)->required();
  rep->add_option("--reps", f.reps);
  rep->add_option("--threads", f.threads);
  rep->add_option("--figures", f.figures, "subset of figure numbers 1..12");

  auto *chk = app.add_subcommand("selfcheck", "run the invariant suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp &e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError &e) {
    error_record(err, kUsage, "usage", e.what());
    return kUsage;
  }

  try {
    if (*dist) return run_dist(f, *dist, out);
    if (*sel) return run_selprob(f, *sel, out);
    if (*lim) return run_limit(f, out);
    if (*rate) return run_rate(f, *rate, out);
    if (*des) return run_design(f, out);
    if (*sim) return run_simulate(f, *sim, out);
    if (*rep) return run_reproduce(f, out);
    if (*chk) return run_selfcheck_cmd(out);
  } catch (const RegimeNotCovered &e) {
    error_record(err, kNotCovered, "regime_not_covered", e.what());
    return kNotCovered;
  } catch (const std::invalid_argument &e) {
    error_record(err, kUsage, "invalid_argument", e.what());
    return kUsage;
  } catch (const std::out_of_range &e) {
    error_record(err, kUsage, "invalid_argument", e.what());
    return kUsage;
  } catch (const std::exception &e) {
    error_record(err, kNumeric, "numeric_failure", e.what());
    return kNumeric;
  }
  return kUsage;
}

}  // namespace thresholding::cli

#endif  // THRESHOLDING_TOOLS_CLI_DISPATCH_HPP_
