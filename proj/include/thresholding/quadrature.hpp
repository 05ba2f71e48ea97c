#ifndef THRESHOLDING_QUADRATURE_HPP_
#define THRESHOLDING_QUADRATURE_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "thresholding/errors.hpp"

namespace thresholding {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

namespace detail {

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel &o) const { return error < o.error; }
};

template <typename F>
Panel gk15_panel(const F &f, double a, double b) {
  double err = 0.0;
  // max_depth = 0: one Kronrod panel, the refinement is ours.
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, 0, 0.0, &err);
  return {a, b, v, err};
}

}  // namespace detail

/// Global adaptive Gauss-Kronrod (7/15) on [a, b] with an absolute tolerance.
///
/// Breakpoints inside (a, b) split the initial panels so integrands with jumps
/// or kinks there converge. Throws QuadratureFailure once max_panels is spent.
template <typename F>
QuadratureResult integrate_adaptive(const F &f, double a, double b, double tol,
                                    std::vector<double> breaks = {},
                                    int max_panels = 4000) {
  QuadratureResult out;
  if (!(b > a)) return out;

  std::vector<double> knots{a};
  std::sort(breaks.begin(), breaks.end());
  for (double x : breaks)
    if (std::isfinite(x) && x > knots.back() && x < b) knots.push_back(x);
  knots.push_back(b);

  std::priority_queue<detail::Panel> queue;
  double total = 0.0, total_err = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    auto p = detail::gk15_panel(f, knots[i], knots[i + 1]);
    total += p.value;
    total_err += p.error;
    queue.push(p);
  }
  int panels = static_cast<int>(queue.size());

  auto converged = [&] {
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(total);
    return total_err <= std::max(tol, floor);
  };

  while (!converged() && panels < max_panels) {
    auto worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // panel cannot be split any further; keep it and give up on it
      queue.push({worst.a, worst.b, worst.value, 0.0});
      total_err -= worst.error;
      continue;
    }
    auto left = detail::gk15_panel(f, worst.a, mid);
    auto right = detail::gk15_panel(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++panels;
  }

  // re-sum to shed the drift of the running totals
  double sum = 0.0, err = 0.0;
  while (!queue.empty()) {
    sum += queue.top().value;
    err += queue.top().error;
    queue.pop();
  }
  out.value = sum;
  out.error = err;
  out.panels = panels;
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(sum);
  if (err > std::max(tol, floor)) {
    std::ostringstream msg;
    msg << "quadrature did not reach tolerance " << tol << " on [" << a << ", "
        << b << "] within " << max_panels << " panels (error estimate " << err
        << ")";
    throw QuadratureFailure(msg.str(), err);
  }
  return out;
}

}  // namespace thresholding

#endif  // THRESHOLDING_QUADRATURE_HPP_
