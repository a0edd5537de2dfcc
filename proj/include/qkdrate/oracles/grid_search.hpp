#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "qkdrate/errors.hpp"

namespace qkdrate::oracles {

struct GridMax {
  double argmax = 0.0;
  double max = 0.0;
};

namespace detail {

template <typename F>
double checked_eval(F& f, double x) {
  const double y = f(x);
  if (std::isnan(y)) {
    std::ostringstream os;
    os.precision(17);
    os << "grid_search_max: objective returned NaN at x = " << x;
    throw NumericalFailure(os.str());
  }
  return y;
}

}  // namespace detail

/// Maximizes f on [lo, hi]: coarse grid with spacing `coarse_step` (endpoints
/// included), then golden-section refinement on the bracket around the best
/// grid point until the bracket is narrower than `refine_tol`. Ties resolve
/// to the leftmost point.
template <typename F>
GridMax grid_search_max(F&& f, double lo, double hi, double coarse_step, double refine_tol) {
  if (!(hi >= lo)) throw ArgumentError("grid_search_max: empty interval");
  if (!(coarse_step > 0.0) || !(refine_tol > 0.0)) throw ArgumentError("grid_search_max: step and tolerance must be positive");

  if (hi == lo) return {lo, detail::checked_eval(f, lo)};

  const auto intervals = static_cast<long>(std::ceil((hi - lo) / coarse_step - 1e-9));
  std::vector<double> xs(static_cast<std::size_t>(intervals) + 1);
  for (long i = 0; i <= intervals; ++i) xs[static_cast<std::size_t>(i)] = i == intervals ? hi : lo + i * coarse_step;

  std::size_t best = 0;
  double best_val = detail::checked_eval(f, xs[0]);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double v = detail::checked_eval(f, xs[i]);
    if (v > best_val) {
      best = i;
      best_val = v;
    }
  }

  double a = xs[best == 0 ? 0 : best - 1];
  double b = xs[best + 1 == xs.size() ? best : best + 1];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = detail::checked_eval(f, c);
  double fd = detail::checked_eval(f, d);
  while (b - a > refine_tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = detail::checked_eval(f, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = detail::checked_eval(f, d);
    }
  }
  const double x = 0.5 * (a + b);
  const double fx = detail::checked_eval(f, x);
  if (fx > best_val) return {x, fx};
  return {xs[best], best_val};
}

}  // namespace qkdrate::oracles
