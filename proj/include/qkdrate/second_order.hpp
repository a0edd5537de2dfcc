#pragma once

// Second-order (finite blocklength) key-rate formulas:
//
//   K = I_AB + sqrt(V_AB / n) Phi^-1(eps_I)
//       - sup_s [ I_E(s) - sqrt(V_E(s) / n) Phi^-1(eps_II^2) ]
//
// The O(log n / n) remainder is not computed; totals omit it. n may be
// +infinity, which evaluates the first-order (asymptotic) rate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "qkdrate/errors.hpp"
#include "qkdrate/normal.hpp"

namespace qkdrate {

/// Argument fed to Phi^-1 on the eavesdropper term.
enum class EpsConvention { squared, plain };

enum class SupMode { direct, perturbative };

struct SecondOrderParams {
  double n = 1e6;
  double eps_i = 1e-10;
  double eps_ii = 1e-10;
  EpsConvention convention = EpsConvention::squared;

  void validate() const {
    if (!(n >= 1.0)) throw DomainError("SecondOrderParams: n must be >= 1");
    if (!(eps_i > 0.0 && eps_i < 1.0)) throw DomainError("SecondOrderParams: eps_i must lie in (0, 1)");
    if (!(eps_ii > 0.0 && eps_ii < 1.0)) throw DomainError("SecondOrderParams: eps_ii must lie in (0, 1)");
  }

  double eve_eps() const { return convention == EpsConvention::squared ? eps_ii * eps_ii : eps_ii; }
};

/// sqrt(v / n) * Phi^-1(eps); zero in the n -> infinity limit.
inline double second_order_term(double variance, double n, double eps) {
  if (std::isinf(n)) return 0.0;
  return std::sqrt(std::max(variance, 0.0) / n) * std_normal_inv_cdf(eps);
}

struct AdversaryPoint {
  double holevo = 0.0;
  double holevo_variance = 0.0;
  double parameter = 0.0;  // attack parameter (e.g. BB84 s); 0 for singleton sets
};

class UncertaintySet {
 public:
  UncertaintySet() = default;
  explicit UncertaintySet(std::vector<AdversaryPoint> points) : points_(std::move(points)) {
    for (const auto& p : points_) {
      if (!(p.holevo >= -1e-12) || !(p.holevo_variance >= -1e-12)) {
        throw DomainError("UncertaintySet: Holevo information and variance must be nonnegative");
      }
    }
  }

  std::span<const AdversaryPoint> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

 private:
  std::vector<AdversaryPoint> points_;
};

/// Evaluates an attack family on a parameter grid, concurrently when asked.
/// The returned set preserves the order of `parameters`, so argmax tie-breaks
/// do not depend on scheduling.
template <typename F>
UncertaintySet evaluate_uncertainty_set(std::span<const double> parameters, F&& point_at,
                                        unsigned threads = 1) {
  std::vector<AdversaryPoint> points(parameters.size());
  const std::size_t workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(parameters.size())));
  auto fill = [&](std::size_t begin) {
    for (std::size_t i = begin; i < parameters.size(); i += workers) points[i] = point_at(parameters[i]);
  };
  if (workers == 1) {
    fill(0);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w) jobs.push_back(std::async(std::launch::async, fill, w));
    for (auto& j : jobs) j.get();
  }
  return UncertaintySet(std::move(points));
}

struct SupResult {
  double value = 0.0;       // I* - sqrt(V*/n) Phi^-1(eps)
  double first = 0.0;       // I*
  double variance = 0.0;    // V*
  double second = 0.0;      // sqrt(V*/n) Phi^-1(eps)
  std::size_t index = 0;    // position of the selected point in the set
  AdversaryPoint point;
};

inline constexpr double kPerturbativeTieTol = 1e-9;

/// First-order maximizers S* of the set (relative tie threshold), and the
/// variance V(S*) chosen as sup over S* when eps <= 1/2, inf otherwise.
/// Returns the index of the point realizing V(S*) (lowest index on ties).
inline std::size_t perturbative_selection(const UncertaintySet& set, double eps) {
  if (set.empty()) throw ArgumentError("adversary_sup: empty uncertainty set");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : set.points()) best = std::max(best, p.holevo);
  const double cut = best - kPerturbativeTieTol * std::abs(best) - 1e-15;
  const bool take_sup = eps <= 0.5;
  std::size_t chosen = set.size();
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& p = set.points()[i];
    if (p.holevo < cut) continue;
    if (chosen == set.size()) {
      chosen = i;
      continue;
    }
    const double v = p.holevo_variance;
    const double cur = set.points()[chosen].holevo_variance;
    if (take_sup ? v > cur : v < cur) chosen = i;
  }
  return chosen;
}

inline SupResult adversary_sup(const UncertaintySet& set, const SecondOrderParams& params,
                               SupMode mode = SupMode::direct) {
  params.validate();
  if (set.empty()) throw ArgumentError("adversary_sup: empty uncertainty set");
  const double eps = params.eve_eps();
  auto result_at = [&](std::size_t i) {
    const auto& p = set.points()[i];
    SupResult r;
    r.index = i;
    r.point = p;
    r.first = p.holevo;
    r.variance = p.holevo_variance;
    r.second = second_order_term(p.holevo_variance, params.n, eps);
    r.value = r.first - r.second;
    return r;
  };
  if (mode == SupMode::perturbative) return result_at(perturbative_selection(set, eps));

  SupResult best = result_at(0);
  for (std::size_t i = 1; i < set.size(); ++i) {
    SupResult r = result_at(i);
    if (r.value > best.value) best = r;
  }
  return best;
}

enum class Reconciliation { direct, reverse };

enum RateFlag : std::uint32_t {
  kNoFlags = 0,
  kEntanglementBreaking = 1u << 0,
};

struct RateBreakdown {
  double i_ab = 0.0;
  double v_ab = 0.0;
  double second_ab = 0.0;     // sqrt(V_AB/n) Phi^-1(eps_I)
  double eve_first = 0.0;     // I_E at the selected attack
  double eve_variance = 0.0;  // V_E at the selected attack
  double eve_second = 0.0;    // sqrt(V_E/n) Phi^-1(eps_II^2)
  double total = 0.0;
  double argmax_label = 0.0;  // attack parameter of the selected point
  std::size_t argmax_index = 0;
  Reconciliation reconciliation = Reconciliation::direct;
  std::uint32_t flags = kNoFlags;

  /// Total as assembled from the parts; equals `total` unless a guard clamped it.
  double assembled_total() const { return i_ab + second_ab - (eve_first - eve_second); }
};

namespace detail {

inline RateBreakdown key_rate(double i_ab, double v_ab, const UncertaintySet& set, const SecondOrderParams& params,
                              SupMode mode, Reconciliation rec) {
  params.validate();
  if (!(i_ab >= -1e-12)) throw DomainError("key rate: I_AB must be nonnegative");
  if (!(v_ab >= -1e-12)) throw DomainError("key rate: V_AB must be nonnegative");
  i_ab = std::max(i_ab, 0.0);
  v_ab = std::max(v_ab, 0.0);
  const SupResult sup = adversary_sup(set, params, mode);
  RateBreakdown r;
  r.i_ab = i_ab;
  r.v_ab = v_ab;
  r.second_ab = second_order_term(v_ab, params.n, params.eps_i);
  r.eve_first = sup.first;
  r.eve_variance = sup.variance;
  r.eve_second = sup.second;
  r.argmax_label = sup.point.parameter;
  r.argmax_index = sup.index;
  r.reconciliation = rec;
  r.total = r.assembled_total();
  return r;
}

}  // namespace detail

/// Direct reconciliation: Eve's terms are I(X;E)_s, V(X;E)_s.
inline RateBreakdown key_rate_direct(double i_ab, double v_ab, const UncertaintySet& set,
                                     const SecondOrderParams& params, SupMode mode = SupMode::direct) {
  return detail::key_rate(i_ab, v_ab, set, params, mode, Reconciliation::direct);
}

/// Reverse reconciliation: same shape with I(Y;E)_s, V(Y;E)_s.
inline RateBreakdown key_rate_reverse(double i_ab, double v_ab, const UncertaintySet& set,
                                      const SecondOrderParams& params, SupMode mode = SupMode::direct) {
  return detail::key_rate(i_ab, v_ab, set, params, mode, Reconciliation::reverse);
}

/// beta = beta1 + beta2 sqrt(V/n) Phi^-1(eps_I) / I. The ideal efficiency is
/// beta1 = beta2 = 1.
inline double reconciliation_efficiency(double i_ab, double v_ab, double n, double eps_i, double beta1 = 1.0,
                                        double beta2 = 1.0) {
  if (!(i_ab > 0.0)) throw DomainError("reconciliation_efficiency: I_AB must be positive");
  if (!(eps_i > 0.0 && eps_i < 1.0)) throw DomainError("reconciliation_efficiency: eps_I must lie in (0, 1)");
  if (!(n >= 1.0)) throw DomainError("reconciliation_efficiency: n must be >= 1");
  return beta1 + beta2 * second_order_term(v_ab, n, eps_i) / i_ab;
}

/// gamma = gamma1 - gamma2 sqrt(V(X,S*)/n) Phi^-1(eps_II^2) / sup_s I_s, with
/// V(X,S*) taken by the perturbative rule.
inline double privacy_amp_overhead(const UncertaintySet& set, const SecondOrderParams& params,
                                   double gamma1 = 1.0, double gamma2 = 1.0) {
  params.validate();
  const std::size_t i = perturbative_selection(set, params.eve_eps());
  const auto& p = set.points()[i];
  if (!(p.holevo > 0.0)) throw DomainError("privacy_amp_overhead: sup of Holevo information is zero");
  return gamma1 - gamma2 * second_order_term(p.holevo_variance, params.n, params.eve_eps()) / p.holevo;
}

}  // namespace qkdrate
