#pragma once

// Oracle cross-checks runnable on demand.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "qkdrate/cv_protocol.hpp"
#include "qkdrate/dv_protocols.hpp"
#include "qkdrate/gaussian.hpp"
#include "qkdrate/info_measures.hpp"
#include "qkdrate/normal.hpp"
#include "qkdrate/oracles.hpp"

namespace qkdrate {

enum class VerifyLevel { fast, full };

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return !checks.empty();
  }
};

/// Lets a caller perturb a named value before it is compared with its oracle.
struct VerifyHooks {
  std::function<double(const std::string& name, double value)> tamper;

  double apply(const std::string& name, double value) const { return tamper ? tamper(name, value) : value; }
};

namespace detail {

inline dv::PauliChannelParams random_pauli(std::mt19937_64& rng) {
  std::gamma_distribution<double> g(1.0, 1.0);
  double w[4];
  double total = 0.0;
  for (double& x : w) total += (x = g(rng));
  return {w[0] / total, w[1] / total, w[2] / total, w[3] / total};
}

// Bisection on std_normal_cdf; works on the upper tail for p > 1/2 so both
// tails keep full relative precision.
inline double inv_cdf_bisection(double p) {
  const bool upper = p > 0.5;
  const double target = upper ? 1.0 - p : p;
  double lo = -40.0, hi = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std_normal_cdf(mid) < target ? lo : hi) = mid;
  }
  const double a = 0.5 * (lo + hi);
  return upper ? -a : a;
}

class Recorder {
 public:
  explicit Recorder(const VerifyHooks& hooks) : hooks_(hooks) {}

  void compare(const std::string& name, double value, double reference, double tol) {
    const double v = hooks_.apply(name, value);
    const double r = std::abs(v - reference);
    record(name, std::isfinite(r) ? r : std::numeric_limits<double>::infinity(), tol);
  }

  void record(const std::string& name, double residual, double tol) {
    for (auto& c : report_.checks) {
      if (c.name == name) {
        c.residual = std::max(c.residual, residual);
        c.passed = c.residual <= c.tolerance;
        return;
      }
    }
    report_.checks.push_back({name, residual, tol, residual <= tol});
  }

  VerifyReport take() { return std::move(report_); }

 private:
  const VerifyHooks& hooks_;
  VerifyReport report_;
};

}  // namespace detail

inline VerifyReport verify(VerifyLevel level, const VerifyHooks& hooks = {}) {
  const bool full = level == VerifyLevel::full;
  detail::Recorder rec(hooks);
  std::mt19937_64 rng(20240611);

  // Pauli closed forms against the explicit 8x8 state and the sifted tables.
  const int pauli_points = full ? 100 : 10;
  for (int k = 0; k < pauli_points; ++k) {
    const dv::PauliChannelParams p = detail::random_pauli(rng);
    const dv::DvQuantities q = dv::pauli_generic_quantities(p);
    const CQEnsemble e = dv::build_rho_XE(p);
    rec.compare("pauli.i_xe", q.i_xe, holevo_information(e), 1e-10);
    rec.compare("pauli.v_xe", q.v_xe, holevo_information_variance(e), 1e-10);
    // Key bits come from the Z basis: sift the channel's full joint table to it.
    const auto z = dv::sift(dv::full_joint_distribution(dv::Protocol::bb84, p), {{2, 2}, {2, 3}, {3, 2}, {3, 3}});
    rec.compare("pauli.i_xy", q.i_xy, mutual_information(z.conditioned), 1e-10);
    rec.compare("pauli.v_xy", q.v_xy, mutual_information_variance(z.conditioned), 1e-10);
  }

  // Thermal states in the Fock basis.
  const int cutoff = full ? 300 : 150;
  {
    const auto r = oracles::fock_thermal(1.0, cutoff);
    const auto s = oracles::fock_thermal(2.0, cutoff);
    const gaussian::GaussianState gr = gaussian::thermal(1.0), gs = gaussian::thermal(2.0);
    rec.compare("fock.relative_entropy", gaussian::gaussian_relative_entropy(gr, gs),
                quantum_relative_entropy(r.rho, s.rho), 1e-8);
    rec.compare("fock.relative_entropy_variance", gaussian::gaussian_relative_entropy_variance(gr, gs),
                quantum_relative_entropy_variance(r.rho, s.rho), 1e-6);
    for (double nbar : {0.1, 1.0, 5.0}) {
      const double g = (nbar + 1.0) * std::log2(nbar + 1.0) - nbar * std::log2(nbar);
      rec.compare("thermal.entropy", gaussian::gaussian_entropy(gaussian::thermal(nbar)), g, 1e-9);
    }
  }
  if (full) {
    Vector shift(2);
    shift << 0.6, -0.3;
    const auto r = oracles::fock_truncate(gaussian::coherent_thermal(0.5, shift), 120);
    const auto s = oracles::fock_truncate(gaussian::thermal(1.5), 120);
    const gaussian::GaussianState gr = gaussian::coherent_thermal(0.5, shift), gs = gaussian::thermal(1.5);
    rec.compare("fock.displaced_relative_entropy", gaussian::gaussian_relative_entropy(gr, gs),
                quantum_relative_entropy(r.rho, s.rho), 1e-8);
    rec.compare("fock.displaced_relative_entropy_variance", gaussian::gaussian_relative_entropy_variance(gr, gs),
                quantum_relative_entropy_variance(r.rho, s.rho), 1e-6);
  }

  // Gaussian Holevo quantities: dual route and quadrature.
  std::vector<cv::CvParams> grid = {{5.0, 0.2, 0.01}};
  if (full) {
    grid.push_back({1.0, 0.5, 0.1});
    grid.push_back({10.0, 0.1, 0.05});
    grid.push_back({2.0, 0.8, 0.5});
    grid.push_back({0.5, 0.3, 1.0});
  }
  const int nodes = full ? 40 : 24;
  for (const cv::CvParams& p : grid) {
    const gaussian::GaussianEnsemble e = cv::cv_eve_ensemble(p);
    const gaussian::HolevoResult h = gaussian::gaussian_holevo(e);
    rec.compare("holevo.dual_route", h.information, gaussian::gaussian_holevo_entropy_route(e), 1e-9);
    const oracles::QuadratureHolevo q = oracles::quadrature_holevo(e, nodes);
    rec.compare("holevo.quadrature_information", h.information, q.information, 1e-6);
    rec.compare("holevo.quadrature_variance", h.variance, q.variance, 1e-6);
  }

  // Inverse normal CDF.
  const int inv_points = full ? 400 : 60;
  for (int k = 0; k < inv_points; ++k) {
    const double lg = -12.0 + 12.0 * k / (inv_points - 1);
    for (double p : {std::pow(10.0, lg), 1.0 - std::pow(10.0, lg)}) {
      if (!(p > 0.0 && p < 1.0)) continue;
      rec.compare("normal.inv_cdf", std_normal_inv_cdf(p), detail::inv_cdf_bisection(p), 1e-11);
    }
  }

  // BB84 first-order optimizer.
  for (double Q : full ? std::vector<double>{0.01, 0.03, 0.05, 0.07, 0.1} : std::vector<double>{0.05}) {
    const auto m = oracles::grid_search_max(
        [Q](double s) { return dv::pauli_generic_quantities(dv::bb84_pauli(Q, s)).i_xe; }, 0.0, Q, 1e-4, 1e-10);
    rec.compare("bb84.argmax", m.argmax, Q * Q, 1e-6);
  }
  return rec.take();
}

}  // namespace qkdrate
