#pragma once

// Coherent-state Gaussian modulation, heterodyne detection, thermal-loss
// channel, reverse reconciliation.

#include <cmath>
#include <numbers>

#include "qkdrate/errors.hpp"
#include "qkdrate/gaussian.hpp"
#include "qkdrate/oracles/grid_search.hpp"
#include "qkdrate/second_order.hpp"

namespace qkdrate::cv {

struct CvParams {
  double nbar = 5.0;  // modulation variance in photons
  double eta = 0.2;   // transmissivity
  double nb = 0.01;   // environment thermal photons

  void validate() const {
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) throw DomainError("CvParams: nbar must be finite and >= 0");
    if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("CvParams: eta must lie in (0, 1]");
    if (!(nb >= 0.0) || !std::isfinite(nb)) throw DomainError("CvParams: n_b must be finite and >= 0");
  }
};

/// P = eta nbar / ((1 - eta) N_B + 1).
inline double snr(const CvParams& p) {
  p.validate();
  return p.eta * p.nbar / ((1.0 - p.eta) * p.nb + 1.0);
}

struct AbTerms {
  double i_xy = 0.0;
  double v_xy = 0.0;
};

/// Two independent real Gaussian channels with SNR P each.
inline AbTerms cv_ab_terms(const CvParams& p) {
  const double s = snr(p);
  return {std::log2(1.0 + s), s * (s + 2.0) / ((s + 1.0) * (s + 1.0)) / (kLn2 * kLn2)};
}

/// Covariance of modes [B, E1, E2]: the modulated input (thermal nbar) mixed
/// on a beamsplitter with one half of Eve's two-mode squeezed vacuum.
inline gaussian::GaussianState eve_joint_state(const CvParams& p) {
  p.validate();
  const gaussian::GaussianState in =
      gaussian::direct_sum(gaussian::thermal(p.nbar), gaussian::two_mode_squeezed_vacuum(p.nb));
  return gaussian::beamsplitter_apply(p.eta, in, 0, 1);
}

/// Eve's ensemble indexed by Bob's heterodyne outcome.
inline gaussian::GaussianEnsemble cv_eve_ensemble(const CvParams& p) {
  return gaussian::general_dyne_condition(eve_joint_state(p), {0}, gaussian::GeneralDyneMeasurement::heterodyne(1));
}

struct EveTerms {
  double i_ye = 0.0;
  double v_ye = 0.0;
};

/// I(Y;E) and V(Y;E). Eve's conditional covariance does not depend on the
/// outcome, so H(E|Y) is a single Gaussian entropy.
inline EveTerms cv_eve_terms(const CvParams& p) {
  const gaussian::HolevoResult h = gaussian::gaussian_holevo(cv_eve_ensemble(p));
  return {h.information, h.variance};
}

inline RateBreakdown cv_key_rate(const CvParams& p, const SecondOrderParams& params) {
  const AbTerms ab = cv_ab_terms(p);
  const EveTerms eve = cv_eve_terms(p);
  const UncertaintySet set({AdversaryPoint{std::max(eve.i_ye, 0.0), std::max(eve.v_ye, 0.0), 0.0}});
  return key_rate_reverse(ab.i_xy, ab.v_xy, set, params);
}

/// Density of the complex heterodyne outcome alpha:
///   exp(-|alpha|^2 / a) / (pi a),  a = eta nbar + (1 - eta) N_B + 1.
inline double heterodyne_outcome_density(const CvParams& p, Complex alpha) {
  p.validate();
  const double a = p.eta * p.nbar + (1.0 - p.eta) * p.nb + 1.0;
  return std::exp(-std::norm(alpha) / a) / (std::numbers::pi * a);
}

/// Same density for the real outcome vector y = sqrt(2) (Re alpha, Im alpha).
inline double heterodyne_outcome_density_real(const CvParams& p, double y1, double y2) {
  return 0.5 * heterodyne_outcome_density(p, Complex(y1, y2) / std::sqrt(2.0));
}

inline double asymptotic_rate(const CvParams& p) { return cv_ab_terms(p).i_xy - cv_eve_terms(p).i_ye; }

struct NbarSearch {
  double nbar = 0.0;
  double rate = 0.0;
  bool at_upper_bound = false;
};

inline constexpr double kNbarMin = 1e-2;
inline constexpr double kNbarMax = 1e2;

/// Modulation strength maximizing the asymptotic rate on [kNbarMin, nbar_max],
/// searched in log10(nbar).
inline NbarSearch optimal_nbar(double eta, double nb, double nbar_max = kNbarMax) {
  if (!(nbar_max > kNbarMin)) throw DomainError("optimal_nbar: upper bound must exceed the lower bound");
  auto f = [&](double lg) { return asymptotic_rate(CvParams{std::pow(10.0, lg), eta, nb}); };
  const double lo = std::log10(kNbarMin), hi = std::log10(nbar_max);
  const oracles::GridMax m = oracles::grid_search_max(f, lo, hi, 0.01, 1e-9);
  return {std::pow(10.0, m.argmax), m.max, hi - m.argmax < 1e-6};
}

}  // namespace qkdrate::cv
