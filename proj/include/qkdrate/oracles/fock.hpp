#pragma once

// Single-mode Gaussian states written out in a truncated Fock basis.

#include <cmath>

#include "qkdrate/errors.hpp"
#include "qkdrate/gaussian.hpp"
#include "qkdrate/info_measures.hpp"
#include "qkdrate/linalg.hpp"

namespace qkdrate::oracles {

inline constexpr double kMaxTailMass = 1e-12;

struct FockTruncation {
  DensityMatrix rho;
  int cutoff = 0;
  double tail_mass = 0.0;
};

/// <j|rho|k> for j, k < cutoff of a displaced thermal state. The state must be
/// thermal up to displacement (covariance proportional to the identity).
///
/// rho = sum_k w_k D(alpha)|k><k|D(alpha)^dag, where D(alpha)|k> is built from
/// the coherent state by (a^dag - alpha^*)/sqrt(k+1). Raising operators never
/// move weight downwards, so the low components are exact in any finite
/// working dimension.
inline FockTruncation fock_truncate(const gaussian::GaussianState& state, int cutoff) {
  if (state.modes() != 1) throw ArgumentError("fock_truncate: single-mode state required");
  if (cutoff < 1) throw ArgumentError("fock_truncate: cutoff must be positive");
  const Matrix& v = state.cov();
  if (std::abs(v(0, 1)) > 1e-12 || std::abs(v(0, 0) - v(1, 1)) > 1e-12) {
    throw ArgumentError("fock_truncate: only displaced thermal states are supported");
  }
  const double nbar = 0.5 * (v(0, 0) - 1.0);
  const Complex alpha(state.mean()(0) / std::sqrt(2.0), state.mean()(1) / std::sqrt(2.0));
  const int dim = cutoff + 64;

  CVector vk(dim);
  vk(0) = std::exp(-0.5 * std::norm(alpha));
  for (int j = 1; j < dim; ++j) vk(j) = vk(j - 1) * alpha / std::sqrt(static_cast<double>(j));

  CMatrix rho = CMatrix::Zero(cutoff, cutoff);
  const double ratio = nbar / (nbar + 1.0);
  double w = 1.0 / (nbar + 1.0);
  for (int k = 0; k < dim && w > 0.0; ++k) {
    const CVector head = vk.head(cutoff);
    rho.noalias() += w * head * head.adjoint();
    CVector next(dim);
    next(0) = -std::conj(alpha) * vk(0);
    for (int j = 1; j < dim; ++j) next(j) = std::sqrt(static_cast<double>(j)) * vk(j - 1) - std::conj(alpha) * vk(j);
    vk = next / std::sqrt(static_cast<double>(k + 1));
    w *= ratio;
  }
  const double trace = rho.trace().real();
  const double tail = std::max(0.0, 1.0 - trace);
  if (!(tail < kMaxTailMass)) {
    throw InsufficientCutoffError("fock_truncate: tail mass " + std::to_string(tail) + " at cutoff " +
                                  std::to_string(cutoff));
  }
  return {DensityMatrix(CMatrix(rho / trace)), cutoff, tail};
}

/// Thermal state diagonal (1/(n+1)) (n/(n+1))^j, written independently of the
/// displaced construction.
inline FockTruncation fock_thermal(double nbar, int cutoff) {
  if (!(nbar >= 0.0)) throw DomainError("fock_thermal: nbar must be >= 0");
  std::vector<double> d(static_cast<std::size_t>(cutoff));
  double total = 0.0;
  for (int j = 0; j < cutoff; ++j) {
    d[static_cast<std::size_t>(j)] = std::pow(nbar / (nbar + 1.0), j) / (nbar + 1.0);
    total += d[static_cast<std::size_t>(j)];
  }
  const double tail = std::max(0.0, 1.0 - total);
  if (!(tail < kMaxTailMass)) throw InsufficientCutoffError("fock_thermal: cutoff too small");
  for (double& x : d) x /= total;
  return {DensityMatrix::diagonal(d), cutoff, tail};
}

}  // namespace qkdrate::oracles
