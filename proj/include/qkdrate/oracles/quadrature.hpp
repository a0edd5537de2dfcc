#pragma once

// Tensor-product Gauss-Hermite expectations over Gaussian outcome priors.

#include <cmath>
#include <type_traits>
#include <vector>

#include "qkdrate/errors.hpp"
#include "qkdrate/gaussian.hpp"
#include "qkdrate/linalg.hpp"

namespace qkdrate::oracles {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to 1
};

/// Golub-Welsch rule for the standard normal weight (probabilists' Hermite).
inline QuadratureRule gauss_hermite_rule(int nodes) {
  if (nodes < 1) throw ArgumentError("gauss_hermite_rule: need at least one node");
  Matrix j = Matrix::Zero(nodes, nodes);
  for (int k = 1; k < nodes; ++k) j(k - 1, k) = j(k, k - 1) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Matrix> es(j);
  if (es.info() != Eigen::Success) throw NumericalFailure("gauss_hermite_rule: eigensolver failed");
  QuadratureRule r;
  for (int k = 0; k < nodes; ++k) {
    r.nodes.push_back(es.eigenvalues()(k));
    const double v0 = es.eigenvectors()(0, k);
    r.weights.push_back(v0 * v0);
  }
  return r;
}

/// E[g(y)] for y ~ N(mu, Sigma), with y = mu + Sigma^{1/2} z. g may return a
/// double or an Eigen vector.
template <typename F>
auto gauss_hermite_expectation(F&& g, const Vector& mu, const Matrix& sigma, int nodes) {
  const Eigen::Index d = mu.size();
  if (sigma.rows() != d || sigma.cols() != d) throw ArgumentError("gauss_hermite_expectation: size mismatch");
  if (d == 0) throw ArgumentError("gauss_hermite_expectation: empty outcome space");
  const Matrix root = spd_roots(sigma, "gauss_hermite_expectation").sqrt;
  const QuadratureRule rule = gauss_hermite_rule(nodes);

  using Value = std::decay_t<decltype(g(mu))>;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  Vector z(d);
  Value total{};
  bool first = true;
  while (true) {
    double w = 1.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto k = static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]);
      z(i) = rule.nodes[k];
      w *= rule.weights[k];
    }
    const Value v = g(Vector(mu + root * z));
    if (first) {
      total = w * v;
      first = false;
    } else {
      total = total + w * v;
    }
    Eigen::Index i = 0;
    while (i < d && ++idx[static_cast<std::size_t>(i)] == nodes) idx[static_cast<std::size_t>(i++)] = 0;
    if (i == d) break;
  }
  return total;
}

struct QuadratureHolevo {
  double information = 0.0;
  double variance = 0.0;
};

/// Holevo information and variance of a Gaussian ensemble from per-outcome
/// relative entropies: I = E[D(rho_y || rho_avg)], V = E[V_y + D_y^2] - I^2.
inline QuadratureHolevo quadrature_holevo(const gaussian::GaussianEnsemble& e, int nodes = 40) {
  const gaussian::GaussianState avg(e.W * e.mu + e.nu, gaussian::average_covariance(e));
  const Eigen::Vector2d m = gauss_hermite_expectation(
      [&](const Vector& y) {
        const gaussian::GaussianState s(e.W * y + e.nu, e.V);
        const double d = gaussian::gaussian_relative_entropy(s, avg);
        return Eigen::Vector2d(d, gaussian::gaussian_relative_entropy_variance(s, avg) + d * d);
      },
      e.mu, e.Sigma, nodes);
  return {m(0), m(1) - m(0) * m(0)};
}

}  // namespace qkdrate::oracles
