#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "qkdrate/cv_protocol.hpp"
#include "qkdrate/dv_protocols.hpp"
#include "qkdrate/oracles.hpp"

using namespace qkdrate;
using namespace qkdrate::oracles;

TEST(GridSearch, ConcaveParabola) {
  const GridMax m = grid_search_max([](double x) { return -(x - 0.25) * (x - 0.25); }, 0.0, 1.0, 0.1, 1e-10);
  EXPECT_NEAR(m.argmax, 0.25, 1e-8);
  EXPECT_NEAR(m.max, 0.0, 1e-15);
}

TEST(GridSearch, ConstantPicksLeftmost) {
  const GridMax m = grid_search_max([](double) { return 2.0; }, -1.0, 1.0, 0.1, 1e-9);
  EXPECT_EQ(m.argmax, -1.0);
  EXPECT_EQ(m.max, 2.0);
}

TEST(GridSearch, EndpointAndDegenerateInterval) {
  EXPECT_EQ(grid_search_max([](double x) { return x; }, 0.0, 2.0, 0.3, 1e-9).argmax, 2.0);
  EXPECT_EQ(grid_search_max([](double x) { return x; }, 1.5, 1.5, 0.3, 1e-9).argmax, 1.5);
}

TEST(GridSearch, Errors) {
  EXPECT_THROW(grid_search_max([](double) { return std::nan(""); }, 0.0, 1.0, 0.1, 1e-9), NumericalFailure);
  try {
    grid_search_max([](double x) { return x > 0.5 ? std::nan("") : x; }, 0.0, 1.0, 0.1, 1e-9);
    FAIL();
  } catch (const NumericalFailure& e) {
    EXPECT_NE(std::string(e.what()).find("x = 0.6"), std::string::npos);
  }
  EXPECT_THROW(grid_search_max([](double x) { return x; }, 1.0, 0.0, 0.1, 1e-9), ArgumentError);
  EXPECT_THROW(grid_search_max([](double x) { return x; }, 0.0, 1.0, 0.0, 1e-9), ArgumentError);
}

TEST(GridSearch, Bb84Maximizer) {
  for (double Q : {0.02, 0.05, 0.1}) {
    const GridMax m = grid_search_max(
        [Q](double s) { return dv::pauli_generic_quantities(dv::bb84_pauli(Q, s)).i_xe; }, 0.0, Q, 1e-4, 1e-10);
    EXPECT_NEAR(m.argmax, Q * Q, 1e-6);
  }
}

TEST(GaussHermite, RuleProperties) {
  const QuadratureRule r = gauss_hermite_rule(20);
  double w = 0.0, m2 = 0.0, m4 = 0.0;
  for (std::size_t k = 0; k < r.nodes.size(); ++k) {
    w += r.weights[k];
    m2 += r.weights[k] * std::pow(r.nodes[k], 2);
    m4 += r.weights[k] * std::pow(r.nodes[k], 4);
  }
  EXPECT_NEAR(w, 1.0, 1e-13);
  EXPECT_NEAR(m2, 1.0, 1e-12);
  EXPECT_NEAR(m4, 3.0, 1e-12);
  EXPECT_THROW(gauss_hermite_rule(0), ArgumentError);
}

TEST(GaussHermite, Moments) {
  Matrix sigma(2, 2);
  sigma << 2.0, 0.6, 0.6, 1.0;
  Matrix a(2, 2);
  a << 1.0, -0.3, -0.3, 0.5;
  const Vector mu = Vector::Zero(2);
  EXPECT_NEAR(gauss_hermite_expectation([](const Vector&) { return 1.0; }, mu, sigma, 8), 1.0, 1e-13);
  EXPECT_NEAR(gauss_hermite_expectation([&](const Vector& y) { return y.dot(a * y); }, mu, sigma, 8),
              (a * sigma).trace(), 1e-12);
  // Isserlis: E[(y^T A y)^2] = (Tr A Sigma)^2 + 2 Tr[(A Sigma)^2].
  const double t = (a * sigma).trace(), t2 = (a * sigma * a * sigma).trace();
  EXPECT_NEAR(gauss_hermite_expectation(
                  [&](const Vector& y) {
                    const double q = y.dot(a * y);
                    return q * q;
                  },
                  mu, sigma, 8),
              t * t + 2.0 * t2, 1e-11);
  Vector shift(2);
  shift << 1.0, -2.0;
  EXPECT_NEAR(gauss_hermite_expectation([](const Vector& y) { return y(0) + y(1); }, shift, sigma, 4), -1.0, 1e-13);
}

TEST(GaussHermite, VectorValued) {
  const Vector mu = Vector{{0.5, -1.0}};
  const Vector m = gauss_hermite_expectation([](const Vector& y) { return Vector(y); }, mu,
                                             Matrix(Matrix::Identity(2, 2)), 6);
  EXPECT_NEAR(m(0), 0.5, 1e-13);
  EXPECT_NEAR(m(1), -1.0, 1e-13);
}

TEST(GaussHermite, Errors) {
  EXPECT_THROW(gauss_hermite_expectation([](const Vector&) { return 1.0; }, Vector::Zero(2),
                                         Matrix(Matrix::Zero(2, 2)), 4),
               NumericalError);
  EXPECT_THROW(gauss_hermite_expectation([](const Vector&) { return 1.0; }, Vector::Zero(2),
                                         Matrix(Matrix::Identity(3, 3)), 4),
               ArgumentError);
}

TEST(QuadratureHolevo, NodeDoublingConverges) {
  const gaussian::GaussianEnsemble e = cv::cv_eve_ensemble({5.0, 0.2, 0.01});
  const QuadratureHolevo a = quadrature_holevo(e, 20), b = quadrature_holevo(e, 40);
  EXPECT_LT(std::abs(a.information - b.information), 1e-8);
  EXPECT_LT(std::abs(a.variance - b.variance), 1e-8);
}

TEST(Fock, ThermalDiagonal) {
  const FockTruncation t = fock_thermal(1.5, 200);
  const double r = 1.5 / 2.5;
  for (int j : {0, 1, 5, 30}) EXPECT_NEAR(t.rho.matrix()(j, j).real(), std::pow(r, j) / 2.5, 1e-15);
  const FockTruncation d = fock_truncate(gaussian::thermal(1.5), 200);
  EXPECT_LT(max_abs(CMatrix(d.rho.matrix() - t.rho.matrix())), 1e-14);
}

TEST(Fock, VacuumIsExact) {
  const FockTruncation v = fock_truncate(gaussian::vacuum(1), 10);
  EXPECT_EQ(v.rho.matrix()(0, 0), Complex(1.0, 0.0));
  CMatrix expected = CMatrix::Zero(10, 10);
  expected(0, 0) = 1.0;
  EXPECT_EQ(max_abs(CMatrix(v.rho.matrix() - expected)), 0.0);
  EXPECT_EQ(v.tail_mass, 0.0);
}

TEST(Fock, TailMassAtCutoff300) {
  for (double n : {0.1, 0.5, 1.0, 2.0}) EXPECT_LT(fock_thermal(n, 300).tail_mass, 1e-12);
  EXPECT_THROW(fock_thermal(5.0, 20), InsufficientCutoffError);
  EXPECT_THROW(fock_truncate(gaussian::thermal(5.0), 20), InsufficientCutoffError);
}

TEST(Fock, DisplacedState) {
  Vector mean(2);
  mean << std::sqrt(2.0) * 0.9, std::sqrt(2.0) * -0.4;  // alpha = 0.9 - 0.4 i
  const FockTruncation c = fock_truncate(gaussian::GaussianState(mean, Matrix::Identity(2, 2)), 60);
  const Complex alpha(0.9, -0.4);
  // Coherent state: <j|rho|k> = e^{-|a|^2} a^j conj(a)^k / sqrt(j! k!).
  for (int j : {0, 2, 5})
    for (int k : {0, 1, 3}) {
      const Complex expected = std::exp(-std::norm(alpha)) * std::pow(alpha, j) * std::pow(std::conj(alpha), k) /
                               std::sqrt(std::tgamma(j + 1.0) * std::tgamma(k + 1.0));
      EXPECT_LT(std::abs(c.rho.matrix()(j, k) - expected), 1e-13);
    }
  // Mean photon number of a displaced thermal state: nbar + |alpha|^2.
  const FockTruncation d = fock_truncate(gaussian::GaussianState(mean, gaussian::thermal(0.7).cov()), 150);
  double n = 0.0;
  for (int j = 0; j < 150; ++j) n += j * d.rho.matrix()(j, j).real();
  EXPECT_NEAR(n, 0.7 + std::norm(alpha), 1e-10);
}

TEST(Fock, RejectsUnsupportedStates) {
  Matrix sq(2, 2);
  sq << 2.0, 0.0, 0.0, 0.5;
  EXPECT_THROW(fock_truncate(gaussian::GaussianState(sq), 50), ArgumentError);
  EXPECT_THROW(fock_truncate(gaussian::vacuum(2), 50), ArgumentError);
  EXPECT_THROW(fock_truncate(gaussian::vacuum(1), 0), ArgumentError);
}
