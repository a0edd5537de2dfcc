#pragma once

// Classical and finite-dimensional quantum information measures. Everything
// is in bits. Relative-entropy-type quantities are evaluated through the
// joint spectral distribution of the two operators: with
//   rho = sum_x lambda_x |psi_x><psi_x|,  sigma = sum_y mu_y |phi_y><phi_y|,
// the pair (x, y) carries weight |<phi_y|psi_x>|^2 lambda_x and value
// log2(lambda_x / mu_y). D, V and T are the mean, variance and absolute third
// central moment of that distribution.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "qkdrate/errors.hpp"
#include "qkdrate/linalg.hpp"

namespace qkdrate {

inline constexpr double kNormTol = 1e-12;

// ---------------------------------------------------------------------------
// Domain types

class DiscreteDistribution {
 public:
  DiscreteDistribution() = default;
  explicit DiscreteDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw DomainError("DiscreteDistribution: empty");
    double total = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0) || p > 1.0) throw DomainError("DiscreteDistribution: probability outside [0, 1]");
      total += p;
    }
    if (std::abs(total - 1.0) > kNormTol) {
      throw DomainError("DiscreteDistribution: probabilities sum to " + std::to_string(total));
    }
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probabilities() const noexcept { return probs_; }
  auto begin() const noexcept { return probs_.begin(); }
  auto end() const noexcept { return probs_.end(); }

 private:
  std::vector<double> probs_;
};

/// Joint probability table p(x, y), rows indexed by x and columns by y.
class JointDistribution {
 public:
  JointDistribution() = default;
  explicit JointDistribution(Matrix table) : table_(std::move(table)) {
    if (table_.size() == 0) throw DomainError("JointDistribution: empty table");
    if (!(table_.array() >= 0.0).all()) throw DomainError("JointDistribution: negative entry");
    const double total = table_.sum();
    if (std::abs(total - 1.0) > kNormTol) {
      throw DomainError("JointDistribution: entries sum to " + std::to_string(total));
    }
  }

  const Matrix& table() const noexcept { return table_; }
  double operator()(Eigen::Index x, Eigen::Index y) const { return table_(x, y); }
  Eigen::Index rows() const noexcept { return table_.rows(); }
  Eigen::Index cols() const noexcept { return table_.cols(); }
  Vector marginal_x() const { return table_.rowwise().sum(); }
  Vector marginal_y() const { return table_.colwise().sum().transpose(); }

 private:
  Matrix table_;
};

class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(CMatrix m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols()) throw DomainError("DensityMatrix: not square");
    if (max_abs(CMatrix(m_ - m_.adjoint())) > kNormTol) throw DomainError("DensityMatrix: not Hermitian");
    m_ = 0.5 * (m_ + m_.adjoint());
    const Complex tr = m_.trace();
    if (std::abs(tr - 1.0) > kNormTol) {
      throw DomainError("DensityMatrix: trace " + std::to_string(tr.real()) + " != 1");
    }
    spectrum_ = hermitian_spectrum(m_);
    if (spectrum_.values.minCoeff() < -kSupportTol) throw DomainError("DensityMatrix: negative eigenvalue");
  }
  explicit DensityMatrix(const Matrix& real) : DensityMatrix(CMatrix(real.cast<Complex>())) {}

  static DensityMatrix diagonal(std::span<const double> probs) {
    Vector d = Eigen::Map<const Vector>(probs.data(), static_cast<Eigen::Index>(probs.size()));
    return DensityMatrix(Matrix(d.asDiagonal()));
  }

  const CMatrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }
  /// Eigenvalues (ascending, may contain O(1e-15) negative dust) and eigenvectors.
  const HermitianSpectrum& spectrum() const noexcept { return spectrum_; }

 private:
  CMatrix m_;
  HermitianSpectrum spectrum_;
};

/// Prior p_X together with one conditional state per label.
class CQEnsemble {
 public:
  CQEnsemble() = default;
  CQEnsemble(DiscreteDistribution prior, std::vector<DensityMatrix> states)
      : prior_(std::move(prior)), states_(std::move(states)) {
    if (states_.size() != prior_.size()) throw DomainError("CQEnsemble: one state per prior label required");
    for (const auto& s : states_) {
      if (s.dim() != states_.front().dim()) throw DomainError("CQEnsemble: states of different dimension");
    }
  }

  const DiscreteDistribution& prior() const noexcept { return prior_; }
  const std::vector<DensityMatrix>& states() const noexcept { return states_; }

  DensityMatrix average_state() const {
    CMatrix avg = CMatrix::Zero(states_.front().dim(), states_.front().dim());
    for (std::size_t x = 0; x < states_.size(); ++x) avg += prior_[x] * states_[x].matrix();
    return DensityMatrix(std::move(avg));
  }

 private:
  DiscreteDistribution prior_;
  std::vector<DensityMatrix> states_;
};

// ---------------------------------------------------------------------------
// Classical quantities

inline double binary_entropy(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("binary_entropy: q outside [0, 1]");
  return -xlog2x(q) - xlog2x(1.0 - q);
}

namespace detail {

struct WeightedValue {
  double weight;
  double value;
};

inline std::vector<WeightedValue> classical_log_ratios(const JointDistribution& j) {
  const Vector px = j.marginal_x();
  const Vector py = j.marginal_y();
  std::vector<WeightedValue> out;
  for (Eigen::Index x = 0; x < j.rows(); ++x)
    for (Eigen::Index y = 0; y < j.cols(); ++y) {
      const double p = j(x, y);
      if (p > 0.0) out.push_back({p, std::log2(p / (px(x) * py(y)))});
    }
  return out;
}

inline double mean(const std::vector<WeightedValue>& d) {
  double m = 0.0;
  for (const auto& [w, v] : d) m += w * v;
  return m;
}

inline double central_moment(const std::vector<WeightedValue>& d, double centre, int order) {
  double m = 0.0;
  for (const auto& [w, v] : d) m += w * std::pow(std::abs(v - centre), order);
  return m;
}

}  // namespace detail

inline double mutual_information(const JointDistribution& j) {
  return detail::mean(detail::classical_log_ratios(j));
}

inline double mutual_information_variance(const JointDistribution& j) {
  const auto d = detail::classical_log_ratios(j);
  return detail::central_moment(d, detail::mean(d), 2);
}

// ---------------------------------------------------------------------------
// Quantum relative entropy family

namespace detail {

// Pairs (x, y) of the joint spectral distribution of rho and sigma. Pairs
// with lambda_x below the eigenvalue floor are dropped. A pair whose sigma
// eigenvalue is below the floor is dropped too, unless it carries weight,
// which means rho is not supported inside sigma.
inline std::vector<WeightedValue> spectral_log_ratios(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DomainError("relative entropy: dimension mismatch");
  const auto& [lam, psi] = rho.spectrum();
  const auto& [mu, phi] = sigma.spectrum();
  const Matrix overlap = (phi.adjoint() * psi).cwiseAbs2();  // (y, x)
  std::vector<WeightedValue> out;
  out.reserve(static_cast<std::size_t>(lam.size() * mu.size()));
  for (Eigen::Index x = 0; x < lam.size(); ++x) {
    if (lam(x) < kEigenFloor) continue;
    for (Eigen::Index y = 0; y < mu.size(); ++y) {
      const double o = overlap(y, x);
      if (mu(y) < kEigenFloor) {
        if (lam(x) > kSupportTol && o > kSupportTol) {
          throw SupportError("relative entropy: support of rho is not contained in support of sigma");
        }
        continue;
      }
      if (o == 0.0) continue;
      out.push_back({o * lam(x), std::log2(lam(x) / mu(y))});
    }
  }
  return out;
}

}  // namespace detail

inline double quantum_relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return detail::mean(detail::spectral_log_ratios(rho, sigma));
}

inline double quantum_relative_entropy_variance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  const auto d = detail::spectral_log_ratios(rho, sigma);
  return detail::central_moment(d, detail::mean(d), 2);
}

/// Absolute third central moment analogue of the relative entropy variance.
inline double relative_entropy_T(const DensityMatrix& rho, const DensityMatrix& sigma) {
  const auto d = detail::spectral_log_ratios(rho, sigma);
  return detail::central_moment(d, detail::mean(d), 3);
}

inline double von_neumann_entropy(const DensityMatrix& rho) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < rho.spectrum().values.size(); ++i) {
    const double l = rho.spectrum().values(i);
    if (l >= kEigenFloor) h -= l * std::log2(l);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Holevo quantities of a classical-quantum ensemble

namespace detail {

struct PerLabel {
  double prior;
  std::vector<WeightedValue> log_ratios;
};

inline std::vector<PerLabel> per_label_log_ratios(const CQEnsemble& e) {
  const DensityMatrix avg = e.average_state();
  std::vector<PerLabel> out;
  for (std::size_t x = 0; x < e.states().size(); ++x) {
    if (e.prior()[x] == 0.0) continue;
    out.push_back({e.prior()[x], spectral_log_ratios(e.states()[x], avg)});
  }
  return out;
}

inline double holevo_from(const std::vector<PerLabel>& labels) {
  double i = 0.0;
  for (const auto& l : labels) i += l.prior * mean(l.log_ratios);
  return i;
}

}  // namespace detail

inline double holevo_information(const CQEnsemble& e) {
  return detail::holevo_from(detail::per_label_log_ratios(e));
}

/// sum_x p(x) [V(rho^x || rho) + D(rho^x || rho)^2] - I^2.
inline double holevo_information_variance(const CQEnsemble& e) {
  const auto labels = detail::per_label_log_ratios(e);
  const double info = detail::holevo_from(labels);
  double second = 0.0;
  for (const auto& l : labels) {
    const double d = detail::mean(l.log_ratios);
    second += l.prior * (detail::central_moment(l.log_ratios, d, 2) + d * d);
  }
  return second - info * info;
}

/// sum_x p(x) sum_{y,z} |<psi^{x,y}|phi^z>|^2 p(y|x) |log2(p(y|x)/q(z)) - I|^3.
inline double cq_T(const CQEnsemble& e) {
  const auto labels = detail::per_label_log_ratios(e);
  const double info = detail::holevo_from(labels);
  double t = 0.0;
  for (const auto& l : labels) t += l.prior * detail::central_moment(l.log_ratios, info, 3);
  return t;
}

}  // namespace qkdrate
