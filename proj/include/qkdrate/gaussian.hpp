#pragma once

// Gaussian-state calculus. Quadratures are ordered (x1, p1, ..., xm, pm),
// the vacuum has covariance I, and a faithful state is written as
//   rho = Z^{-1/2} exp(-1/2 (r - mu)^T G (r - mu)),
//   G = 2 i Omega arcoth(i V Omega),  Z = det((V + i Omega) / 2).
// Internals work in nats; public information quantities are in bits.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "qkdrate/errors.hpp"
#include "qkdrate/linalg.hpp"

namespace qkdrate::gaussian {

inline constexpr double kSymTol = 1e-10;
inline constexpr double kUncertaintyTol = 1e-9;
inline constexpr double kFaithfulTol = 1e-9;
inline constexpr double kImagTol = 1e-9;

namespace detail {

inline Eigen::Index modes_of(const Matrix& v, const char* where) {
  if (v.rows() == 0 || v.rows() != v.cols() || v.rows() % 2 != 0) {
    throw DomainError(std::string(where) + ": covariance must be a nonempty 2m x 2m matrix");
  }
  return v.rows() / 2;
}

inline std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace detail

/// First and second moments of an m-mode Gaussian state.
class GaussianState {
 public:
  GaussianState() = default;
  GaussianState(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    const Eigen::Index m = detail::modes_of(cov_, "GaussianState");
    if (mean_.size() != 2 * m) throw DomainError("GaussianState: mean has wrong length");
    if (!is_symmetric(cov_, kSymTol)) throw DomainError("GaussianState: covariance not symmetric");
    cov_ = 0.5 * (cov_ + cov_.transpose());
    const CMatrix u = cov_.cast<Complex>() + Complex(0.0, 1.0) * symplectic_form(m).cast<Complex>();
    const double min_eig = hermitian_spectrum(u).values.minCoeff();
    if (min_eig < -kUncertaintyTol) {
      throw DomainError("GaussianState: uncertainty principle violated (min eig of V + i Omega = " +
                        detail::num(min_eig) + ")");
    }
  }
  explicit GaussianState(const Matrix& cov) : GaussianState(Vector::Zero(cov.rows()), cov) {}

  const Vector& mean() const noexcept { return mean_; }
  const Matrix& cov() const noexcept { return cov_; }
  Eigen::Index modes() const noexcept { return cov_.rows() / 2; }

 private:
  Vector mean_;
  Matrix cov_;
};

struct HamiltonianForm {
  Matrix G;
  double Z = 1.0;
};

/// Ensemble {p(y), rho_y}: y ~ N(mu, Sigma) over 2n reals, rho_y has mean
/// W y + nu and y-independent covariance V.
struct GaussianEnsemble {
  Vector mu;
  Matrix Sigma;
  Matrix W;
  Vector nu;
  Matrix V;

  void validate() const {
    if (Sigma.rows() != mu.size() || Sigma.cols() != mu.size()) throw DomainError("GaussianEnsemble: Sigma/mu size mismatch");
    if (W.rows() != V.rows() || W.cols() != mu.size()) throw DomainError("GaussianEnsemble: W has wrong shape");
    if (nu.size() != V.rows()) throw DomainError("GaussianEnsemble: nu has wrong length");
    if (!is_symmetric(Sigma, kSymTol)) throw DomainError("GaussianEnsemble: Sigma not symmetric");
    if (Sigma.size() > 0) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Sigma + Sigma.transpose()), Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -kSymTol) throw DomainError("GaussianEnsemble: Sigma not PSD");
    }
    GaussianState check(nu, V);
  }
};

struct GeneralDyneMeasurement {
  Matrix V_M;

  static GeneralDyneMeasurement heterodyne(Eigen::Index modes) { return {Matrix::Identity(2 * modes, 2 * modes)}; }
};

// ---------------------------------------------------------------------------
// Symplectic spectrum

namespace detail {

// H = V^{1/2} (i Omega) V^{1/2}; Hermitian and similar to i Omega V.
inline HermitianSpectrum symplectic_hermitian(const Matrix& v, const SpdRoots& roots) {
  const CMatrix s = roots.sqrt.cast<Complex>();
  const CMatrix h = s * (Complex(0.0, 1.0) * symplectic_form(v.rows() / 2).cast<Complex>()) * s;
  return hermitian_spectrum(h);
}

}  // namespace detail

/// Symplectic eigenvalues nu_1 >= ... >= nu_m of a covariance matrix.
inline std::vector<double> symplectic_eigenvalues(const Matrix& v) {
  const Eigen::Index m = detail::modes_of(v, "symplectic_eigenvalues");
  const SpdRoots roots = spd_roots(v, "symplectic_eigenvalues");
  const Vector ev = detail::symplectic_hermitian(v, roots).values;  // ascending, +-nu pairs
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<double> nu(static_cast<std::size_t>(m));
  for (Eigen::Index k = 0; k < m; ++k) {
    const double neg = ev(k), pos = ev(2 * m - 1 - k);
    if (std::abs(pos + neg) > kImagTol * scale || pos <= 0.0) {
      throw NumericalFailure("symplectic_eigenvalues: spectrum of i Omega V is not paired as +-nu");
    }
    nu[static_cast<std::size_t>(k)] = 0.5 * (pos - neg);
  }
  std::sort(nu.begin(), nu.end(), std::greater<>());
  return nu;
}

struct Williamson {
  Matrix S;  // symplectic
  Vector D;  // symplectic eigenvalues, one per mode
};

/// V = S (D (x) I2) S^T with S Omega S^T = Omega.
inline Williamson williamson(const Matrix& v) {
  const Eigen::Index m = detail::modes_of(v, "williamson");
  const SpdRoots roots = spd_roots(v, "williamson");
  const Matrix omega = symplectic_form(m);
  const Matrix a = roots.inv_sqrt * omega * roots.inv_sqrt;
  const HermitianSpectrum spec = hermitian_spectrum(Complex(0.0, 1.0) * a.cast<Complex>());

  Matrix o(2 * m, 2 * m);
  Vector d(m);
  // Positive eigenvalues 1/nu sit in the upper half of the ascending spectrum.
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index idx = 2 * m - 1 - k;
    const double lambda = spec.values(idx);
    if (!(lambda > 0.0)) throw ConditioningError("williamson: degenerate symplectic spectrum");
    const CVector u = spec.vectors.col(idx);
    o.col(2 * k) = std::sqrt(2.0) * u.imag();
    o.col(2 * k + 1) = std::sqrt(2.0) * u.real();
    d(k) = 1.0 / lambda;
  }
  Matrix scale = Matrix::Zero(2 * m, 2 * m);
  for (Eigen::Index k = 0; k < m; ++k) scale(2 * k, 2 * k) = scale(2 * k + 1, 2 * k + 1) = 1.0 / std::sqrt(d(k));
  Williamson w{roots.sqrt * o * scale, d};

  Matrix dd = Matrix::Zero(2 * m, 2 * m);
  for (Eigen::Index k = 0; k < m; ++k) dd(2 * k, 2 * k) = dd(2 * k + 1, 2 * k + 1) = d(k);
  const double tol = 1e-8 * std::max(1.0, max_abs(v));
  if (max_abs(Matrix(w.S * dd * w.S.transpose() - v)) > tol ||
      max_abs(Matrix(w.S * omega * w.S.transpose() - omega)) > tol) {
    throw ConditioningError("williamson: decomposition residual above tolerance");
  }
  return w;
}

// ---------------------------------------------------------------------------
// Exponential form

inline void require_faithful(const Matrix& v, const char* where) {
  const std::vector<double> nu = symplectic_eigenvalues(v);
  if (nu.back() <= 1.0 + kFaithfulTol) throw GaussianNotFaithful(nu.back(), where);
}

inline HamiltonianForm hamiltonian_form(const Matrix& v) {
  const Eigen::Index m = detail::modes_of(v, "hamiltonian_form");
  require_faithful(v, "hamiltonian_form");
  const SpdRoots roots = spd_roots(v, "hamiltonian_form");
  const HermitianSpectrum spec = detail::symplectic_hermitian(v, roots);
  Vector arcoth(spec.values.size());
  for (Eigen::Index i = 0; i < arcoth.size(); ++i) {
    const double l = spec.values(i);
    arcoth(i) = 0.5 * std::log((l + 1.0) / (l - 1.0));
  }
  const Complex i1(0.0, 1.0);
  const CMatrix omega = symplectic_form(m).cast<Complex>();
  const CMatrix g = 2.0 * i1 * omega * roots.sqrt.cast<Complex>() * spec.vectors * arcoth.cast<Complex>().asDiagonal() *
                    spec.vectors.adjoint() * roots.inv_sqrt.cast<Complex>();
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if (g.imag().cwiseAbs().maxCoeff() > kImagTol * scale) {
    throw NumericalFailure("hamiltonian_form: G has a non-negligible imaginary part");
  }
  const Matrix gr = g.real();
  if (!is_symmetric(gr, kImagTol * scale)) throw NumericalFailure("hamiltonian_form: G is not symmetric");

  const Complex z = (0.5 * (v.cast<Complex>() + i1 * omega)).determinant();
  if (!(z.real() > 0.0) || std::abs(z.imag()) > kImagTol * std::max(1.0, z.real())) {
    throw NumericalFailure("hamiltonian_form: det((V + i Omega)/2) is not real positive");
  }
  return {0.5 * (gr + gr.transpose()), z.real()};
}

inline HamiltonianForm hamiltonian_form(const GaussianState& s) { return hamiltonian_form(s.cov()); }

/// Exponential form valid on the support of a possibly non-faithful state.
/// In the Williamson frame, modes with nu = 1 are pure; they get G = 0 and a
/// unit factor in Z. The operator 1/2 ln Z + 1/2 r^T G r then agrees with
/// -ln rho wherever rho has weight, which is all that D and V need from it.
inline HamiltonianForm support_hamiltonian_form(const Matrix& v) {
  const std::vector<double> nu = symplectic_eigenvalues(v);
  if (nu.back() > 1.0 + kFaithfulTol) return hamiltonian_form(v);
  const Williamson w = williamson(v);
  const Eigen::Index m = w.D.size();
  Matrix g = Matrix::Zero(2 * m, 2 * m);
  double z = 1.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const double d = w.D(k);
    if (d <= 1.0 + kFaithfulTol) continue;
    g(2 * k, 2 * k) = g(2 * k + 1, 2 * k + 1) = std::log((d + 1.0) / (d - 1.0));
    z *= 0.25 * (d * d - 1.0);
  }
  const Matrix s_inv = w.S.inverse();
  const Matrix gg = s_inv.transpose() * g * s_inv;
  return {0.5 * (gg + gg.transpose()), z};
}

// ---------------------------------------------------------------------------
// Entropy and relative entropy

/// g-function of a symplectic eigenvalue, in bits.
inline double symplectic_entropy_term(double nu) {
  if (nu <= 1.0 + 1e-14) return 0.0;
  const double a = 0.5 * (nu + 1.0), b = 0.5 * (nu - 1.0);
  return a * std::log2(a) - b * std::log2(b);
}

/// Entropy of a thermal state with mean photon number nbar, in bits.
inline double thermal_entropy(double nbar) {
  if (!(nbar >= 0.0)) throw DomainError("thermal_entropy: nbar must be >= 0");
  return symplectic_entropy_term(2.0 * nbar + 1.0);
}

inline double gaussian_entropy(const Matrix& v) {
  double h = 0.0;
  for (double nu : symplectic_eigenvalues(v)) h += symplectic_entropy_term(nu);
  return h;
}

inline double gaussian_entropy(const GaussianState& s) { return gaussian_entropy(s.cov()); }

namespace detail {

inline void same_dims(const GaussianState& a, const GaussianState& b, const char* where) {
  if (a.cov().rows() != b.cov().rows()) throw DomainError(std::string(where) + ": dimension mismatch");
}

inline bool faithful(const Matrix& v) { return symplectic_eigenvalues(v).back() > 1.0 + kFaithfulTol; }

}  // namespace detail

/// D(rho || sigma) in bits. sigma must be faithful; a non-faithful rho is
/// handled through D = -H(rho) - Tr[rho ln sigma].
inline double gaussian_relative_entropy(const GaussianState& rho, const GaussianState& sigma) {
  detail::same_dims(rho, sigma, "gaussian_relative_entropy");
  const HamiltonianForm hs = hamiltonian_form(sigma);
  const Vector delta = rho.mean() - sigma.mean();
  const double mean_term = delta.dot(hs.G * delta);
  if (detail::faithful(rho.cov())) {
    const HamiltonianForm hr = hamiltonian_form(rho);
    const Matrix big_delta = hs.G - hr.G;
    return (std::log(hs.Z / hr.Z) + 0.5 * (rho.cov() * big_delta).trace() + mean_term) / (2.0 * kLn2);
  }
  const double cross = 0.5 * std::log(hs.Z) + 0.25 * (rho.cov() * hs.G).trace() + 0.5 * mean_term;
  return -gaussian_entropy(rho) + cross / kLn2;
}

/// V(rho || sigma) in bits^2. sigma must be faithful; rho may have pure
/// Williamson modes.
inline double gaussian_relative_entropy_variance(const GaussianState& rho, const GaussianState& sigma) {
  detail::same_dims(rho, sigma, "gaussian_relative_entropy_variance");
  const HamiltonianForm hs = hamiltonian_form(sigma);
  const HamiltonianForm hr = support_hamiltonian_form(rho.cov());
  const Matrix big_delta = hs.G - hr.G;
  const Matrix omega = symplectic_form(rho.modes());
  const Vector delta = rho.mean() - sigma.mean();
  const Matrix dv = big_delta * rho.cov();
  const Matrix dw = big_delta * omega;
  const double ln2sq = kLn2 * kLn2;
  return ((dv * dv).trace() + (dw * dw).trace()) / (8.0 * ln2sq) +
         delta.dot(hs.G * rho.cov() * hs.G * delta) / (2.0 * ln2sq);
}

// ---------------------------------------------------------------------------
// Ensembles

struct HolevoResult {
  double information = 0.0;  // bits
  double variance = 0.0;     // bits^2
};

namespace detail {

inline constexpr double kDecoupledTol = 1e-12;

// Modes reachable from a y-dependent mean through nonzero covariance blocks.
// Every other mode factors out as the same state in each member of the
// ensemble and contributes nothing.
inline std::vector<Eigen::Index> coupled_modes(const GaussianEnsemble& e) {
  const Eigen::Index m = e.V.rows() / 2;
  std::vector<bool> in(static_cast<std::size_t>(m), false);
  std::vector<Eigen::Index> stack;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (e.W.cols() > 0 && e.W.middleRows(2 * k, 2).cwiseAbs().maxCoeff() > kDecoupledTol) {
      in[static_cast<std::size_t>(k)] = true;
      stack.push_back(k);
    }
  }
  while (!stack.empty()) {
    const Eigen::Index k = stack.back();
    stack.pop_back();
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!in[static_cast<std::size_t>(j)] && e.V.block(2 * k, 2 * j, 2, 2).cwiseAbs().maxCoeff() > kDecoupledTol) {
        in[static_cast<std::size_t>(j)] = true;
        stack.push_back(j);
      }
    }
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < m; ++k)
    if (in[static_cast<std::size_t>(k)]) keep.push_back(k);
  return keep;
}

inline std::vector<Eigen::Index> quadrature_indices(const std::vector<Eigen::Index>& modes) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k : modes) {
    idx.push_back(2 * k);
    idx.push_back(2 * k + 1);
  }
  return idx;
}

inline GaussianEnsemble restrict_modes(const GaussianEnsemble& e, const std::vector<Eigen::Index>& modes) {
  const auto idx = quadrature_indices(modes);
  return {e.mu, e.Sigma, e.W(idx, Eigen::all), e.nu(idx), e.V(idx, idx)};
}

}  // namespace detail

/// Average covariance V + 2 W Sigma W^T of the ensemble.
inline Matrix average_covariance(const GaussianEnsemble& e) { return e.V + 2.0 * e.W * e.Sigma * e.W.transpose(); }

/// Holevo information and Holevo information variance of a Gaussian ensemble.
inline HolevoResult gaussian_holevo(const GaussianEnsemble& ensemble) {
  ensemble.validate();
  const auto modes = detail::coupled_modes(ensemble);
  if (modes.empty()) return {};
  const GaussianEnsemble e = detail::restrict_modes(ensemble, modes);

  const Matrix ve = average_covariance(e);
  // Every member lives on the support of the average state, so both sides
  // may use the support-restricted form.
  const HamiltonianForm h = support_hamiltonian_form(e.V);
  const HamiltonianForm he = support_hamiltonian_form(ve);
  const Matrix delta = he.G - h.G;
  const Matrix omega = symplectic_form(static_cast<Eigen::Index>(modes.size()));
  const Matrix wsw = e.W * e.Sigma * e.W.transpose();
  const Matrix wswg = wsw * he.G;
  const double ln2sq = kLn2 * kLn2;

  HolevoResult r;
  r.information = (std::log(he.Z / h.Z) + 0.5 * (e.V * delta).trace() + wswg.trace()) / (2.0 * kLn2);
  const Matrix dv = delta * e.V;
  const Matrix dw = delta * omega;
  r.variance = ((dv * dv).trace() + (dw * dw).trace()) / (8.0 * ln2sq) +
               ((wswg * e.V * he.G).trace() + (wswg * wswg).trace()) / (2.0 * ln2sq);
  return r;
}

/// Holevo information as H(average) - H(conditional), in bits.
inline double gaussian_holevo_entropy_route(const GaussianEnsemble& e) {
  e.validate();
  return gaussian_entropy(average_covariance(e)) - gaussian_entropy(e.V);
}

/// Ensemble induced on the unmeasured modes A by a general-dyne measurement of
/// the modes `measured` with seed covariance V_M.
inline GaussianEnsemble general_dyne_condition(const GaussianState& joint, const std::vector<Eigen::Index>& measured,
                                               const GeneralDyneMeasurement& meas) {
  const Eigen::Index m = joint.modes();
  std::vector<bool> is_b(static_cast<std::size_t>(m), false);
  for (Eigen::Index k : measured) {
    if (k < 0 || k >= m) throw ArgumentError("general_dyne_condition: measured mode index out of range");
    if (is_b[static_cast<std::size_t>(k)]) throw ArgumentError("general_dyne_condition: repeated mode index");
    is_b[static_cast<std::size_t>(k)] = true;
  }
  std::vector<Eigen::Index> a_modes, b_modes;
  for (Eigen::Index k = 0; k < m; ++k) (is_b[static_cast<std::size_t>(k)] ? b_modes : a_modes).push_back(k);
  if (b_modes.empty() || a_modes.empty()) throw ArgumentError("general_dyne_condition: partition must be nontrivial");
  if (meas.V_M.rows() != 2 * static_cast<Eigen::Index>(b_modes.size()) || meas.V_M.cols() != meas.V_M.rows()) {
    throw ArgumentError("general_dyne_condition: V_M has wrong size");
  }
  GaussianState seed(meas.V_M);  // checks the uncertainty principle

  const auto ia = detail::quadrature_indices(a_modes);
  const auto ib = detail::quadrature_indices(b_modes);
  const Matrix va = joint.cov()(ia, ia);
  const Matrix vb = joint.cov()(ib, ib);
  const Matrix vab = joint.cov()(ia, ib);
  const Matrix sum = vb + meas.V_M;
  Eigen::LLT<Matrix> llt(sum);
  if (llt.info() != Eigen::Success) throw ConditioningError("general_dyne_condition: V_B + V_M is singular");
  const Matrix w = llt.solve(vab.transpose()).transpose();

  GaussianEnsemble e;
  e.mu = joint.mean()(ib);
  e.Sigma = 0.5 * sum;
  e.W = w;
  e.nu = joint.mean()(ia) - w * e.mu;
  e.V = va - w * vab.transpose();
  e.V = 0.5 * (e.V + e.V.transpose());
  return e;
}

// ---------------------------------------------------------------------------
// State constructors

inline GaussianState vacuum(Eigen::Index modes) { return GaussianState(Matrix::Identity(2 * modes, 2 * modes)); }

inline GaussianState thermal(double nbar) {
  if (!(nbar >= 0.0)) throw DomainError("thermal: nbar must be >= 0");
  return GaussianState((2.0 * nbar + 1.0) * Matrix::Identity(2, 2));
}

inline GaussianState coherent_thermal(double nbar, const Vector& mean) {
  if (mean.size() != 2) throw DomainError("coherent_thermal: mean must have length 2");
  return GaussianState(mean, thermal(nbar).cov());
}

/// Two-mode squeezed vacuum whose reduced states are thermal with N_B photons.
inline GaussianState two_mode_squeezed_vacuum(double nb) {
  if (!(nb >= 0.0)) throw DomainError("two_mode_squeezed_vacuum: N_B must be >= 0");
  const double a = 2.0 * nb + 1.0;
  const double c = 2.0 * std::sqrt(nb * (nb + 1.0));
  Matrix v = Matrix::Zero(4, 4);
  v.diagonal().setConstant(a);
  v(0, 2) = v(2, 0) = c;
  v(1, 3) = v(3, 1) = -c;
  return GaussianState(v);
}

inline GaussianState direct_sum(const GaussianState& a, const GaussianState& b) {
  const Eigen::Index na = a.cov().rows(), nb = b.cov().rows();
  Matrix v = Matrix::Zero(na + nb, na + nb);
  v.topLeftCorner(na, na) = a.cov();
  v.bottomRightCorner(nb, nb) = b.cov();
  Vector mu(na + nb);
  mu << a.mean(), b.mean();
  return GaussianState(mu, v);
}

/// Beamsplitter B(eta) = [[sqrt(eta) I, sqrt(1-eta) I], [-sqrt(1-eta) I, sqrt(eta) I]] on modes (i, j).
inline Matrix beamsplitter_matrix(double eta, Eigen::Index modes, Eigen::Index i, Eigen::Index j) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("beamsplitter: eta must lie in [0, 1]");
  if (i == j || i < 0 || j < 0 || i >= modes || j >= modes) throw ArgumentError("beamsplitter: invalid mode pair");
  Matrix b = Matrix::Identity(2 * modes, 2 * modes);
  const double t = std::sqrt(eta), r = std::sqrt(1.0 - eta);
  for (int q = 0; q < 2; ++q) {
    b(2 * i + q, 2 * i + q) = t;
    b(2 * i + q, 2 * j + q) = r;
    b(2 * j + q, 2 * i + q) = -r;
    b(2 * j + q, 2 * j + q) = t;
  }
  return b;
}

inline GaussianState beamsplitter_apply(double eta, const GaussianState& s, Eigen::Index i, Eigen::Index j) {
  const Matrix b = beamsplitter_matrix(eta, s.modes(), i, j);
  return GaussianState(b * s.mean(), b * s.cov() * b.transpose());
}

/// Marginal on the listed modes, in the listed order.
inline GaussianState reduced(const GaussianState& s, const std::vector<Eigen::Index>& modes) {
  for (Eigen::Index k : modes) {
    if (k < 0 || k >= s.modes()) throw ArgumentError("reduced: mode index out of range");
  }
  const auto idx = detail::quadrature_indices(modes);
  return GaussianState(s.mean()(idx), s.cov()(idx, idx));
}

}  // namespace qkdrate::gaussian
