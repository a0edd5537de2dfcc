#pragma once

// Six-state and BB84 protocols in their coarse-grained form (basis labels
// discarded after sifting). Pauli weights use the ordering
//   p1 = identity, p2 = Z, p3 = X, p4 = Y.

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "qkdrate/errors.hpp"
#include "qkdrate/info_measures.hpp"
#include "qkdrate/linalg.hpp"
#include "qkdrate/oracles/grid_search.hpp"
#include "qkdrate/second_order.hpp"

namespace qkdrate::dv {

inline constexpr double kFeasTol = 1e-12;

struct PauliChannelParams {
  double p1 = 1.0;  // I
  double p2 = 0.0;  // Z
  double p3 = 0.0;  // X
  double p4 = 0.0;  // Y

  void validate() const {
    for (double p : {p1, p2, p3, p4}) {
      if (!(p >= 0.0 && p <= 1.0)) throw DomainError("PauliChannelParams: weight outside [0, 1]");
    }
    if (std::abs(p1 + p2 + p3 + p4 - 1.0) > kFeasTol) throw DomainError("PauliChannelParams: weights must sum to 1");
  }
  std::array<double, 4> weights() const { return {p1, p2, p3, p4}; }
};

struct QberTriple {
  double qx = 0.0;
  double qy = 0.0;
  double qz = 0.0;
};

struct DvQuantities {
  double i_xy = 0.0;
  double v_xy = 0.0;
  double i_xe = 0.0;
  double v_xe = 0.0;
};

enum class Protocol { six_state, bb84 };

// ---------------------------------------------------------------------------
// Pauli algebra

inline CMatrix pauli(char which) {
  CMatrix m(2, 2);
  const Complex i(0.0, 1.0);
  switch (which) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw ArgumentError("pauli: unknown label");
  }
  return m;
}

inline CMatrix apply_pauli_channel(const PauliChannelParams& p, const CMatrix& rho) {
  const CMatrix x = pauli('X'), y = pauli('Y'), z = pauli('Z');
  return p.p1 * rho + p.p2 * z * rho * z + p.p3 * x * rho * x + p.p4 * y * rho * y;
}

/// Pauli weights from the three QBERs:
///   p_X = (Qz - Qx + Qy)/2, p_Y = (Qx - Qy + Qz)/2, p_Z = (Qy - Qz + Qx)/2.
inline PauliChannelParams qber_to_pauli(const QberTriple& q) {
  for (double v : {q.qx, q.qy, q.qz}) {
    if (!(v >= 0.0 && v <= 1.0)) throw InfeasibleQberError("qber_to_pauli: QBER outside [0, 1]");
  }
  const double px = 0.5 * (q.qz - q.qx + q.qy);
  const double py = 0.5 * (q.qx - q.qy + q.qz);
  const double pz = 0.5 * (q.qy - q.qz + q.qx);
  const double pi = 1.0 - (px + py + pz);
  for (double v : {px, py, pz, pi}) {
    if (v < -kFeasTol) throw InfeasibleQberError("qber_to_pauli: QBERs induce a negative Pauli weight");
  }
  return {std::max(pi, 0.0), std::max(pz, 0.0), std::max(px, 0.0), std::max(py, 0.0)};
}

/// Error rate in each basis is the weight of the two Paulis that flip it.
inline QberTriple pauli_to_qber(const PauliChannelParams& p) {
  return {p.p2 + p.p4, p.p3 + p.p2, p.p3 + p.p4};
}

namespace detail {

inline CVector bell_state(char which) {
  // (I (x) sigma) |Phi+>, ordering |in, out>.
  CVector phi_plus = CVector::Zero(4);
  phi_plus(0) = phi_plus(3) = 1.0 / std::sqrt(2.0);
  return kron(CMatrix::Identity(2, 2), pauli(which)) * phi_plus;
}

}  // namespace detail

/// Normalized Choi state (id (x) N)(|Phi+><Phi+|), input factor first.
inline CMatrix choi_state(const PauliChannelParams& p) {
  CMatrix j = CMatrix::Zero(4, 4);
  const std::array<std::pair<char, double>, 4> terms = {{{'I', p.p1}, {'Z', p.p2}, {'X', p.p3}, {'Y', p.p4}}};
  for (const auto& [label, w] : terms) {
    const CVector b = detail::bell_state(label);
    j += w * b * b.adjoint();
  }
  return j;
}

/// Pauli twirl of a qubit channel given by its normalized Choi state: the
/// resulting Pauli weights are the Bell-basis diagonal of the Choi state.
inline PauliChannelParams pauli_twirl(const CMatrix& choi) {
  if (choi.rows() != 4 || choi.cols() != 4) throw ArgumentError("pauli_twirl: Choi matrix must be 4x4");
  if (max_abs(CMatrix(choi - choi.adjoint())) > 1e-10) throw ArgumentError("pauli_twirl: Choi matrix not Hermitian");
  if (hermitian_spectrum(choi).values.minCoeff() < -1e-10) throw ArgumentError("pauli_twirl: Choi matrix not PSD");
  CMatrix reduced_in = CMatrix::Zero(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int k = 0; k < 2; ++k) reduced_in(a, b) += choi(2 * a + k, 2 * b + k);
  if (max_abs(CMatrix(reduced_in - 0.5 * CMatrix::Identity(2, 2))) > 1e-10) {
    throw ArgumentError("pauli_twirl: Choi matrix is not trace preserving");
  }
  auto weight = [&](char label) {
    const CVector b = detail::bell_state(label);
    return std::max((b.adjoint() * choi * b)(0).real(), 0.0);
  };
  PauliChannelParams p{weight('I'), weight('Z'), weight('X'), weight('Y')};
  const double total = p.p1 + p.p2 + p.p3 + p.p4;
  p.p1 /= total;
  p.p2 /= total;
  p.p3 /= total;
  p.p4 /= total;
  return p;
}

// ---------------------------------------------------------------------------
// Classical data: full joint distribution, sifting, coarse graining

inline int basis_count(Protocol protocol) { return protocol == Protocol::six_state ? 3 : 2; }

/// Basis b in {0: X, 1: Z, 2: Y}; bit x in {0, 1}.
inline CVector basis_state(int b, int x) {
  const double r = 1.0 / std::sqrt(2.0);
  const Complex i(0.0, 1.0);
  CVector v(2);
  switch (b) {
    case 0: v << r, (x == 0 ? r : -r); break;
    case 1: v << (x == 0 ? 1.0 : 0.0), (x == 0 ? 0.0 : 1.0); break;
    case 2: v << r, (x == 0 ? i * r : -i * r); break;
    default: throw ArgumentError("basis_state: unknown basis");
  }
  return v;
}

/// p(bA, x, bB, y) = 1/2 q_bA q_bB Tr[Pi^bB_y N(rho^{bA,x})] with uniform basis
/// choices. Row index 2 bA + x, column index 2 bB + y.
inline JointDistribution full_joint_distribution(Protocol protocol, const PauliChannelParams& p) {
  p.validate();
  const int nb = basis_count(protocol);
  const double q = 1.0 / nb;
  Matrix t(2 * nb, 2 * nb);
  for (int ba = 0; ba < nb; ++ba)
    for (int x = 0; x < 2; ++x) {
      const CVector in = basis_state(ba, x);
      const CMatrix out = apply_pauli_channel(p, in * in.adjoint());
      for (int bb = 0; bb < nb; ++bb)
        for (int y = 0; y < 2; ++y) {
          const CVector m = basis_state(bb, y);
          t(2 * ba + x, 2 * bb + y) = 0.5 * q * q * (m.adjoint() * out * m)(0).real();
        }
    }
  return JointDistribution(t);
}

/// Index pairs (2b + x, 2b + y) where the two basis labels agree.
inline std::vector<std::pair<Eigen::Index, Eigen::Index>> basis_match_filter(Protocol protocol) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> keep;
  for (int b = 0; b < basis_count(protocol); ++b)
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) keep.emplace_back(2 * b + x, 2 * b + y);
  return keep;
}

struct SiftResult {
  double p_sift = 0.0;
  JointDistribution conditioned;
};

inline SiftResult sift(const JointDistribution& j, const std::vector<std::pair<Eigen::Index, Eigen::Index>>& keep) {
  if (keep.empty()) throw DegenerateFilterError("sift: empty filter");
  Matrix kept = Matrix::Zero(j.rows(), j.cols());
  double total = 0.0;
  for (const auto& [x, y] : keep) {
    if (x < 0 || y < 0 || x >= j.rows() || y >= j.cols()) throw ArgumentError("sift: filter index out of range");
    if (kept(x, y) != 0.0) continue;
    kept(x, y) = j(x, y);
    total += j(x, y);
  }
  if (!(total > 0.0)) throw DegenerateFilterError("sift: filter keeps zero probability");
  return {total, JointDistribution(kept / total)};
}

/// The sifted tables listed for each protocol: diagonal basis blocks with
/// entries (1 - Q_b)/(2B) on matching bits and Q_b/(2B) otherwise, where B is
/// the number of bases and b = 0, 1, 2 uses Q_x, Q_z, Q_y.
inline JointDistribution sifted_distribution(Protocol protocol, const QberTriple& q) {
  qber_to_pauli(q);  // feasibility
  const int nb = basis_count(protocol);
  const std::array<double, 3> err = {q.qx, q.qz, q.qy};
  Matrix t = Matrix::Zero(2 * nb, 2 * nb);
  const double w = 1.0 / (2.0 * nb);
  for (int b = 0; b < nb; ++b)
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) t(2 * b + x, 2 * b + y) = w * (x == y ? 1.0 - err[static_cast<std::size_t>(b)] : err[static_cast<std::size_t>(b)]);
  return JointDistribution(t);
}

/// Discards basis labels: p(x2, y2) = sum over bases of p(b, x2, b', y2).
inline JointDistribution coarse_grain(const JointDistribution& j) {
  if (j.rows() % 2 || j.cols() % 2) throw ArgumentError("coarse_grain: expected (basis, bit) labels");
  Matrix t = Matrix::Zero(2, 2);
  for (Eigen::Index r = 0; r < j.rows(); ++r)
    for (Eigen::Index c = 0; c < j.cols(); ++c) t(r % 2, c % 2) += j(r, c);
  return JointDistribution(t);
}

// ---------------------------------------------------------------------------
// Information quantities

namespace detail {

// w * log2(w / total)^2 with the vanishing-weight limit.
inline double weighted_sq_log(double w, double total) {
  if (w <= 0.0) return 0.0;
  const double l = std::log2(w / total);
  return w * l * l;
}

}  // namespace detail

/// Closed forms for the coarse-grained data of a Pauli channel.
inline DvQuantities pauli_generic_quantities(const PauliChannelParams& p) {
  p.validate();
  const double a = p.p1 + p.p2;
  const double b = p.p3 + p.p4;
  DvQuantities q;
  q.i_xy = 1.0 - binary_entropy(std::clamp(a, 0.0, 1.0));
  if (a > 0.0 && b > 0.0) {
    const double l = std::log2(a / b);
    q.v_xy = a * b * l * l;
  }
  q.i_xe = shannon_entropy(p.weights()) - binary_entropy(std::clamp(a, 0.0, 1.0));
  q.v_xe = detail::weighted_sq_log(p.p1, a) + detail::weighted_sq_log(p.p2, a) + detail::weighted_sq_log(p.p3, b) +
           detail::weighted_sq_log(p.p4, b) - q.i_xe * q.i_xe;
  q.v_xe = std::max(q.v_xe, 0.0);
  return q;
}

inline PauliChannelParams six_state_pauli(double Q) { return {1.0 - 1.5 * Q, 0.5 * Q, 0.5 * Q, 0.5 * Q}; }

inline PauliChannelParams bb84_pauli(double Q, double s) { return {1.0 - 2.0 * Q + s, Q - s, Q - s, s}; }

/// Six-state quantities written directly in the average QBER.
inline DvQuantities six_state_closed_form(double Q) {
  DvQuantities q;
  const double h = binary_entropy(Q);
  q.i_xy = 1.0 - h;
  if (Q > 0.0 && Q < 1.0) {
    const double l = std::log2((1.0 - Q) / Q);
    q.v_xy = Q * (1.0 - Q) * l * l;
  }
  const double a = 1.0 - 1.5 * Q;
  q.i_xe = -xlog2x(a) - 1.5 * Q * (Q > 0.0 ? std::log2(0.5 * Q) : 0.0) - h;
  double v = Q;
  if (a > 0.0) {
    const double l = std::log2(a / (1.0 - Q));
    v += a * l * l;
  }
  if (Q > 0.0) {
    const double l = std::log2(0.5 * Q / (1.0 - Q));
    v += 0.5 * Q * l * l;
  }
  q.v_xe = std::max(v - q.i_xe * q.i_xe, 0.0);
  return q;
}

/// BB84 quantities in the average QBER Q and the unobserved parameter s.
inline DvQuantities bb84_closed_form(double Q, double s) {
  DvQuantities q;
  const double h = binary_entropy(Q);
  q.i_xy = 1.0 - h;
  if (Q > 0.0 && Q < 1.0) {
    const double l = std::log2((1.0 - Q) / Q);
    q.v_xy = Q * (1.0 - Q) * l * l;
  }
  const std::array<double, 4> w = {1.0 - 2.0 * Q + s, Q - s, Q - s, s};
  q.i_xe = shannon_entropy(w) - h;
  const double v = detail::weighted_sq_log(w[0], 1.0 - Q) + detail::weighted_sq_log(w[1], 1.0 - Q) +
                   detail::weighted_sq_log(w[2], Q) + detail::weighted_sq_log(w[3], Q);
  q.v_xe = std::max(v - q.i_xe * q.i_xe, 0.0);
  return q;
}

/// The 8x8 classical-quantum state rho_XE, X first, Eve's basis |00>,|01>,|10>,|11>.
inline Matrix rho_XE_matrix(const PauliChannelParams& p) {
  p.validate();
  Matrix m = Matrix::Zero(8, 8);
  const double r12 = std::sqrt(p.p1 * p.p2), r34 = std::sqrt(p.p3 * p.p4);
  for (int block = 0; block < 2; ++block) {
    const int o = 4 * block;
    const double sign = block == 0 ? 1.0 : -1.0;
    m(o + 0, o + 0) = p.p1;
    m(o + 1, o + 1) = p.p3;
    m(o + 2, o + 2) = p.p4;
    m(o + 3, o + 3) = p.p2;
    m(o + 0, o + 3) = m(o + 3, o + 0) = sign * r12;
    m(o + 1, o + 2) = m(o + 2, o + 1) = sign * r34;
  }
  return 0.5 * m;
}

/// Eve's conditional states {1/2, rho_E|X=0}, {1/2, rho_E|X=1} read off rho_XE.
inline CQEnsemble build_rho_XE(const PauliChannelParams& p) {
  const Matrix m = rho_XE_matrix(p);
  std::vector<DensityMatrix> states;
  states.emplace_back(Matrix(2.0 * m.block(0, 0, 4, 4)));
  states.emplace_back(Matrix(2.0 * m.block(4, 4, 4, 4)));
  return CQEnsemble(DiscreteDistribution({0.5, 0.5}), std::move(states));
}

// ---------------------------------------------------------------------------
// Entanglement-breaking regions

inline bool six_state_entanglement_breaking(double Q) { return Q >= 1.0 / 3.0 && Q <= 2.0 / 3.0; }

inline bool bb84_entanglement_breaking(double Q, double s) {
  return s >= 0.0 && s <= 0.5 && Q >= 0.5 * (s + 0.5) && Q <= 0.5 * (s + 1.0);
}

struct ChannelPoint {
  double Q = 0.0;
  double s = 0.0;  // BB84 only
};

inline bool entanglement_breaking(Protocol protocol, const ChannelPoint& c) {
  return protocol == Protocol::six_state ? six_state_entanglement_breaking(c.Q)
                                         : bb84_entanglement_breaking(c.Q, c.s);
}

// ---------------------------------------------------------------------------
// Rate pipelines

/// Six-state key rate, direct reconciliation. The average QBER fixes the
/// attack, so the uncertainty set is a single point.
inline RateBreakdown six_state_rate(double Q, const SecondOrderParams& params) {
  if (!(Q >= 0.0 && Q < 2.0 / 3.0)) throw DomainError("six_state_rate: Q must lie in [0, 2/3)");
  const DvQuantities q = pauli_generic_quantities(six_state_pauli(Q));
  const UncertaintySet set({AdversaryPoint{q.i_xe, q.v_xe, 0.0}});
  RateBreakdown r = key_rate_direct(q.i_xy, q.v_xy, set, params);
  if (six_state_entanglement_breaking(Q)) {
    r.flags |= kEntanglementBreaking;
    r.total = 0.0;
  }
  return r;
}

inline constexpr double kBb84GridStep = 1e-4;
inline constexpr double kBb84RefineTol = 1e-9;

/// Eve's attack family for BB84 at average QBER Q: grid over s in
/// [max(0, 2Q - 1), Q], plus the refined maximizers of both the finite-n
/// objective and the first-order Holevo information.
inline UncertaintySet bb84_uncertainty_set(double Q, const SecondOrderParams& params, unsigned threads = 1) {
  const double lo = std::max(0.0, 2.0 * Q - 1.0);
  const double eps = params.eve_eps();
  auto point_at = [Q](double s) {
    const DvQuantities q = pauli_generic_quantities(bb84_pauli(Q, s));
    return AdversaryPoint{q.i_xe, q.v_xe, s};
  };
  auto objective = [&](double s) {
    const AdversaryPoint p = point_at(s);
    return p.holevo - second_order_term(p.holevo_variance, params.n, eps);
  };
  auto first_order = [&](double s) { return point_at(s).holevo; };

  std::vector<double> grid;
  if (Q > lo) {
    const auto steps = static_cast<long>(std::ceil((Q - lo) / kBb84GridStep - 1e-9));
    for (long i = 0; i <= steps; ++i) grid.push_back(i == steps ? Q : lo + i * kBb84GridStep);
    grid.push_back(oracles::grid_search_max(objective, lo, Q, kBb84GridStep, kBb84RefineTol).argmax);
    grid.push_back(oracles::grid_search_max(first_order, lo, Q, kBb84GridStep, kBb84RefineTol).argmax);
  } else {
    grid.push_back(lo);
  }
  return evaluate_uncertainty_set(std::span<const double>(grid), point_at, threads);
}

/// BB84 key rate, direct reconciliation, optimized over the unobserved s.
inline RateBreakdown bb84_rate(double Q, const SecondOrderParams& params, SupMode mode = SupMode::direct,
                               unsigned threads = 1) {
  if (!(Q >= 0.0 && Q < 0.5)) throw DomainError("bb84_rate: Q must lie in [0, 1/2)");
  params.validate();
  const DvQuantities ab = bb84_closed_form(Q, 0.0);
  const UncertaintySet set = bb84_uncertainty_set(Q, params, threads);
  RateBreakdown r = key_rate_direct(ab.i_xy, ab.v_xy, set, params, mode);
  // Eve may pick any s in the set; the smallest s is the most entanglement breaking.
  if (bb84_entanglement_breaking(Q, std::max(0.0, 2.0 * Q - 1.0))) {
    r.flags |= kEntanglementBreaking;
    r.total = 0.0;
  }
  return r;
}

}  // namespace qkdrate::dv
