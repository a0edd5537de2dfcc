#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "qkdrate/dv_protocols.hpp"
#include "qkdrate/verify.hpp"

using namespace qkdrate;
using namespace qkdrate::dv;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SecondOrderParams at(double n) {
  SecondOrderParams p;
  p.n = n;
  return p;
}

// Random qubit channel as Kraus operators from a random 8x2 isometry.
std::vector<CMatrix> random_kraus(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix a(8, 2);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<CMatrix> qr(a);
  const CMatrix v = qr.householderQ() * CMatrix::Identity(8, 2);
  std::vector<CMatrix> k;
  for (int i = 0; i < 4; ++i) k.push_back(v.block(2 * i, 0, 2, 2));
  return k;
}

CMatrix apply_kraus(const std::vector<CMatrix>& k, const CMatrix& rho) {
  CMatrix out = CMatrix::Zero(2, 2);
  for (const auto& m : k) out += m * rho * m.adjoint();
  return out;
}

CMatrix choi_of(const std::vector<CMatrix>& k) {
  CMatrix j = CMatrix::Zero(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      CMatrix e = CMatrix::Zero(2, 2);
      e(a, b) = 1.0;
      j += 0.5 * kron(e, apply_kraus(k, e));
    }
  return j;
}

void expect_params_near(const PauliChannelParams& a, const PauliChannelParams& b, double tol) {
  EXPECT_NEAR(a.p1, b.p1, tol);
  EXPECT_NEAR(a.p2, b.p2, tol);
  EXPECT_NEAR(a.p3, b.p3, tol);
  EXPECT_NEAR(a.p4, b.p4, tol);
}

}  // namespace

TEST(Qber, KnownConversions) {
  expect_params_near(qber_to_pauli({0.0, 0.0, 0.0}), {1.0, 0.0, 0.0, 0.0}, 1e-15);
  expect_params_near(qber_to_pauli({0.1, 0.1, 0.1}), {0.85, 0.05, 0.05, 0.05}, 1e-15);
  expect_params_near(qber_to_pauli({0.5, 0.5, 0.5}), {0.25, 0.25, 0.25, 0.25}, 1e-15);
}

TEST(Qber, RoundTrip) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const PauliChannelParams p = qkdrate::detail::random_pauli(rng);
    expect_params_near(qber_to_pauli(pauli_to_qber(p)), p, 1e-12);
    const QberTriple q = pauli_to_qber(p);
    const QberTriple back = pauli_to_qber(qber_to_pauli(q));
    EXPECT_NEAR(back.qx, q.qx, 1e-12);
    EXPECT_NEAR(back.qy, q.qy, 1e-12);
    EXPECT_NEAR(back.qz, q.qz, 1e-12);
  }
}

TEST(Qber, Infeasible) {
  EXPECT_THROW(qber_to_pauli({0.9, 0.0, 0.0}), InfeasibleQberError);
  EXPECT_THROW(qber_to_pauli({1.0, 1.0, 1.0}), InfeasibleQberError);
  EXPECT_THROW(qber_to_pauli({-0.1, 0.0, 0.0}), InfeasibleQberError);
  EXPECT_THROW(sifted_distribution(Protocol::six_state, {0.9, 0.0, 0.0}), InfeasibleQberError);
}

TEST(Qber, MatchesChannelErrorRates) {
  // Q_b is the flip probability of the channel on basis-b states.
  const PauliChannelParams p{0.7, 0.1, 0.15, 0.05};
  const QberTriple q = pauli_to_qber(p);
  auto flip = [&](int b) {
    const CVector in = basis_state(b, 0), out = basis_state(b, 1);
    return (out.adjoint() * apply_pauli_channel(p, in * in.adjoint()) * out)(0).real();
  };
  EXPECT_NEAR(flip(0), q.qx, 1e-15);
  EXPECT_NEAR(flip(1), q.qz, 1e-15);
  EXPECT_NEAR(flip(2), q.qy, 1e-15);
}

TEST(Twirl, PauliChannelIsFixedPoint) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 20; ++k) {
    const PauliChannelParams p = qkdrate::detail::random_pauli(rng);
    expect_params_near(pauli_twirl(choi_state(p)), p, 1e-12);
  }
  expect_params_near(pauli_twirl(choi_state({1.0, 0.0, 0.0, 0.0})), {1.0, 0.0, 0.0, 0.0}, 1e-15);
}

TEST(Twirl, MatchesExplicitConjugationAverage) {
  std::mt19937_64 rng(13);
  const std::array<char, 4> labels = {'I', 'X', 'Y', 'Z'};
  for (int trial = 0; trial < 20; ++trial) {
    const auto k = random_kraus(rng);
    const PauliChannelParams p = pauli_twirl(choi_of(k));
    for (int b = 0; b < 3; ++b) {
      const CVector v = basis_state(b, trial % 2);
      const CMatrix rho = v * v.adjoint();
      CMatrix avg = CMatrix::Zero(2, 2);
      for (char l : labels) {
        const CMatrix s = pauli(l);
        avg += 0.25 * s * apply_kraus(k, s * rho * s) * s;
      }
      EXPECT_LT(max_abs(CMatrix(avg - apply_pauli_channel(p, rho))), 1e-12);
    }
  }
}

TEST(Twirl, RejectsInvalidChoi) {
  EXPECT_THROW(pauli_twirl(CMatrix::Identity(2, 2)), ArgumentError);
  EXPECT_THROW(pauli_twirl(CMatrix(CMatrix::Identity(4, 4) * 0.5)), ArgumentError);
  CMatrix bad = choi_state({0.9, 0.1, 0.0, 0.0});
  bad(0, 1) = 0.3;
  EXPECT_THROW(pauli_twirl(bad), ArgumentError);
}

TEST(Sifting, SiftProbabilities) {
  const PauliChannelParams p{0.8, 0.1, 0.05, 0.05};
  EXPECT_NEAR(sift(full_joint_distribution(Protocol::six_state, p), basis_match_filter(Protocol::six_state)).p_sift,
              1.0 / 3.0, 1e-15);
  EXPECT_NEAR(sift(full_joint_distribution(Protocol::bb84, p), basis_match_filter(Protocol::bb84)).p_sift, 0.5,
              1e-15);
}

TEST(Sifting, FullTableReproducesListedTables) {
  std::mt19937_64 rng(14);
  for (Protocol proto : {Protocol::six_state, Protocol::bb84}) {
    for (int k = 0; k < 20; ++k) {
      const PauliChannelParams p = qkdrate::detail::random_pauli(rng);
      const SiftResult s = sift(full_joint_distribution(proto, p), basis_match_filter(proto));
      const JointDistribution listed = sifted_distribution(proto, pauli_to_qber(p));
      EXPECT_LT(max_abs(Matrix(s.conditioned.table() - listed.table())), 1e-14);
    }
  }
}

TEST(Sifting, TableEntries) {
  const JointDistribution six = sifted_distribution(Protocol::six_state, {0.1, 0.2, 0.3});
  EXPECT_NEAR(six(0, 0), 0.9 / 6.0, 1e-15);  // X basis, agree
  EXPECT_NEAR(six(2, 3), 0.3 / 6.0, 1e-15);  // Z basis, disagree
  EXPECT_NEAR(six(4, 5), 0.2 / 6.0, 1e-15);  // Y basis, disagree
  EXPECT_EQ(six(0, 2), 0.0);
  const JointDistribution bb = sifted_distribution(Protocol::bb84, {0.1, 0.0, 0.1});
  EXPECT_NEAR(bb(1, 1), 0.9 / 4.0, 1e-15);
  EXPECT_NEAR(bb(3, 2), 0.1 / 4.0, 1e-15);
}

TEST(Sifting, DegenerateFilters) {
  const JointDistribution j = full_joint_distribution(Protocol::bb84, {1.0, 0.0, 0.0, 0.0});
  EXPECT_THROW(sift(j, {}), DegenerateFilterError);
  EXPECT_THROW(sift(j, {{0, 1}}), DegenerateFilterError);  // X basis never flips
  EXPECT_THROW(sift(j, {{9, 0}}), ArgumentError);
}

TEST(Sifting, CoarseGrainedAverageQber) {
  const JointDistribution c = coarse_grain(sifted_distribution(Protocol::six_state, {0.1, 0.2, 0.3}));
  EXPECT_NEAR(c(0, 1) + c(1, 0), 0.2, 1e-15);
  EXPECT_NEAR(c.marginal_x()(0), 0.5, 1e-15);
}

TEST(ClosedForms, Noiseless) {
  const DvQuantities q = pauli_generic_quantities({1.0, 0.0, 0.0, 0.0});
  EXPECT_EQ(q.i_xy, 1.0);
  EXPECT_EQ(q.v_xy, 0.0);
  EXPECT_NEAR(q.i_xe, 0.0, 1e-15);
  EXPECT_NEAR(q.v_xe, 0.0, 1e-15);
}

TEST(ClosedForms, SixStateSubstitution) {
  for (double Q = 0.0; Q < 0.66; Q += 0.01) {
    const DvQuantities a = pauli_generic_quantities(six_state_pauli(Q));
    const DvQuantities b = six_state_closed_form(Q);
    EXPECT_NEAR(a.i_xy, b.i_xy, 1e-12);
    EXPECT_NEAR(a.v_xy, b.v_xy, 1e-12);
    EXPECT_NEAR(a.i_xe, b.i_xe, 1e-12);
    EXPECT_NEAR(a.v_xe, b.v_xe, 1e-12);
  }
}

TEST(ClosedForms, Bb84Substitution) {
  for (double Q : {0.01, 0.05, 0.1, 0.2}) {
    for (double f : {0.0, 0.1, 0.5, 1.0}) {
      const double s = f * Q;
      const DvQuantities a = pauli_generic_quantities(bb84_pauli(Q, s));
      const DvQuantities b = bb84_closed_form(Q, s);
      EXPECT_NEAR(a.i_xe, b.i_xe, 1e-12);
      EXPECT_NEAR(a.v_xe, b.v_xe, 1e-12);
      EXPECT_NEAR(a.i_xy, b.i_xy, 1e-12);
    }
  }
}

TEST(ClosedForms, MatchExplicitStateAndTable) {
  std::mt19937_64 rng(15);
  for (int k = 0; k < 100; ++k) {
    const PauliChannelParams p = qkdrate::detail::random_pauli(rng);
    const DvQuantities q = pauli_generic_quantities(p);
    const CQEnsemble e = build_rho_XE(p);
    EXPECT_NEAR(q.i_xe, holevo_information(e), 1e-10);
    EXPECT_NEAR(q.v_xe, holevo_information_variance(e), 1e-10);
    const auto z = sift(full_joint_distribution(Protocol::bb84, p), {{2, 2}, {2, 3}, {3, 2}, {3, 3}});
    EXPECT_NEAR(q.i_xy, mutual_information(z.conditioned), 1e-10);
    EXPECT_NEAR(q.v_xy, mutual_information_variance(z.conditioned), 1e-10);
  }
}

TEST(RhoXE, StructureAndSpectrum) {
  const PauliChannelParams p{0.7, 0.1, 0.15, 0.05};
  const Matrix m = rho_XE_matrix(p);
  EXPECT_NEAR(m.trace(), 1.0, 1e-15);
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues();
  EXPECT_GE(ev.minCoeff(), -1e-15);
  const Matrix e = m.block(0, 0, 4, 4) + m.block(4, 4, 4, 4);
  const Vector expected = Vector{{0.7, 0.15, 0.05, 0.1}};
  EXPECT_LT(max_abs(Matrix(e - Matrix(expected.asDiagonal()))), 1e-15);
}

TEST(RhoXE, IdentityChannelGivesEqualPureStates) {
  const CQEnsemble e = build_rho_XE({1.0, 0.0, 0.0, 0.0});
  EXPECT_NEAR(holevo_information(e), 0.0, 1e-12);
}

TEST(EntanglementBreaking, Regions) {
  EXPECT_FALSE(six_state_entanglement_breaking(0.3));
  EXPECT_TRUE(six_state_entanglement_breaking(1.0 / 3.0));
  EXPECT_TRUE(six_state_entanglement_breaking(0.5));
  EXPECT_TRUE(bb84_entanglement_breaking(0.25, 0.0));
  EXPECT_FALSE(bb84_entanglement_breaking(0.2, 0.0));
  EXPECT_TRUE(bb84_entanglement_breaking(0.3, 0.1));
  EXPECT_TRUE(entanglement_breaking(Protocol::bb84, {0.5, 0.5}));
}

TEST(EntanglementBreaking, ImpliesZeroHolevoGap) {
  // On an EB channel Eve holds at least as much as Bob: I_XY - I_XE <= 0.
  for (double Q = 1.0 / 3.0; Q < 0.66; Q += 0.02) {
    const DvQuantities q = six_state_closed_form(Q);
    EXPECT_LE(q.i_xy - q.i_xe, 1e-12);
  }
}

TEST(SixStateRate, Values) {
  EXPECT_DOUBLE_EQ(six_state_rate(0.0, at(1e6)).total, 1.0);
  EXPECT_NEAR(six_state_rate(0.05, at(kInf)).total, 0.49681626831941620, 1e-12);
  double prev = -kInf;
  for (double n : {1e6, 1e7, 1e8, 1e9, 1e10}) {
    const double r = six_state_rate(0.05, at(n)).total;
    EXPECT_GT(r, prev);
    EXPECT_LT(r, 0.49681626831941620);
    prev = r;
  }
}

TEST(SixStateRate, EntanglementBreakingIsZero) {
  const RateBreakdown r = six_state_rate(0.4, at(1e6));
  EXPECT_EQ(r.total, 0.0);
  EXPECT_TRUE(r.flags & kEntanglementBreaking);
  EXPECT_THROW(six_state_rate(0.7, at(1e6)), DomainError);
  EXPECT_THROW(six_state_rate(-0.1, at(1e6)), DomainError);
}

TEST(Bb84Rate, AsymptoteIsOneMinusTwoH) {
  for (double Q : {0.0, 0.01, 0.03, 0.05, 0.08, 0.1}) {
    const double expected = 1.0 - 2.0 * binary_entropy(Q);
    EXPECT_NEAR(bb84_rate(Q, at(kInf)).total, expected, 1e-9) << "Q=" << Q;
  }
  EXPECT_NEAR(bb84_rate(0.05, at(kInf)).total, 0.42720608576808774, 1e-9);
}

TEST(Bb84Rate, FirstOrderMaximizerIsQSquared) {
  for (double Q : {0.01, 0.03, 0.05, 0.1, 0.2}) {
    const auto m = oracles::grid_search_max(
        [Q](double s) { return pauli_generic_quantities(bb84_pauli(Q, s)).i_xe; }, 0.0, Q, 1e-4, 1e-10);
    EXPECT_NEAR(m.argmax, Q * Q, 1e-6) << "Q=" << Q;
  }
  EXPECT_NEAR(bb84_rate(0.05, at(kInf)).argmax_label, 0.0025, 1e-6);
}

TEST(Bb84Rate, NoiselessAndOrdering) {
  EXPECT_DOUBLE_EQ(bb84_rate(0.0, at(1e6)).total, 1.0);
  for (double Q : {0.01, 0.03, 0.05, 0.08}) {
    for (double n : {1e6, 1e8, kInf}) EXPECT_LE(bb84_rate(Q, at(n)).total, six_state_rate(Q, at(n)).total + 1e-12);
  }
}

TEST(Bb84Rate, IncreasesWithBlocklength) {
  double prev = -kInf;
  for (double n : {1e6, 1e7, 1e8, 1e9, 1e10}) {
    const double r = bb84_rate(0.05, at(n)).total;
    EXPECT_GT(r, prev);
    prev = r;
  }
  EXPECT_LT(prev, 0.42720608576808774);
}

TEST(Bb84Rate, ModesAgreeAtLargeBlocklength) {
  for (double n : {1e8, 1e10}) {
    EXPECT_NEAR(bb84_rate(0.05, at(n), SupMode::direct).total, bb84_rate(0.05, at(n), SupMode::perturbative).total,
                1e-9);
  }
  EXPECT_GE(bb84_rate(0.05, at(1e6), SupMode::perturbative).total + 1e-15,
            bb84_rate(0.05, at(1e6), SupMode::direct).total);
}

TEST(Bb84Rate, ThreadsDoNotChangeResult) {
  EXPECT_EQ(bb84_rate(0.05, at(1e7), SupMode::direct, 1).total, bb84_rate(0.05, at(1e7), SupMode::direct, 3).total);
}

TEST(Bb84Rate, EntanglementBreakingAndRange) {
  const RateBreakdown r = bb84_rate(0.3, at(1e6));
  EXPECT_EQ(r.total, 0.0);
  EXPECT_TRUE(r.flags & kEntanglementBreaking);
  EXPECT_THROW(bb84_rate(0.5, at(1e6)), DomainError);
}
