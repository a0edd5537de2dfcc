#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "qkdrate/second_order.hpp"

using namespace qkdrate;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SecondOrderParams params(double n, double eps_i = 1e-10, double eps_ii = 1e-10) {
  SecondOrderParams p;
  p.n = n;
  p.eps_i = eps_i;
  p.eps_ii = eps_ii;
  return p;
}

}  // namespace

TEST(SecondOrderTerm, Values) {
  EXPECT_EQ(second_order_term(2.0, kInf, 1e-10), 0.0);
  EXPECT_EQ(second_order_term(0.0, 1e6, 1e-10), 0.0);
  EXPECT_NEAR(second_order_term(4.0, 1e6, 1e-10), 2e-3 * -6.3613409024040562, 1e-15);
}

TEST(SecondOrderParams, Validation) {
  EXPECT_THROW(params(0.5).validate(), DomainError);
  EXPECT_THROW(params(1e6, 0.0).validate(), DomainError);
  EXPECT_THROW(params(1e6, 1e-10, 1.0).validate(), DomainError);
  EXPECT_NO_THROW(params(kInf).validate());
  SecondOrderParams p = params(1e6, 1e-10, 1e-3);
  EXPECT_DOUBLE_EQ(p.eve_eps(), 1e-6);
  p.convention = EpsConvention::plain;
  EXPECT_DOUBLE_EQ(p.eve_eps(), 1e-3);
}

TEST(UncertaintySet, RejectsNegative) {
  EXPECT_THROW(UncertaintySet({{-0.1, 0.0, 0.0}}), DomainError);
  EXPECT_THROW(UncertaintySet({{0.1, -1.0, 0.0}}), DomainError);
  EXPECT_THROW(adversary_sup(UncertaintySet{}, params(1e6)), ArgumentError);
}

TEST(AdversarySup, Singleton) {
  const UncertaintySet set({{0.3, 0.5, 0.0}});
  const SupResult r = adversary_sup(set, params(1e6));
  EXPECT_DOUBLE_EQ(r.first, 0.3);
  EXPECT_NEAR(r.value, 0.3 - std::sqrt(0.5 / 1e6) * std_normal_inv_cdf(1e-20), 1e-15);
}

TEST(AdversarySup, PerturbativePicksLargestVarianceAmongTies) {
  const UncertaintySet set({{0.3, 0.1, 0.0}, {0.3, 0.9, 1.0}, {0.2, 5.0, 2.0}});
  EXPECT_EQ(perturbative_selection(set, 1e-20), 1u);
  const SupResult r = adversary_sup(set, params(1e6), SupMode::perturbative);
  EXPECT_EQ(r.index, 1u);
  EXPECT_DOUBLE_EQ(r.point.parameter, 1.0);
}

TEST(AdversarySup, PerturbativePicksSmallestVarianceAboveHalf) {
  const UncertaintySet set({{0.3, 0.1, 0.0}, {0.3, 0.9, 1.0}});
  EXPECT_EQ(perturbative_selection(set, 0.6), 0u);
}

TEST(AdversarySup, PerturbativeTieIsRelative) {
  const UncertaintySet set({{1000.0, 0.1, 0.0}, {1000.0 - 1e-8, 0.9, 1.0}, {1000.0 - 1e-4, 9.0, 2.0}});
  EXPECT_EQ(perturbative_selection(set, 1e-20), 1u);
}

TEST(AdversarySup, DirectDominatesPerturbative) {
  // The direct sup can pick a lower-I point whose variance term lifts it.
  const UncertaintySet set({{0.30, 0.0, 0.0}, {0.299, 4.0, 1.0}});
  const SupResult d = adversary_sup(set, params(1e6), SupMode::direct);
  const SupResult p = adversary_sup(set, params(1e6), SupMode::perturbative);
  EXPECT_EQ(d.index, 1u);
  EXPECT_EQ(p.index, 0u);
  EXPECT_GE(d.value, p.value);
  // Asymptotically both reduce to the first-order sup.
  EXPECT_DOUBLE_EQ(adversary_sup(set, params(kInf)).value, 0.30);
}

TEST(AdversarySup, DirectTieKeepsLowestIndex) {
  const UncertaintySet set({{0.3, 0.1, 0.0}, {0.3, 0.1, 1.0}});
  EXPECT_EQ(adversary_sup(set, params(1e6)).index, 0u);
}

TEST(KeyRate, NoiselessIsOneBit) {
  const RateBreakdown r = key_rate_direct(1.0, 0.0, UncertaintySet({{0.0, 0.0, 0.0}}), params(1e3));
  EXPECT_DOUBLE_EQ(r.total, 1.0);
}

TEST(KeyRate, DecompositionAndFiniteSizePenalty) {
  const UncertaintySet set({{0.2, 0.3, 0.0}});
  double prev = -kInf;
  for (double n : {1e4, 1e6, 1e8, 1e10}) {
    const RateBreakdown r = key_rate_direct(0.8, 0.5, set, params(n));
    EXPECT_NEAR(r.total, r.i_ab + r.second_ab - (r.eve_first - r.eve_second), 1e-15);
    EXPECT_LT(r.second_ab, 0.0);
    EXPECT_LT(r.eve_second, 0.0);
    EXPECT_LT(r.total, 0.6);
    EXPECT_GT(r.total, prev);
    prev = r.total;
  }
  EXPECT_DOUBLE_EQ(key_rate_direct(0.8, 0.5, set, params(kInf)).total, 0.6);
}

TEST(KeyRate, ReverseMatchesDirectShape) {
  const UncertaintySet set({{0.2, 0.3, 0.0}});
  const RateBreakdown d = key_rate_direct(0.8, 0.5, set, params(1e6));
  const RateBreakdown r = key_rate_reverse(0.8, 0.5, set, params(1e6));
  EXPECT_DOUBLE_EQ(d.total, r.total);
  EXPECT_EQ(r.reconciliation, Reconciliation::reverse);
  const RateBreakdown z = key_rate_reverse(0.8, 0.5, UncertaintySet({{0.0, 0.0, 0.0}}), params(1e6));
  EXPECT_NEAR(z.total, 0.8 + std::sqrt(0.5 / 1e6) * std_normal_inv_cdf(1e-10), 1e-15);
}

TEST(KeyRate, RejectsNegativeInputs) {
  const UncertaintySet set({{0.0, 0.0, 0.0}});
  EXPECT_THROW(key_rate_direct(-0.1, 0.0, set, params(1e6)), DomainError);
  EXPECT_THROW(key_rate_direct(0.1, -0.1, set, params(1e6)), DomainError);
  EXPECT_THROW(key_rate_direct(0.1, 0.1, set, params(0.0)), DomainError);
}

TEST(KeyRate, PlainConventionChangesEveTerm) {
  const UncertaintySet set({{0.2, 0.3, 0.0}});
  SecondOrderParams p = params(1e6, 1e-10, 1e-5);
  const double sq = key_rate_direct(0.8, 0.5, set, p).eve_second;
  p.convention = EpsConvention::plain;
  const double pl = key_rate_direct(0.8, 0.5, set, p).eve_second;
  EXPECT_NEAR(sq, std::sqrt(0.3 / 1e6) * std_normal_inv_cdf(1e-10), 1e-15);
  EXPECT_NEAR(pl, std::sqrt(0.3 / 1e6) * std_normal_inv_cdf(1e-5), 1e-15);
}

TEST(Efficiency, BetaIdentity) {
  const double i = 0.7, v = 0.4, n = 1e6;
  const double beta = reconciliation_efficiency(i, v, n, 1e-10);
  EXPECT_NEAR(beta * i, i + std::sqrt(v / n) * std_normal_inv_cdf(1e-10), 1e-15);
  EXPECT_LT(beta, 1.0);
  EXPECT_NEAR(reconciliation_efficiency(i, v, 1e16, 1e-10), 1.0, 1e-7);
  EXPECT_DOUBLE_EQ(reconciliation_efficiency(i, v, kInf, 1e-10), 1.0);
  EXPECT_THROW(reconciliation_efficiency(0.0, v, n, 1e-10), DomainError);
  EXPECT_THROW(reconciliation_efficiency(i, v, n, 1.0), DomainError);
  EXPECT_THROW(reconciliation_efficiency(i, v, 0.5, 1e-10), DomainError);
}

TEST(Efficiency, GammaIdentity) {
  const UncertaintySet set({{0.3, 0.1, 0.0}, {0.3, 0.9, 1.0}, {0.1, 5.0, 2.0}});
  const SecondOrderParams p = params(1e6);
  const double gamma = privacy_amp_overhead(set, p);
  EXPECT_NEAR(gamma * 0.3, 0.3 - std::sqrt(0.9 / 1e6) * std_normal_inv_cdf(1e-20), 1e-15);
  EXPECT_GT(gamma, 1.0);
  EXPECT_DOUBLE_EQ(privacy_amp_overhead(set, params(kInf)), 1.0);
  EXPECT_THROW(privacy_amp_overhead(UncertaintySet({{0.0, 0.0, 0.0}}), p), DomainError);
}

TEST(UncertaintySetEvaluation, ThreadedPreservesOrder) {
  std::vector<double> grid;
  for (int i = 0; i < 101; ++i) grid.push_back(i * 0.01);
  auto f = [](double s) { return AdversaryPoint{s * (1.0 - s), s, s}; };
  const UncertaintySet a = evaluate_uncertainty_set(std::span<const double>(grid), f, 1);
  const UncertaintySet b = evaluate_uncertainty_set(std::span<const double>(grid), f, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.points()[i].parameter, b.points()[i].parameter);
    EXPECT_EQ(a.points()[i].holevo, b.points()[i].holevo);
  }
  EXPECT_EQ(adversary_sup(a, params(1e6)).index, adversary_sup(b, params(1e6)).index);
}
