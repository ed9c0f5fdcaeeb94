#include <gtest/gtest.h>

#include "qbic/one_channel.hpp"
#include "qbic/spectrum.hpp"
#include "oracle_data.hpp"

using namespace qbic;

TEST(OneChannel, MatchesHighPrecisionOracle) {
  const auto oracle = qbic::testing::load_oracle();
  for (const ModelParams& p : oracle.parameter_sets()) {
    for (const Channel ch : {Channel::plus, Channel::minus}) {
      const auto states = solve_one_channel(p, ch);
      std::vector<const qbic::testing::OracleBound*> expected;
      for (const auto& b : oracle.bound) {
        if (b.params == p && b.channel == ch) expected.push_back(&b);
      }
      ASSERT_EQ(states.size(), expected.size()) << "ed=" << p.e_d() << " channel " << to_string(ch);
      for (std::size_t i = 0; i < states.size(); ++i) {
        EXPECT_NEAR(states[i].energy, expected[i]->energy, 1e-12);
        EXPECT_NEAR(states[i].k.imag(), expected[i]->kappa, 1e-10);
        EXPECT_EQ(states[i].channel, ch);
      }
    }
  }
}

TEST(OneChannel, QuotedMinusChannelBoundState) {
  const ModelParams p(1.0, 0.345, 0.1, 0.3);
  const auto states = solve_one_channel(p, Channel::minus);
  const auto it = std::find_if(states.begin(), states.end(), [](const auto& s) { return s.energy < 0.0; });
  ASSERT_NE(it, states.end());
  EXPECT_NEAR(it->energy, -0.65501371, 1e-7);
  EXPECT_NEAR(it->k.real(), 0.0, 1e-15);
  EXPECT_NEAR(it->k.imag(), 0.00523550, 1e-7);
  EXPECT_LT(it->residual, 1e-12);
}

TEST(OneChannel, CloseToQuasiBoundState) {
  const ModelParams p(1.0, 0.345, 0.1, 0.3);
  const auto one = solve_one_channel(p, Channel::minus);
  const auto q2 = *find_state(solve_spectrum(p), "Q2");
  const auto& b = *std::min_element(one.begin(), one.end(), [&](const auto& x, const auto& y) {
    return std::abs(x.energy - q2.energy.real()) < std::abs(y.energy - q2.energy.real());
  });
  EXPECT_LT(std::abs(b.energy - q2.energy.real()), 2e-7);
  EXPECT_LT(std::abs(b.k.imag() - q2.k_minus.k.imag()), 2e-7);
}

TEST(OneChannel, PlusChannelStatesLieOutsideItsBand) {
  const ModelParams p(1.0, 0.345, 0.1, 0.3);
  const auto states = solve_one_channel(p, Channel::plus);
  ASSERT_FALSE(states.empty());
  for (const auto& s : states) {
    EXPECT_TRUE(s.energy < -1.345 || s.energy > 0.655);
    EXPECT_GT(s.k.imag(), 0.0);
  }
}

TEST(OneChannel, WeakCouplingBoundStateApproachesDotLevel) {
  for (const double g : {1e-2, 1e-3}) {
    const ModelParams p(1.0, 0.345, g, 1.8);
    const auto states = solve_one_channel(p, Channel::plus);
    const auto it = std::min_element(states.begin(), states.end(), [](const auto& a, const auto& b) {
      return std::abs(a.energy - 1.8) < std::abs(b.energy - 1.8);
    });
    ASSERT_NE(it, states.end());
    EXPECT_LT(std::abs(it->energy - 1.8), g * g);
  }
}

TEST(OneChannel, RequiresCoupling) {
  EXPECT_THROW(solve_one_channel(ModelParams(1.0, 0.3, 0.0, 0.0), Channel::plus), DomainError);
}
