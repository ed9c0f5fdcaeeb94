#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "qbic/model.hpp"

using namespace qbic;

TEST(ModelParams, RejectsNonPositiveHopping) {
  EXPECT_THROW(ModelParams(0.0, 0.3, 0.1, 0.0), DomainError);
  EXPECT_THROW(ModelParams(-1.0, 0.3, 0.1, 0.0), DomainError);
}

TEST(ModelParams, RejectsNegativeCouplingAndNonFinite) {
  EXPECT_THROW(ModelParams(1.0, 0.3, -0.1, 0.0), DomainError);
  EXPECT_THROW(ModelParams(1.0, NAN, 0.1, 0.0), DomainError);
  EXPECT_THROW(ModelParams(1.0, 0.3, 0.1, INFINITY), DomainError);
}

TEST(ModelParams, WithersReplaceOneField) {
  const ModelParams p(1.0, 0.345, 0.1, 0.3);
  EXPECT_EQ(p.with_g(0.2), ModelParams(1.0, 0.345, 0.2, 0.3));
  EXPECT_EQ(p.with_e_d(-1.0), ModelParams(1.0, 0.345, 0.1, -1.0));
  EXPECT_EQ(p.with_tp_h(0.5), ModelParams(1.0, 0.5, 0.1, 0.3));
}

TEST(BandEnergy, CosineBandsOffsetByRung) {
  const ModelParams p(1.0, 0.345, 0.1, 0.3);
  EXPECT_DOUBLE_EQ(band_energy(p, Channel::plus, 0.0), -1.345);
  EXPECT_DOUBLE_EQ(band_energy(p, Channel::minus, 0.0), -0.655);
  EXPECT_NEAR(band_energy(p, Channel::plus, std::numbers::pi), 0.655, 1e-15);
  EXPECT_NEAR(band_energy(p, Channel::minus, std::numbers::pi / 2), 0.345, 1e-15);
}

TEST(BandEdges, ReferenceParameters) {
  const BandEdges e = band_edges(ModelParams(1.0, 0.345, 0.1, 0.3));
  EXPECT_DOUBLE_EQ(e.lower_band.min, -1.345);
  EXPECT_DOUBLE_EQ(e.lower_band.max, 0.655);
  EXPECT_DOUBLE_EQ(e.upper_band.min, -0.655);
  EXPECT_DOUBLE_EQ(e.upper_band.max, 1.345);
  EXPECT_TRUE(e.overlap);
}

TEST(BandEdges, DegenerateChannelsAndSeparatedBands) {
  const BandEdges same = band_edges(ModelParams(1.0, 0.0, 0.1, 0.0));
  EXPECT_EQ(same.lower_band, same.upper_band);
  EXPECT_TRUE(same.overlap);
  const BandEdges apart = band_edges(ModelParams(1.0, 1.5, 0.1, 0.0));
  EXPECT_FALSE(apart.overlap);
  EXPECT_LT(apart.lower_band.max, apart.upper_band.min);
}

TEST(DensityOfStates, BandCentreValue) {
  const ModelParams p(1.0, 0.345, 0.1, 0.3);
  EXPECT_NEAR(density_of_states(p, Channel::plus, -0.345), 1.0 / std::numbers::pi, 1e-15);
}

TEST(DensityOfStates, IntegratesToOne) {
  const ModelParams p(1.3, 0.4, 0.1, 0.3);
  // Substitute e = -t cos(theta) - t' so the edge singularities become a smooth integrand.
  const int n = 20000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double theta = std::numbers::pi * (i + 0.5) / n;
    const double e = -p.t_h() * std::cos(theta) - p.tp_h();
    sum += density_of_states(p, Channel::plus, e) * p.t_h() * std::sin(theta) * std::numbers::pi / n;
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(DensityOfStates, OutsideBandThrows) {
  const ModelParams p(1.0, 0.345, 0.1, 0.3);
  EXPECT_THROW(density_of_states(p, Channel::plus, 0.7), DomainError);
  EXPECT_THROW(density_of_states(p, Channel::minus, -0.655), DomainError);
}

TEST(DensityOfStates, DivergesAtEdges) {
  const ModelParams p(1.0, 0.345, 0.1, 0.3);
  EXPECT_GT(density_of_states(p, Channel::minus, -0.655 + 1e-10), 1e4);
}
