#include <complex>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "qbic/branch.hpp"
#include "reference_table.hpp"

using namespace qbic;
using C = std::complex<double>;
using qbic::testing::k_distance;

namespace {
const ModelParams kReference(1.0, 0.345, 0.1, 0.3);
}

TEST(WaveNumbers, LowerBandEdgeIsDegenerate) {
  const auto pair = wave_number_pair(kReference, Channel::plus, C(-1.345, 0.0));
  EXPECT_LT(std::abs(pair[0].k), 1e-7);
  EXPECT_LT(std::abs(pair[1].k), 1e-7);
  EXPECT_LT(std::abs(pair[0].sin_k), 1e-7);
}

TEST(WaveNumbers, ReferenceP1PlusChannel) {
  const auto pair = wave_number_pair(kReference, Channel::plus, C(1.34501152, 0.0));
  const C expected(std::numbers::pi, 1.11593256);
  const double d = std::min(k_distance(pair[0].k, expected), k_distance(pair[1].k, expected));
  EXPECT_LT(d, 1e-6);
  for (const auto& w : pair) EXPECT_GT(w.k.real(), -std::numbers::pi);
}

TEST(WaveNumbers, ReferenceQ2MinusChannel) {
  const auto pair = wave_number_pair(kReference, Channel::minus, C(-0.65501370, -1.5093e-7));
  const C expected(-0.00002882, 0.00523534);
  const double d = std::min(k_distance(pair[0].k, expected), k_distance(pair[1].k, expected));
  // Eight-decimal energies move K_- by about 1e-8 / |sin K_-|.
  EXPECT_LT(d, 3e-6);
}

TEST(WaveNumbers, CandidatesAreNegatives) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const C z(u(rng), u(rng));
    for (const Channel ch : {Channel::plus, Channel::minus}) {
      const auto pair = wave_number_pair(kReference, ch, z);
      EXPECT_LT(k_distance(pair[0].k, -pair[1].k), 1e-12);
      EXPECT_LT(std::abs(pair[0].sin_k + pair[1].sin_k), 1e-12);
      for (const auto& w : pair) {
        EXPECT_GT(w.k.real(), -std::numbers::pi);
        EXPECT_LE(w.k.real(), std::numbers::pi);
      }
    }
  }
}

TEST(WaveNumbers, InvertBandEnergy) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const C z(u(rng), u(rng));
    const auto c = wave_numbers(kReference, z);
    for (int j = 0; j < 2; ++j) {
      EXPECT_LT(std::abs(-std::cos(c.plus[j].k) - 0.345 - z), 1e-12 * std::max(1.0, std::abs(z)));
      EXPECT_LT(std::abs(-std::cos(c.minus[j].k) + 0.345 - z), 1e-12 * std::max(1.0, std::abs(z)));
      EXPECT_LT(std::abs(std::sin(c.plus[j].k) - c.plus[j].sin_k), 1e-10);
    }
    EXPECT_LT(energy_relation_residual(kReference, z, c.plus[0].k, c.minus[1].k), 1e-12 * std::max(1.0, std::abs(z)));
  }
}

TEST(WaveNumbers, SinKAccurateNearEdge) {
  // Just above the lower edge sin K ~ sqrt(2 delta), far below the rounding of 1 - cos K.
  const double delta = 1e-14;
  const auto pair = wave_number_pair(kReference, Channel::plus, C(-1.345 + delta, 0.0));
  const double expected = std::sqrt(2.0 * delta);
  EXPECT_NEAR(std::abs(pair[0].sin_k), expected, 1e-3 * expected);
}

TEST(Sheets, SelectMatchesSignPattern) {
  const C z(0.29998854, -0.00153774);
  const auto c = wave_numbers(kReference, z);
  for (const SheetId s : all_sheets) {
    const WaveNumber kp = select_for_sheet(c.plus, s, Channel::plus);
    const WaveNumber km = select_for_sheet(c.minus, s, Channel::minus);
    EXPECT_EQ(sheet_from_upper(kp.k.imag() > 0.0, km.k.imag() > 0.0), s);
  }
}

TEST(Sheets, NamesAndOrder) {
  EXPECT_STREQ(to_string(SheetId::I), "I");
  EXPECT_STREQ(to_string(SheetId::IV), "IV");
  EXPECT_EQ(sheet_from_upper(true, true), SheetId::I);
  EXPECT_EQ(sheet_from_upper(false, true), SheetId::II);
  EXPECT_EQ(sheet_from_upper(true, false), SheetId::III);
  EXPECT_EQ(sheet_from_upper(false, false), SheetId::IV);
}

TEST(DispersionResidual, SmallOnReferenceStates) {
  for (const auto& row : qbic::testing::reference_table()) {
    const auto c = wave_numbers(kReference, row.energy);
    const WaveNumber kp = select_for_sheet(c.plus, row.sheet, Channel::plus);
    const WaveNumber km = select_for_sheet(c.minus, row.sheet, Channel::minus);
    // Reference energies carry eight decimals and dR/dz grows like 1/sin^3 K near an edge.
    const double s = std::min(std::abs(kp.sin_k), std::abs(km.sin_k));
    const double slope = 1.0 + 0.005 / (s * s * s);
    EXPECT_LT(std::abs(dispersion_residual(kReference, row.energy, kp, km)), 2e-8 * slope) << row.label;
    EXPECT_LT(k_distance(kp.k, row.k_plus), 1e-7 + 1e-8 / std::abs(kp.sin_k)) << row.label;
    EXPECT_LT(k_distance(km.k, row.k_minus), 1e-7 + 1e-8 / std::abs(km.sin_k)) << row.label;
  }
}
