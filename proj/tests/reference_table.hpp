#pragma once

#include <array>
#include <complex>
#include <string>

#include "qbic/branch.hpp"

namespace qbic::testing {

struct ReferenceRow {
  std::string label;
  std::complex<double> energy;
  std::complex<double> k_plus;
  std::complex<double> k_minus;
  SheetId sheet;
};

/// Reference spectrum at t_h = 1, t'_h = 0.345, g = 0.1, E_d = 0.3. Blank real parts are zero.
inline const std::array<ReferenceRow, 12>& reference_table() {
  using C = std::complex<double>;
  static const std::array<ReferenceRow, 12> rows = {{
      {"P1", C(1.34501152, 0), C(3.14159265, 1.11593256), C(3.14159265, 0.00480148), SheetId::I},
      {"P2", C(-1.34500463, 0), C(0, 0.00304629), C(0, 1.11592751), SheetId::I},
      {"Q1", C(1.34501136, 0), C(3.14159265, -1.11593245), C(3.14159265, 0.00476787), SheetId::II},
      {"Q2", C(-0.65501370, -1.5093e-7), C(1.25558888, -1.5875e-7), C(-0.00002882, 0.00523534), SheetId::II},
      {"Q3", C(-0.65501370, 1.5093e-7), C(-1.25558888, -1.5875e-7), C(0.00002882, 0.00523534), SheetId::II},
      {"Q4", C(0.29998854, -0.00153774), C(2.27180290, -0.00201224), C(-1.52576970, 0.00153930), SheetId::II},
      {"Q5", C(0.29998854, 0.00153774), C(-2.27180290, -0.00201224), C(1.52576970, 0.00153930), SheetId::II},
      {"R1", C(-1.34500459, 0), C(0, 0.00303273), C(0, -1.11592748), SheetId::III},
      {"R2", C(0.65509906, -2.9331e-6), C(-3.14138429, 0.01407702), C(1.88609355, -3.0852e-6), SheetId::III},
      {"R3", C(0.65509906, 2.9331e-6), C(3.14138429, 0.01407702), C(-1.88609355, -3.0852e-6), SheetId::III},
      {"S1", C(0.29991927, -0.01154476), C(2.27161773, -0.01510419), C(1.52570333, -0.01155625), SheetId::IV},
      {"S2", C(0.29991927, 0.01154476), C(-2.27161773, -0.01510419), C(-1.52570333, -0.01155625), SheetId::IV},
  }};
  return rows;
}

/// Distance between wave numbers with real parts compared modulo 2 pi.
inline double k_distance(std::complex<double> a, std::complex<double> b) {
  const double dre = std::remainder(a.real() - b.real(), 2.0 * 3.14159265358979323846);
  return std::hypot(dre, a.imag() - b.imag());
}

}  // namespace qbic::testing
