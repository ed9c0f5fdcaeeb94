#pragma once

#include <complex>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbic/branch.hpp"
#include "qbic/model.hpp"

namespace qbic::testing {

struct OracleRoot {
  ModelParams params;
  std::complex<double> energy;
  SheetId sheet;
};

struct OracleBound {
  ModelParams params;
  Channel channel;
  double energy;
  double kappa;
};

struct OracleData {
  std::vector<OracleRoot> roots;
  std::vector<OracleBound> bound;

  std::vector<ModelParams> parameter_sets() const {
    std::vector<ModelParams> out;
    for (const auto& r : roots) {
      bool seen = false;
      for (const auto& p : out) seen = seen || p == r.params;
      if (!seen) out.push_back(r.params);
    }
    return out;
  }
};

/// Reads the high-precision reference file written by tests/oracle/spectrum_oracle.py.
inline OracleData load_oracle() {
  std::ifstream in(std::string(QBIC_TEST_DATA) + "/oracle_spectra.txt");
  if (!in) throw std::runtime_error("cannot open oracle_spectra.txt");
  auto sheet_of = [](const std::string& s) {
    if (s == "I") return SheetId::I;
    if (s == "II") return SheetId::II;
    if (s == "III") return SheetId::III;
    if (s == "IV") return SheetId::IV;
    throw std::runtime_error("bad sheet " + s);
  };
  OracleData d;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string kind;
    double t, tp, g, ed;
    ls >> kind >> t >> tp >> g >> ed;
    if (kind == "spectrum") {
      double re, im;
      std::string sheet;
      ls >> re >> im >> sheet;
      d.roots.push_back({ModelParams(t, tp, g, ed), {re, im}, sheet_of(sheet)});
    } else if (kind == "onechannel") {
      std::string ch;
      double e, kappa;
      ls >> ch >> e >> kappa;
      d.bound.push_back({ModelParams(t, tp, g, ed), ch == "+" ? Channel::plus : Channel::minus, e, kappa});
    }
  }
  return d;
}

}  // namespace qbic::testing
