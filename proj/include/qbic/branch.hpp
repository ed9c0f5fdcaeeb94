#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "qbic/model.hpp"

namespace qbic {

using cplx = std::complex<double>;

/// Riemann sheets of the energy surface, labelled by the half planes of K_+ and K_-.
///   I: Im K_+ > 0, Im K_- > 0   II: Im K_+ < 0, Im K_- > 0
///   III: Im K_+ > 0, Im K_- < 0 IV: Im K_+ < 0, Im K_- < 0
enum class SheetId { I, II, III, IV };

inline constexpr std::array<SheetId, 4> all_sheets{SheetId::I, SheetId::II, SheetId::III, SheetId::IV};

inline const char* to_string(SheetId s) {
  switch (s) {
    case SheetId::I: return "I";
    case SheetId::II: return "II";
    case SheetId::III: return "III";
    case SheetId::IV: return "IV";
  }
  return "?";
}

constexpr SheetId sheet_from_upper(bool plus_upper, bool minus_upper) {
  if (plus_upper) return minus_upper ? SheetId::I : SheetId::III;
  return minus_upper ? SheetId::II : SheetId::IV;
}

/// True when the sheet puts the channel's wave number in the upper half plane.
constexpr bool upper_half(SheetId s, Channel ch) {
  if (ch == Channel::plus) return s == SheetId::I || s == SheetId::III;
  return s == SheetId::I || s == SheetId::II;
}

/// A complex wave number together with sin K, which is kept separately because it is the small
/// quantity near a band edge and must not be recovered from K by cancellation.
struct WaveNumber {
  cplx k;
  cplx sin_k;

  WaveNumber negated() const { return {-k, -sin_k}; }
};

/// Shifts Re k into (-pi, pi]; sin k is unchanged by the 2 pi shift.
inline WaveNumber reduce_wave_number(WaveNumber w) {
  constexpr double pi = std::numbers::pi;
  double re = std::remainder(w.k.real(), 2.0 * pi);
  if (re <= -pi) re += 2.0 * pi;
  w.k = {re + 0.0, w.k.imag() + 0.0};
  return w;
}

/// The solution of cos K = -(z + sigma t')/t with Re K in [0, pi]. 1 - cos K and 1 + cos K are formed
/// directly from z so that neither band edge loses precision.
inline WaveNumber principal_wave_number(const ModelParams& p, Channel ch, cplx z) {
  const double t = p.t_h();
  const cplx shifted = z + channel_sign(ch) * p.tp_h();
  const cplx one_minus_c = (shifted + t) / t;
  const cplx one_plus_c = (t - shifted) / t;
  const cplx c = -shifted / t;
  if (c.real() >= 0.0) {
    const cplx s = std::sqrt(one_minus_c / 2.0);
    const cplx a = std::asin(s);
    return {2.0 * a, 2.0 * s * std::sqrt(one_plus_c / 2.0)};
  }
  const cplx s = std::sqrt(one_plus_c / 2.0);
  const cplx a = std::asin(s);
  return {std::numbers::pi - 2.0 * a, 2.0 * s * std::sqrt(one_minus_c / 2.0)};
}

/// Both solutions K and -K, reduced to Re K in (-pi, pi].
inline std::array<WaveNumber, 2> wave_number_pair(const ModelParams& p, Channel ch, cplx z) {
  const WaveNumber w = principal_wave_number(p, ch, z);
  return {reduce_wave_number(w), reduce_wave_number(w.negated())};
}

struct WaveNumberCandidates {
  std::array<WaveNumber, 2> plus;
  std::array<WaveNumber, 2> minus;
};

inline WaveNumberCandidates wave_numbers(const ModelParams& p, cplx z) {
  return {wave_number_pair(p, Channel::plus, z), wave_number_pair(p, Channel::minus, z)};
}

/// The candidate lying in the half plane required by the sheet (the upper one if both are real).
inline WaveNumber select_for_sheet(const std::array<WaveNumber, 2>& pair, SheetId s, Channel ch) {
  const bool want_upper = upper_half(s, ch);
  const bool first_upper = pair[0].k.imag() > pair[1].k.imag() ||
                           (pair[0].k.imag() == pair[1].k.imag() && pair[0].k.real() >= pair[1].k.real());
  return (first_upper == want_upper) ? pair[0] : pair[1];
}

/// Diagonal lattice Green function of one channel at the origin, 1/(i t sin K).
inline cplx channel_green(const ModelParams& p, const WaveNumber& w) {
  return 1.0 / (cplx(0.0, 1.0) * p.t_h() * w.sin_k);
}

/// Branch-resolved dispersion residual z - E_d - (g^2/2) [G_+ + G_-].
inline cplx dispersion_residual(const ModelParams& p, cplx z, const WaveNumber& k_plus, const WaveNumber& k_minus) {
  const double half_g2 = 0.5 * p.g() * p.g();
  return z - p.e_d() - half_g2 * (channel_green(p, k_plus) + channel_green(p, k_minus));
}

/// Largest violation of E = -t cos K_+ - t' = -t cos K_- + t'.
inline double energy_relation_residual(const ModelParams& p, cplx z, cplx k_plus, cplx k_minus) {
  const double t = p.t_h();
  const double tp = p.tp_h();
  return std::max(std::abs(z + t * std::cos(k_plus) + tp), std::abs(z + t * std::cos(k_minus) - tp));
}

}  // namespace qbic
