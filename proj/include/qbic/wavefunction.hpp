#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "qbic/errors.hpp"
#include "qbic/spectrum.hpp"

namespace qbic {

enum class Normalization { dot_unity, max_unity };

inline const char* to_string(Normalization n) { return n == Normalization::dot_unity ? "dot_unity" : "max_unity"; }

struct ProfileSample {
  int x = 0;
  cplx plus;
  cplx minus;
  cplx leg1;
  cplx leg2;

  cplx channel(Channel ch) const { return ch == Channel::plus ? plus : minus; }
};

/// Sampled eigenfunction psi(x, sigma) = A_sigma exp(i K_sigma |x|) plus the dot amplitude.
struct WavefunctionProfile {
  Eigenstate state;
  cplx a_plus;
  cplx a_minus;
  cplx psi_dot;
  std::vector<ProfileSample> samples;
  Normalization normalization = Normalization::dot_unity;

  cplx amplitude(Channel ch) const { return ch == Channel::plus ? a_plus : a_minus; }
  const ProfileSample* at(int x) const {
    if (samples.empty()) return nullptr;
    const long i = static_cast<long>(x) - samples.front().x;
    if (i < 0 || i >= static_cast<long>(samples.size())) return nullptr;
    return &samples[static_cast<std::size_t>(i)];
  }
};

/// Channel to leg basis: psi(x,1) = (psi_+ + psi_-)/sqrt 2, psi(x,2) = (psi_+ - psi_-)/sqrt 2.
inline std::array<cplx, 2> to_leg_basis(cplx plus, cplx minus) {
  constexpr double r = std::numbers::sqrt2 / 2.0;
  return {r * (plus + minus), r * (plus - minus)};
}

inline std::array<cplx, 2> to_channel_basis(cplx leg1, cplx leg2) {
  constexpr double r = std::numbers::sqrt2 / 2.0;
  return {r * (leg1 + leg2), r * (leg1 - leg2)};
}

/// Modulus floored for log plots.
inline double plot_modulus(cplx v) { return std::max(std::abs(v), 1e-300); }

/// Amplitude that matches channel sigma to the dot: A (i t sin K) = (g/sqrt 2) psi_d.
inline cplx matching_amplitude(const ModelParams& p, const WaveNumber& k, cplx psi_dot) {
  return p.g() * psi_dot / (std::numbers::sqrt2 * cplx(0.0, 1.0) * p.t_h() * k.sin_k);
}

/// |A_sigma (i t sin K_sigma) - (g/sqrt 2) psi_d|, the larger of the two channels.
inline double matching_residual(const ModelParams& p, const WavefunctionProfile& prof) {
  const cplx i(0.0, 1.0);
  const cplx rhs = p.g() / std::numbers::sqrt2 * prof.psi_dot;
  return std::max(std::abs(prof.a_plus * i * p.t_h() * prof.state.k_plus.sin_k - rhs),
                  std::abs(prof.a_minus * i * p.t_h() * prof.state.k_minus.sin_k - rhs));
}

inline WavefunctionProfile build_profile(const ModelParams& p, const Eigenstate& state, int x_min, int x_max,
                                         Normalization norm = Normalization::dot_unity, double tol = 1e-6) {
  if (x_min > x_max) throw DomainError("build_profile needs x_min <= x_max");
  if (!(state.residual < tol)) throw DomainError("state residual above classification tolerance");
  if (std::abs(state.k_plus.sin_k) < 1e-12 || std::abs(state.k_minus.sin_k) < 1e-12) {
    throw DomainError("edge state has no normalizable profile");
  }

  WavefunctionProfile prof;
  prof.state = state;
  prof.normalization = norm;
  prof.psi_dot = 1.0;
  prof.a_plus = matching_amplitude(p, state.k_plus, prof.psi_dot);
  prof.a_minus = matching_amplitude(p, state.k_minus, prof.psi_dot);

  const cplx i(0.0, 1.0);
  prof.samples.reserve(static_cast<std::size_t>(x_max - x_min) + 1);
  for (int x = x_min; x <= x_max; ++x) {
    const double ax = std::abs(static_cast<double>(x));
    ProfileSample s;
    s.x = x;
    s.plus = prof.a_plus * std::exp(i * state.k_plus.k * ax);
    s.minus = prof.a_minus * std::exp(i * state.k_minus.k * ax);
    const auto legs = to_leg_basis(s.plus, s.minus);
    s.leg1 = legs[0];
    s.leg2 = legs[1];
    prof.samples.push_back(s);
  }

  if (norm == Normalization::max_unity) {
    double m = std::abs(prof.psi_dot);
    for (const auto& s : prof.samples) {
      m = std::max({m, std::abs(s.plus), std::abs(s.minus), std::abs(s.leg1), std::abs(s.leg2)});
    }
    const double f = 1.0 / m;
    prof.psi_dot *= f;
    prof.a_plus *= f;
    prof.a_minus *= f;
    for (auto& s : prof.samples) {
      s.plus *= f;
      s.minus *= f;
      s.leg1 *= f;
      s.leg2 *= f;
    }
  }
  return prof;
}

/// Largest residual of the lattice Schroedinger equation (channel basis, dot row included) over the
/// interior samples, relative to the largest amplitude in the window.
inline double verify_schroedinger(const ModelParams& p, const WavefunctionProfile& prof) {
  if (prof.samples.size() < 3) throw DomainError("profile too short to check");
  const double t = p.t_h();
  const cplx z = prof.state.energy;
  const double gc = p.g() / std::numbers::sqrt2;

  double scale = std::abs(prof.psi_dot);
  for (const auto& s : prof.samples) scale = std::max({scale, std::abs(s.plus), std::abs(s.minus)});
  if (scale == 0.0) return 0.0;

  double worst = 0.0;
  for (std::size_t n = 1; n + 1 < prof.samples.size(); ++n) {
    const auto& prev = prof.samples[n - 1];
    const auto& cur = prof.samples[n];
    const auto& next = prof.samples[n + 1];
    for (const Channel ch : {Channel::plus, Channel::minus}) {
      cplx r = z * cur.channel(ch) + 0.5 * t * (next.channel(ch) + prev.channel(ch)) +
               channel_sign(ch) * p.tp_h() * cur.channel(ch);
      if (cur.x == 0) r -= gc * prof.psi_dot;
      worst = std::max(worst, std::abs(r));
    }
  }
  if (const ProfileSample* origin = prof.at(0)) {
    const cplx r = (z - p.e_d()) * prof.psi_dot - gc * (origin->plus + origin->minus);
    worst = std::max(worst, std::abs(r));
  }
  return worst / scale;
}

enum class Growth { none, plus, minus, both };

inline const char* to_string(Growth g) {
  switch (g) {
    case Growth::none: return "none";
    case Growth::plus: return "+";
    case Growth::minus: return "-";
    case Growth::both: return "both";
  }
  return "?";
}

struct DivergenceReport {
  Growth growing = Growth::none;
  /// Fitted d log|psi_sigma| / d|x| per channel; equals -Im K_sigma.
  std::array<double, 2> rate{};
  /// Largest rate among the growing channels, 0 if none grows.
  double growth_rate = 0.0;

  double channel_rate(Channel ch) const { return rate[ch == Channel::plus ? 0 : 1]; }
};

/// Fits log|psi_sigma| against |x| over the outer half of the sampled range.
inline DivergenceReport spatial_divergence_report(const WavefunctionProfile& prof) {
  int reach = 0;
  for (const auto& s : prof.samples) reach = std::max(reach, std::abs(s.x));
  if (reach < 50) throw DomainError("divergence fit needs samples out to |x| >= 50");

  DivergenceReport rep;
  for (const Channel ch : {Channel::plus, Channel::minus}) {
    std::vector<double> xs, ys;
    for (const auto& s : prof.samples) {
      const double ax = std::abs(static_cast<double>(s.x));
      if (2.0 * ax < reach) continue;
      xs.push_back(ax);
      ys.push_back(std::log(plot_modulus(s.channel(ch))));
    }
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      mx += xs[k];
      my += ys[k];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sxx += (xs[k] - mx) * (xs[k] - mx);
      sxy += (xs[k] - mx) * (ys[k] - my);
    }
    rep.rate[ch == Channel::plus ? 0 : 1] = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  const bool plus_grows = rep.rate[0] > 0.0;
  const bool minus_grows = rep.rate[1] > 0.0;
  rep.growing = plus_grows ? (minus_grows ? Growth::both : Growth::plus) : (minus_grows ? Growth::minus : Growth::none);
  if (plus_grows) rep.growth_rate = rep.rate[0];
  if (minus_grows) rep.growth_rate = std::max(rep.growth_rate, rep.rate[1]);
  return rep;
}

}  // namespace qbic
