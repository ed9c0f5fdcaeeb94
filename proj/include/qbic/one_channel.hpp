#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "qbic/errors.hpp"
#include "qbic/model.hpp"
#include "qbic/polynomial.hpp"
#include "qbic/roots.hpp"

namespace qbic {

/// Bound state of one channel coupled alone to the dot with strength g/sqrt 2.
struct OneChannelState {
  double energy = 0.0;
  std::complex<double> k;  ///< i kappa below the band, pi + i kappa above it
  Channel channel = Channel::plus;
  double residual = 0.0;
};

/// Residual of z - E_d - (g^2/2) / (i t sin K) on the decaying branch (Im K > 0).
inline double one_channel_residual(const ModelParams& p, double z, double kappa, bool above) {
  const double sh = std::sinh(kappa);
  const double self = 0.5 * p.g() * p.g() / (p.t_h() * sh);
  return std::abs(z - p.e_d() + (above ? -self : self));
}

namespace detail {

/// (z - E_d)^2 ((z + sigma t')^2 - t^2) - g^4/4, the squared one-channel equation.
inline Polynomial<double> one_channel_quartic(const ModelParams& p, Channel ch) {
  using C = std::complex<double>;
  const double t = p.t_h();
  const double s = channel_sign(ch) * p.tp_h();
  const double g2 = p.g() * p.g();
  const Polynomial<double> a({C(-p.e_d()), C(1)});
  const Polynomial<double> b({C(s * s - t * t), C(2 * s), C(1)});
  return a * a * b - Polynomial<double>::constant(C(g2 * g2 / 4));
}

}  // namespace detail

/// Bound states of one channel. The squared equation is rooted, real roots outside the band are kept,
/// and each is polished by Newton in kappa on the unsquared equation, which also rejects the spurious
/// branch that squaring introduced.
inline std::vector<OneChannelState> solve_one_channel(const ModelParams& p, Channel ch) {
  if (!(p.g() > 0.0)) throw DomainError("solve_one_channel needs g > 0");
  const double t = p.t_h();
  const double s = channel_sign(ch) * p.tp_h();
  const double half_g2 = 0.5 * p.g() * p.g();
  const Interval band = band_edges(p).band(ch);

  std::vector<OneChannelState> out;
  const RootSet roots = find_roots(detail::one_channel_quartic(p, ch));
  for (const auto& z0 : roots.roots) {
    if (std::abs(z0.imag()) > 1e-6 * std::max(1.0, std::abs(z0))) continue;
    const double e0 = z0.real();
    if (band.contains_strictly(e0)) continue;
    const bool above = e0 >= band.max;
    // Below the band z = -t cosh kappa - s; above it z = t cosh kappa - s.
    const double sign = above ? 1.0 : -1.0;
    double kappa = std::acosh(std::max(1.0, std::abs(e0 + s) / t));
    if (kappa == 0.0) kappa = 1e-8;
    for (int it = 0; it < 100; ++it) {
      const double sh = std::sinh(kappa);
      const double ch_k = std::cosh(kappa);
      const double z = sign * t * ch_k - s;
      // f = sinh(kappa) (z - E_d) - sign g^2/(2t), pole free.
      const double f = sh * (z - p.e_d()) - sign * half_g2 / t;
      const double df = ch_k * (z - p.e_d()) + sh * sign * t * sh;
      if (df == 0.0) break;
      double step = f / df;
      // Stay on kappa > 0.
      while (kappa - step <= 0.0) step *= 0.5;
      kappa -= step;
      if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * kappa) break;
    }
    const double z = sign * t * std::cosh(kappa) - s;
    const double res = one_channel_residual(p, z, kappa, above);
    if (!(res <= 1e-12 * std::max({1.0, std::abs(z), std::abs(p.e_d())}))) continue;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const OneChannelState& o) {
      return std::abs(o.energy - z) <= 1e-12 * std::max(1.0, std::abs(z));
    });
    if (dup) continue;
    OneChannelState st;
    st.energy = z;
    st.k = above ? std::complex<double>(std::numbers::pi, kappa) : std::complex<double>(0.0, kappa);
    st.channel = ch;
    st.residual = res;
    out.push_back(st);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
  return out;
}

}  // namespace qbic
