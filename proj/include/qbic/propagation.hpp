#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qbic/errors.hpp"
#include "qbic/ladder.hpp"
#include "qbic/spectrum.hpp"
#include "qbic/wavefunction.hpp"

namespace qbic {

using StateVector = std::vector<cplx>;

enum class Integrator { chebyshev, crank_nicolson };

enum class InitialKind { dot, truncated_eigenstate, custom };

struct SurvivalTrace {
  std::vector<double> times;
  std::vector<double> probability;
  InitialKind initial_kind = InitialKind::custom;
  std::string initial_label;  ///< eigenstate label for truncated_eigenstate
  double reflection_horizon = 0.0;
  double norm_drift = 0.0;
  double energy_drift = 0.0;
  std::vector<std::string> warnings;
};

struct EvolveOptions {
  Integrator integrator = Integrator::chebyshev;
  /// Tolerated |<psi|psi> - 1| over the run.
  double norm_tol = 1e-8;
  /// Truncation threshold for the Chebyshev series.
  double chebyshev_tol = 1e-15;
  /// Called after every recorded step with (t, psi).
  std::function<void(double, const StateVector&)> observer;
  InitialKind initial_kind = InitialKind::custom;
  std::string initial_label;
};

inline double norm2(const StateVector& v) {
  double s = 0.0;
  for (const auto& c : v) s += std::norm(c);
  return s;
}

inline cplx inner(const StateVector& a, const StateVector& b) {
  cplx s(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline double expectation(const FiniteLadder& h, const StateVector& psi) {
  StateVector hpsi;
  h.apply(psi, hpsi);
  return inner(psi, hpsi).real();
}

/// exp(-i H dt) by Chebyshev expansion on the Gershgorin interval.
class ChebyshevPropagator {
 public:
  ChebyshevPropagator(const FiniteLadder& h, double dt, double tol = 1e-15) : h_(&h) {
    const Interval g = h.gershgorin_bounds();
    center_ = 0.5 * (g.max + g.min);
    radius_ = 0.5 * (g.max - g.min) * 1.01 + 1e-12;
    const double a = radius_ * dt;
    const int kmax = static_cast<int>(a) + 200;
    for (int k = 0; k <= kmax; ++k) {
      const double j = std::cyl_bessel_j(static_cast<double>(k), a);
      coeff_.push_back((k == 0 ? 1.0 : 2.0) * j);
      if (k > a && std::abs(j) < tol) break;
    }
    phase_ = std::exp(cplx(0.0, -center_ * dt));
  }

  std::size_t terms() const { return coeff_.size(); }

  void step(StateVector& psi) const {
    const std::size_t n = psi.size();
    StateVector t_prev = psi, t_cur, tmp;
    StateVector acc(n);
    for (std::size_t i = 0; i < n; ++i) acc[i] = coeff_[0] * psi[i];
    if (coeff_.size() > 1) {
      scaled_apply(t_prev, t_cur);
      const cplx f = cplx(0.0, -1.0) * coeff_[1];
      for (std::size_t i = 0; i < n; ++i) acc[i] += f * t_cur[i];
    }
    cplx ik(0.0, -1.0);
    for (std::size_t k = 2; k < coeff_.size(); ++k) {
      scaled_apply(t_cur, tmp);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = 2.0 * tmp[i] - t_prev[i];
      ik *= cplx(0.0, -1.0);
      const cplx f = ik * coeff_[k];
      for (std::size_t i = 0; i < n; ++i) acc[i] += f * tmp[i];
      std::swap(t_prev, t_cur);
      std::swap(t_cur, tmp);
    }
    for (std::size_t i = 0; i < n; ++i) psi[i] = phase_ * acc[i];
  }

 private:
  void scaled_apply(const StateVector& in, StateVector& out) const {
    h_->apply(in, out);
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = (out[i] - center_ * in[i]) / radius_;
  }

  const FiniteLadder* h_;
  double center_ = 0.0;
  double radius_ = 1.0;
  cplx phase_;
  std::vector<double> coeff_;
};

/// Crank-Nicolson step (1 + i H dt/2) psi' = (1 - i H dt/2) psi, unitary up to the linear solve.
class CrankNicolsonPropagator {
 public:
  CrankNicolsonPropagator(const FiniteLadder& h, double dt) : h_(&h), dt_(dt), factor_(make_lhs(h, dt)) {}

  void step(StateVector& psi) const {
    StateVector hpsi;
    h_->apply(psi, hpsi);
    const cplx f(0.0, -0.5 * dt_);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] += f * hpsi[i];
    factor_.solve(psi);
  }

 private:
  static SymmetricBand<cplx> make_lhs(const FiniteLadder& h, double dt) {
    const auto& m = h.matrix();
    SymmetricBand<cplx> a(m.size(), m.width());
    const cplx f(0.0, 0.5 * dt);
    for (std::size_t d = 0; d <= m.width(); ++d) {
      const auto& diag = m.diagonal(d);
      for (std::size_t i = 0; i + d < m.size(); ++i) {
        const cplx v = f * diag[i] + (d == 0 ? cplx(1.0) : cplx(0.0));
        if (v != cplx(0.0)) a.set(i, i + d, v);
      }
    }
    return a;
  }

  const FiniteLadder* h_;
  double dt_;
  BandLdlt<cplx> factor_;
};

inline double reflection_horizon(const FiniteLadder& h) { return 2.0 * h.half_length() / h.params().t_h(); }

/// Survival probability |<psi0|psi(t)>|^2 on the grid t = 0, dt, 2 dt, ..., up to t_max.
inline SurvivalTrace evolve_survival(const FiniteLadder& h, const StateVector& initial, double t_max, double dt,
                                     const EvolveOptions& opts = {}) {
  if (!(dt > 0.0)) throw DomainError("evolve_survival needs dt > 0");
  if (!(t_max >= 0.0)) throw DomainError("evolve_survival needs t_max >= 0");
  if (initial.size() != h.dimension()) throw DomainError("initial state has the wrong dimension");
  const double n0 = norm2(initial);
  if (!(n0 > 0.0)) throw DomainError("initial state is zero");

  SurvivalTrace trace;
  trace.initial_kind = opts.initial_kind;
  trace.initial_label = opts.initial_label;
  trace.reflection_horizon = reflection_horizon(h);
  if (t_max > trace.reflection_horizon) {
    trace.warnings.push_back("t_max exceeds the reflection horizon 2L/t_h = " + std::to_string(trace.reflection_horizon) +
                             "; boundary reflections contaminate later times");
  }

  StateVector psi0 = initial;
  for (auto& c : psi0) c /= std::sqrt(n0);
  StateVector psi = psi0;
  const double e0 = expectation(h, psi0);
  const double e_scale = std::max(std::abs(e0), h.params().t_h());

  std::optional<ChebyshevPropagator> cheb;
  std::optional<CrankNicolsonPropagator> cn;
  if (opts.integrator == Integrator::chebyshev) cheb.emplace(h, dt, opts.chebyshev_tol);
  else cn.emplace(h, dt);

  const auto steps = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9));
  trace.times.reserve(steps + 1);
  trace.probability.reserve(steps + 1);
  trace.times.push_back(0.0);
  trace.probability.push_back(1.0);
  if (opts.observer) opts.observer(0.0, psi);
  for (std::size_t s = 1; s <= steps; ++s) {
    if (cheb) cheb->step(psi);
    else cn->step(psi);
    const double t = static_cast<double>(s) * dt;
    const double drift = std::abs(norm2(psi) - 1.0);
    trace.norm_drift = std::max(trace.norm_drift, drift);
    if (drift > opts.norm_tol) {
      throw IntegratorError("norm drift " + std::to_string(drift) + " exceeds tolerance at t = " + std::to_string(t), drift);
    }
    trace.times.push_back(t);
    trace.probability.push_back(std::min(1.0, std::norm(inner(psi0, psi))));
    if (opts.observer) opts.observer(t, psi);
  }
  trace.energy_drift = std::abs(expectation(h, psi) - e0) / e_scale;
  return trace;
}

struct DecayFit {
  double rate = 0.0;
  double r_squared = 0.0;
  std::optional<std::string> warning;
};

/// Least-squares slope of log P(t) over [t_lo, t_hi]; rate = -slope.
inline DecayFit fit_decay_rate(const SurvivalTrace& trace, double t_lo, double t_hi) {
  if (trace.times.empty()) throw DomainError("empty survival trace");
  if (!(t_lo < t_hi) || t_lo < trace.times.front() || t_hi > trace.times.back() + 1e-12) {
    throw DomainError("fit window outside the trace");
  }
  if (trace.reflection_horizon > 0.0 && t_hi > trace.reflection_horizon + 1e-12) {
    throw DomainError("fit window extends past the reflection horizon");
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    const double t = trace.times[i];
    if (t < t_lo - 1e-12 || t > t_hi + 1e-12) continue;
    if (!(trace.probability[i] > 0.0)) throw DomainError("survival probability vanishes inside the fit window");
    xs.push_back(t);
    ys.push_back(std::log(trace.probability[i]));
  }
  if (xs.size() < 2) throw DomainError("fit window holds fewer than two samples");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  DecayFit fit;
  const double slope = sxy / sxx;
  fit.rate = -slope;
  // A trace flat to rounding (a decoupled dot) fits perfectly with zero rate.
  const bool flat = syy <= 1e-24 * n;
  fit.r_squared = flat ? 1.0 : (sxy * sxy) / (sxx * syy);
  if (fit.r_squared < 0.9) fit.warning = "non-exponential window (r^2 = " + std::to_string(fit.r_squared) + ")";
  return fit;
}

inline StateVector dot_state(const FiniteLadder& h) {
  StateVector v(h.dimension(), cplx(0.0));
  v[h.dot_index()] = 1.0;
  return v;
}

/// Analytic eigenfunction restricted to |x| <= window, with a cosine taper over the outer taper
/// fraction of the window, normalized to one.
inline StateVector truncated_eigenstate(const FiniteLadder& h, const Eigenstate& state, int window,
                                        double taper = 0.1) {
  if (window < 1 || window > h.half_length()) throw DomainError("truncation window must lie inside the ladder");
  const WavefunctionProfile prof = build_profile(h.params(), state, -window, window);
  StateVector v(h.dimension(), cplx(0.0));
  v[h.dot_index()] = prof.psi_dot;
  for (const auto& s : prof.samples) {
    const double f = std::abs(static_cast<double>(s.x)) / window;
    double w = 1.0;
    if (taper > 0.0 && f > 1.0 - taper) w = 0.5 * (1.0 + std::cos(std::numbers::pi * (f - (1.0 - taper)) / taper));
    v[h.index(s.x, 1)] = w * s.leg1;
    v[h.index(s.x, 2)] = w * s.leg2;
  }
  const double n = std::sqrt(norm2(v));
  for (auto& c : v) c /= n;
  return v;
}

}  // namespace qbic
