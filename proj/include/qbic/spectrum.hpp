#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qbic/branch.hpp"
#include "qbic/errors.hpp"
#include "qbic/model.hpp"
#include "qbic/polynomial.hpp"
#include "qbic/roots.hpp"

namespace qbic {

enum class StateKind { bound, resonant, antiresonant, real_embedded };

inline const char* to_string(StateKind k) {
  switch (k) {
    case StateKind::bound: return "bound";
    case StateKind::resonant: return "resonant";
    case StateKind::antiresonant: return "antiresonant";
    case StateKind::real_embedded: return "real_embedded";
  }
  return "?";
}

/// How a state was obtained: directly from its polynomial root, or by the multi-start pass that
/// resolves near-degenerate root clusters.
enum class Provenance { polynomial_root, multistart };

/// One discrete solution of the dispersion equation on a definite Riemann sheet.
struct Eigenstate {
  cplx energy;
  WaveNumber k_plus;
  WaveNumber k_minus;
  SheetId sheet = SheetId::I;
  double residual = 0.0;  ///< |branch-resolved dispersion residual|
  std::string label;
  StateKind kind = StateKind::resonant;
  bool edge_degenerate = false;
  Provenance provenance = Provenance::polynomial_root;
  int iterations = 0;

  const WaveNumber& wave_number(Channel ch) const { return ch == Channel::plus ? k_plus : k_minus; }
};

/// Refinement left the sheet it started on.
class NearCutError : public Error {
 public:
  NearCutError(const std::string& what, Eigenstate last) : Error(what), last_(std::move(last)) {}
  const Eigenstate& last_iterate() const { return last_; }

 private:
  Eigenstate last_;
};

struct SpectrumOptions {
  RootFinderOptions roots;
  /// Largest residual accepted when assigning a raw polynomial root to a sheet.
  double classify_tol = 1e-6;
  /// Newton target on the branch-resolved residual, relative to max(1, |z|, |E_d|).
  double refine_tol = 1e-13;
  int refine_max_iter = 60;
  /// |Im E| below this (times t_h) counts as a real energy.
  double real_axis_tol = 1e-12;
  /// |Im K| below this means the state sits on a branch cut and has no definite sheet.
  double on_cut_tol = 1e-14;
  /// Distance to a band edge below which a state is flagged edge-degenerate.
  double edge_tol = 1e-8;
  /// Two states on the same sheet are the same state if E, K_+ and K_- all agree to this.
  double dedupe_tol = 1e-9;
};

namespace detail {

inline double residual_scale(const ModelParams& p, cplx z) {
  return std::max({1.0, std::abs(z), std::abs(p.e_d())});
}

/// Residual scale at a point where one channel's wave number is recovered from z by arccos: rounding in
/// z reaches that channel's self-energy amplified by 1/sin^2 K.
inline double residual_scale(const ModelParams& p, cplx z, const WaveNumber& derived) {
  const double sigma = 0.5 * p.g() * p.g() / (p.t_h() * std::abs(derived.sin_k));
  const double s2 = std::norm(derived.sin_k);
  return residual_scale(p, z) + sigma * std::max(1.0, std::abs(z)) / (p.t_h() * s2);
}

/// Distance between wave numbers modulo 2 pi.
inline double wave_number_distance(cplx a, cplx b) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double dre = std::remainder(a.real() - b.real(), two_pi);
  return std::hypot(dre, a.imag() - b.imag());
}

inline WaveNumber nearest_candidate(const std::array<WaveNumber, 2>& pair, cplx previous) {
  return wave_number_distance(pair[0].k, previous) <= wave_number_distance(pair[1].k, previous) ? pair[0] : pair[1];
}

inline double distance_to_edge(const ModelParams& p, cplx z) {
  const BandEdges e = band_edges(p);
  double d = std::numeric_limits<double>::infinity();
  for (double edge : {e.lower_band.min, e.lower_band.max, e.upper_band.min, e.upper_band.max}) {
    d = std::min(d, std::abs(z - edge));
  }
  return d;
}

inline StateKind kind_for(SheetId sheet, cplx z, double real_axis_tol, double t_h) {
  if (std::abs(z.imag()) < real_axis_tol * t_h) {
    return sheet == SheetId::I ? StateKind::bound : StateKind::real_embedded;
  }
  return z.imag() < 0.0 ? StateKind::resonant : StateKind::antiresonant;
}

inline Eigenstate make_state(const ModelParams& p, cplx z, const WaveNumber& kp, const WaveNumber& km,
                             SheetId sheet, const SpectrumOptions& opts) {
  Eigenstate s;
  s.energy = {z.real() + 0.0, z.imag() + 0.0};
  s.k_plus = reduce_wave_number(kp);
  s.k_minus = reduce_wave_number(km);
  s.sheet = sheet;
  s.residual = std::abs(dispersion_residual(p, z, kp, km));
  s.kind = kind_for(sheet, z, opts.real_axis_tol, p.t_h());
  s.edge_degenerate = distance_to_edge(p, z) < opts.edge_tol;
  return s;
}

enum class RefineStatus { converged, near_cut, on_cut, not_converged };

struct RefineOutcome {
  RefineStatus status = RefineStatus::not_converged;
  Eigenstate state;
};

/// A point on one sheet parametrized by the wave number of the channel closest to its band edge:
/// K = base + delta with base in {0, pi}. Writing the equation in K removes the square-root branch
/// point at the van Hove edge, so states hugging an edge stay well conditioned.
class SheetPoint {
 public:
  SheetPoint(const ModelParams& p, Channel var, cplx k_var, WaveNumber other)
      : p_(&p), var_(var), other_(other) {
    base_ = std::abs(k_var.real()) > 0.5 * std::numbers::pi ? std::copysign(std::numbers::pi, k_var.real()) : 0.0;
    base_sign_ = base_ == 0.0 ? 1.0 : -1.0;
    delta_ = k_var - base_;
  }

  Channel var() const { return var_; }
  cplx delta() const { return delta_; }
  cplx sin_var() const { return base_sign_ * std::sin(delta_); }
  cplx cos_var() const { return base_sign_ * std::cos(delta_); }
  cplx energy() const { return -p_->t_h() * cos_var() - channel_sign(var_) * p_->tp_h(); }
  WaveNumber var_wave_number() const { return {base_ + delta_, sin_var()}; }
  const WaveNumber& other() const { return other_; }
  Channel other_channel() const { return var_ == Channel::plus ? Channel::minus : Channel::plus; }

  void set_delta(cplx d) { delta_ = d; }
  void set_other(const WaveNumber& w) { other_ = w; }

  /// Re-derive the other channel's wave number from the current energy, following continuity.
  void follow_other() {
    const auto pair = wave_number_pair(*p_, other_channel(), energy());
    other_ = nearest_candidate(pair, other_.k);
  }

  /// Same choice, but on the real axis the candidate is picked by the sheet's half plane.
  void select_other_for(SheetId sheet) {
    other_ = select_for_sheet(wave_number_pair(*p_, other_channel(), energy()), sheet, other_channel());
  }

  WaveNumber k(Channel ch) const { return ch == var_ ? var_wave_number() : other_; }

  cplx residual() const { return dispersion_residual(*p_, energy(), k(Channel::plus), k(Channel::minus)); }

  /// Newton step for H(delta) = sin K_var * R(z(delta)), the pole-free form of the residual.
  cplx newton_step() const {
    const double t = p_->t_h();
    const double half_g2 = 0.5 * p_->g() * p_->g();
    const cplx i(0.0, 1.0);
    const cplx z = energy();
    const cplx s = sin_var();
    const cplx c = cos_var();
    const cplx sigma_o = half_g2 / (i * t * other_.sin_k);
    const cplx cos_o = std::cos(other_.k);
    const cplx dsigma_o = -half_g2 * cos_o / (i * t * t * other_.sin_k * other_.sin_k * other_.sin_k);
    const cplx bracket = z - p_->e_d() - sigma_o;
    const cplx h = s * bracket - half_g2 / (i * t);
    const cplx dz = t * s;
    const cplx dh = c * bracket + s * dz * (1.0 - dsigma_o);
    return h / dh;
  }

 private:
  const ModelParams* p_;
  Channel var_;
  double base_ = 0.0;
  double base_sign_ = 1.0;
  cplx delta_;
  WaveNumber other_;
};

inline bool on_sheet(const WaveNumber& w, SheetId sheet, Channel ch) {
  return upper_half(sheet, ch) ? w.k.imag() > 0.0 : w.k.imag() < 0.0;
}

/// Newton in both wave numbers at once, K_sigma = base_sigma + d_sigma, on
///   F1 = E_+(d_+) - E_-(d_-),   F2 = s_+ s_- (z - E_d) - (g^2/(2 i t)) (s_+ + s_-),
/// with s = sin K and z the mean of the two channel energies. Used when both channels sit near a band
/// edge, where deriving either wave number from z loses precision.
inline std::optional<Eigenstate> polish_both_channels(const ModelParams& p, const Eigenstate& start, SheetId sheet,
                                                      int max_iter, const SpectrumOptions& opts) {
  constexpr double pi = std::numbers::pi;
  const double t = p.t_h();
  const cplx i(0.0, 1.0);
  const cplx gfac = p.g() * p.g() / (2.0 * i * t);
  auto base_of = [&](cplx k) { return std::abs(k.real()) > 0.5 * pi ? std::copysign(pi, k.real()) : 0.0; };
  const double bp = base_of(start.k_plus.k);
  const double bm = base_of(start.k_minus.k);
  const double cp = bp == 0.0 ? 1.0 : -1.0;
  const double cm = bm == 0.0 ? 1.0 : -1.0;
  const double ep = -t * cp - p.tp_h();
  const double em = -t * cm + p.tp_h();
  cplx dp = start.k_plus.k - bp;
  cplx dm = start.k_minus.k - bm;

  auto energy_p = [&](cplx d) { const cplx h = std::sin(0.5 * d); return ep + 2.0 * t * cp * h * h; };
  auto energy_m = [&](cplx d) { const cplx h = std::sin(0.5 * d); return em + 2.0 * t * cm * h * h; };

  for (int it = 0; it < max_iter; ++it) {
    const cplx sp = cp * std::sin(dp);
    const cplx sm = cm * std::sin(dm);
    const cplx dsp = cp * std::cos(dp);
    const cplx dsm = cm * std::cos(dm);
    const cplx z = 0.5 * (energy_p(dp) + energy_m(dm));
    const cplx a = z - p.e_d();
    const cplx f1 = energy_p(dp) - energy_m(dm);
    const cplx f2 = sp * sm * a - gfac * (sp + sm);
    const cplx j11 = t * sp;
    const cplx j12 = -t * sm;
    const cplx j21 = dsp * sm * a + sp * sm * 0.5 * t * sp - gfac * dsp;
    const cplx j22 = sp * dsm * a + sp * sm * 0.5 * t * sm - gfac * dsm;
    const cplx det = j11 * j22 - j12 * j21;
    if (std::abs(det) == 0.0) return std::nullopt;
    const cplx step_p = (f1 * j22 - j12 * f2) / det;
    const cplx step_m = (j11 * f2 - j21 * f1) / det;
    if (!std::isfinite(std::abs(step_p)) || !std::isfinite(std::abs(step_m))) return std::nullopt;
    dp -= step_p;
    dm -= step_m;
    const double eps4 = 4.0 * std::numeric_limits<double>::epsilon();
    if (std::abs(step_p) <= eps4 * std::abs(dp) && std::abs(step_m) <= eps4 * std::abs(dm)) break;
  }
  const cplx z = 0.5 * (energy_p(dp) + energy_m(dm));
  Eigenstate s = make_state(p, z, {bp + dp, cp * std::sin(dp)}, {bm + dm, cm * std::sin(dm)}, sheet, opts);
  if (!std::isfinite(s.residual)) return std::nullopt;
  return s;
}

/// Newton iteration on one sheet, starting from the given wave numbers.
inline RefineOutcome refine_on_sheet(const ModelParams& p, const WaveNumber& kp0, const WaveNumber& km0,
                                     SheetId sheet, double tol, int max_iter, const SpectrumOptions& opts) {
  const Channel var = std::abs(kp0.sin_k) <= std::abs(km0.sin_k) ? Channel::plus : Channel::minus;
  const WaveNumber& var0 = var == Channel::plus ? kp0 : km0;
  SheetPoint pt(p, var, var0.k, var == Channel::plus ? km0 : kp0);
  pt.follow_other();

  RefineOutcome out;
  auto snapshot = [&](const SheetPoint& q) {
    return make_state(p, q.energy(), q.k(Channel::plus), q.k(Channel::minus), sheet, opts);
  };
  auto sheet_ok = [&](const SheetPoint& q) {
    return on_sheet(q.k(Channel::plus), sheet, Channel::plus) && on_sheet(q.k(Channel::minus), sheet, Channel::minus);
  };

  double scale = residual_scale(p, pt.energy(), pt.other());
  double best = std::abs(pt.residual());
  out.state = snapshot(pt);
  int it = 0;
  for (; it < max_iter && best > tol * scale; ++it) {
    const cplx step = pt.newton_step();
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
    SheetPoint trial = pt;
    trial.set_delta(pt.delta() - step);
    trial.follow_other();
    if (!sheet_ok(trial)) {
      out.status = RefineStatus::near_cut;
      out.state.iterations = it;
      return out;
    }
    pt = trial;
    const double r = std::abs(pt.residual());
    if (r < best) {
      best = r;
      scale = residual_scale(p, pt.energy(), pt.other());
      out.state = snapshot(pt);
    }
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(pt.delta())) {
      ++it;
      break;
    }
  }
  out.state.iterations = it;
  if (best > tol * scale) return out;
  const double target = tol * residual_scale(p, out.state.energy);
  if (best > target) {
    const auto polished = polish_both_channels(p, out.state, sheet, max_iter, opts);
    if (!polished || !(polished->residual <= target)) return out;
    out.state = *polished;
    out.state.iterations = it;
  }

  // On the real axis outside both bands the exact solution is real; iterate on Im(delta) alone so the
  // reported energy is exactly real.
  if (std::abs(out.state.energy.imag()) < opts.real_axis_tol * p.t_h() && out.state.energy.imag() != 0.0) {
    SheetPoint q(p, var, out.state.wave_number(var).k, out.state.wave_number(pt.other_channel()));
    if (std::abs(q.delta().real()) < 1e-6) {
      q.set_delta({0.0, q.delta().imag()});
      bool ok = true;
      for (int r = 0; r < max_iter; ++r) {
        q.select_other_for(sheet);
        if (std::abs(q.energy().imag()) != 0.0 || std::abs(q.other().k.imag()) < opts.on_cut_tol) {
          ok = false;
          break;
        }
        const cplx step = q.newton_step();
        q.set_delta({0.0, q.delta().imag() - step.imag()});
        if (std::abs(step.imag()) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(q.delta())) break;
      }
      if (ok) {
        q.select_other_for(sheet);
        const cplx z = q.energy();
        if (z.imag() == 0.0 && sheet_ok(q) && std::abs(q.residual()) <= target) {
          out.state = snapshot(q);
          out.state.iterations = it;
        }
      }
    }
  }

  if (out.state.k_plus.k.imag() == 0.0 || out.state.k_minus.k.imag() == 0.0) {
    out.status = RefineStatus::on_cut;
    return out;
  }
  if (!on_sheet(out.state.k_plus, sheet, Channel::plus) || !on_sheet(out.state.k_minus, sheet, Channel::minus)) {
    out.status = RefineStatus::near_cut;
    return out;
  }
  out.status = RefineStatus::converged;
  return out;
}

struct Seed {
  WaveNumber k_plus;
  WaveNumber k_minus;
  SheetId sheet;
};

/// Lowest-order starting points for weak coupling, where the polynomial roots cluster too tightly to
/// be separated in double precision: one state per sheet near E_d, and one per band edge and sheet of
/// the other channel with sin K ~ g^2 / (2 i t (E_edge - E_d - Sigma_other)).
inline std::vector<Seed> weak_coupling_seeds(const ModelParams& p) {
  constexpr double pi = std::numbers::pi;
  const double t = p.t_h();
  const double half_g2 = 0.5 * p.g() * p.g();
  const double eta = std::max(p.g() * p.g(), 1e-12) * t;
  const cplx i(0.0, 1.0);
  std::vector<Seed> seeds;

  for (const double side : {1.0, -1.0}) {
    const cplx z0(p.e_d(), side * eta);
    const WaveNumberCandidates c0 = wave_numbers(p, z0);
    for (SheetId sheet : all_sheets) {
      const WaveNumber kp = select_for_sheet(c0.plus, sheet, Channel::plus);
      const WaveNumber km = select_for_sheet(c0.minus, sheet, Channel::minus);
      const cplx z1 = p.e_d() + half_g2 * (channel_green(p, kp) + channel_green(p, km));
      const WaveNumberCandidates c1 = wave_numbers(p, z1);
      seeds.push_back({select_for_sheet(c1.plus, sheet, Channel::plus), select_for_sheet(c1.minus, sheet, Channel::minus),
                       sheet});
    }
  }

  for (const Channel var : {Channel::plus, Channel::minus}) {
    const Channel other = var == Channel::plus ? Channel::minus : Channel::plus;
    for (const double base : {0.0, pi}) {
      const double cb = std::cos(base);
      const double z_edge = -t * cb - channel_sign(var) * p.tp_h();
      for (const double side : {1.0, -1.0}) {
        for (const WaveNumber& ko : wave_number_pair(p, other, cplx(z_edge, side * eta))) {
          const cplx sigma_o = half_g2 / (i * t * ko.sin_k);
          const cplx s = half_g2 / (i * t * (z_edge - p.e_d() - sigma_o));
          const WaveNumber kv{base + std::asin(s * cb), s};
          const WaveNumber kp = var == Channel::plus ? kv : ko;
          const WaveNumber km = var == Channel::plus ? ko : kv;
          seeds.push_back({kp, km, sheet_from_upper(kp.k.imag() > 0.0, km.k.imag() > 0.0)});
        }
      }
    }
  }

  // Nearly touching edges of the two channels put both wave numbers near a branch point at once, where
  // the one-channel expansion above fails. With y = sin K and z = e + (t cos(base)/2) y^2 near each edge,
  // and z - E_d frozen at the midpoint, 1/y_+ + 1/y_- = C reduces to a quartic in y_-.
  for (const double base_p : {0.0, pi}) {
    for (const double base_m : {0.0, pi}) {
      const double cp = std::cos(base_p);
      const double cm = std::cos(base_m);
      const double e_p = -t * cp - p.tp_h();
      const double e_m = -t * cm + p.tp_h();
      if (std::abs(e_p - e_m) > 0.1 * t) continue;
      const cplx big_c = 2.0 * i * t * (0.5 * (e_p + e_m) - p.e_d()) / (p.g() * p.g());
      const cplx delta = 2.0 * (e_m - e_p) / t;
      // cp y^2 - cm y^2 (C y - 1)^2 - delta (C y - 1)^2 = 0
      const Polynomial<double> lin({cplx(-1.0), big_c});
      const Polynomial<double> y2({cplx(0.0), cplx(0.0), cplx(1.0)});
      const Polynomial<double> quartic = y2 * cplx(cp) - y2 * lin * lin * cplx(cm) - lin * lin * delta;
      if (quartic.degree() < 1) continue;
      std::vector<cplx> ys;
      try {
        ys = find_roots(quartic).roots;
      } catch (const Error&) {
        continue;
      }
      for (const cplx ym : ys) {
        const cplx den = big_c * ym - 1.0;
        if (std::abs(den) == 0.0) continue;
        const cplx yp = ym / den;
        const WaveNumber kp{base_p + std::asin(cp * yp), yp};
        const WaveNumber km{base_m + std::asin(cm * ym), ym};
        if (!std::isfinite(std::abs(kp.k)) || !std::isfinite(std::abs(km.k))) continue;
        seeds.push_back({kp, km, sheet_from_upper(kp.k.imag() > 0.0, km.k.imag() > 0.0)});
      }
    }
  }
  return seeds;
}

inline bool same_state(const Eigenstate& a, const Eigenstate& b, double tol) {
  if (a.sheet != b.sheet) return false;
  const double scale = std::max(1.0, std::abs(a.energy));
  return std::abs(a.energy - b.energy) <= tol * scale && wave_number_distance(a.k_plus.k, b.k_plus.k) <= tol &&
         wave_number_distance(a.k_minus.k, b.k_minus.k) <= tol;
}

inline char sheet_letter(SheetId s) {
  switch (s) {
    case SheetId::I: return 'P';
    case SheetId::II: return 'Q';
    case SheetId::III: return 'R';
    case SheetId::IV: return 'S';
  }
  return '?';
}

inline int sheet_index(SheetId s) { return static_cast<int>(s); }

}  // namespace detail

/// Assigns a raw root to the sheet whose branch-resolved residual is smallest.
inline Eigenstate classify_root(const ModelParams& p, cplx z, double tol, const SpectrumOptions& opts = {}) {
  const WaveNumberCandidates cands = wave_numbers(p, z);
  std::array<double, 4> residuals{};
  std::array<std::pair<WaveNumber, WaveNumber>, 4> chosen{};
  for (SheetId s : all_sheets) {
    const WaveNumber kp = select_for_sheet(cands.plus, s, Channel::plus);
    const WaveNumber km = select_for_sheet(cands.minus, s, Channel::minus);
    residuals[static_cast<std::size_t>(s)] = std::abs(dispersion_residual(p, z, kp, km));
    chosen[static_cast<std::size_t>(s)] = {kp, km};
  }
  const auto best_it = std::min_element(residuals.begin(), residuals.end());
  const auto best = static_cast<std::size_t>(best_it - residuals.begin());
  if (!(*best_it < tol)) {
    throw ClassificationError("spurious or misconverged root: no sheet satisfies the dispersion equation",
                              ClassificationError::Reason::spurious, z, residuals);
  }
  const auto& [kp, km] = chosen[best];
  if (std::abs(kp.k.imag()) < opts.on_cut_tol || std::abs(km.k.imag()) < opts.on_cut_tol) {
    throw ClassificationError("root lies on a branch cut; assign its sheet manually",
                              ClassificationError::Reason::on_cut, z, residuals);
  }
  return detail::make_state(p, z, kp, km, sheet_from_upper(kp.k.imag() > 0.0, km.k.imag() > 0.0), opts);
}

/// Newton refinement holding the sheet fixed.
inline Eigenstate newton_refine(const ModelParams& p, const Eigenstate& state, double tol,
                                const SpectrumOptions& opts = {}) {
  if (!std::isfinite(state.residual)) throw DomainError("newton_refine needs a finite starting residual");
  auto out = detail::refine_on_sheet(p, state.k_plus, state.k_minus, state.sheet, tol, opts.refine_max_iter, opts);
  out.state.label = state.label;
  out.state.provenance = state.provenance;
  switch (out.status) {
    case detail::RefineStatus::converged: return out.state;
    case detail::RefineStatus::near_cut:
      throw NearCutError("refinement crossed a branch cut; last iterate kept on the original sheet", out.state);
    case detail::RefineStatus::on_cut:
      throw NearCutError("refined state lies on a branch cut", out.state);
    case detail::RefineStatus::not_converged: break;
  }
  throw ConvergenceError("newton_refine did not reach tolerance", {out.state.energy}, out.state.residual);
}

/// Labels states sheet by sheet (P, Q, R, S for I..IV). Within a sheet, real states come first in
/// descending energy, then conjugate pairs by ascending real part with the resonant member first.
inline void assign_labels(std::vector<Eigenstate>& states, const SpectrumOptions& opts = {}) {
  std::vector<Eigenstate> ordered;
  for (SheetId sheet : all_sheets) {
    std::vector<Eigenstate> real, resonant, anti;
    for (const auto& s : states) {
      if (s.sheet != sheet) continue;
      if (s.kind == StateKind::bound || s.kind == StateKind::real_embedded) real.push_back(s);
      else if (s.kind == StateKind::resonant) resonant.push_back(s);
      else anti.push_back(s);
    }
    std::sort(real.begin(), real.end(), [](const auto& a, const auto& b) { return a.energy.real() > b.energy.real(); });
    std::sort(resonant.begin(), resonant.end(),
              [](const auto& a, const auto& b) { return a.energy.real() < b.energy.real(); });
    std::vector<Eigenstate> sheet_states = real;
    std::vector<bool> used(anti.size(), false);
    for (const auto& r : resonant) {
      sheet_states.push_back(r);
      std::optional<std::size_t> partner;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < anti.size(); ++j) {
        const double d = std::abs(r.energy - std::conj(anti[j].energy));
        if (!used[j] && d < best) {
          best = d;
          partner = j;
        }
      }
      if (partner && best <= 1e-6 * std::max(1.0, std::abs(r.energy))) {
        used[*partner] = true;
        sheet_states.push_back(anti[*partner]);
      }
    }
    std::vector<Eigenstate> leftover;
    for (std::size_t j = 0; j < anti.size(); ++j) {
      if (!used[j]) leftover.push_back(anti[j]);
    }
    std::sort(leftover.begin(), leftover.end(),
              [](const auto& a, const auto& b) { return a.energy.real() < b.energy.real(); });
    sheet_states.insert(sheet_states.end(), leftover.begin(), leftover.end());
    int ordinal = 1;
    for (auto& s : sheet_states) {
      s.label = std::string(1, detail::sheet_letter(sheet)) + std::to_string(ordinal++);
      ordered.push_back(std::move(s));
    }
  }
  (void)opts;
  states = std::move(ordered);
}

/// Roots of the dispersion polynomial, built and rooted in extended precision. The band-edge pairs
/// are nearly double roots, so in double their members are only good to about sqrt(eps).
inline RootSet dispersion_roots(const ModelParams& p, const RootFinderOptions& opts = {}) {
  return cast_roots<double>(find_roots(dispersion_polynomial<long double>(p), opts));
}

/// Full discrete spectrum: polynomial roots, sheet assignment, refinement, labels.
inline std::vector<Eigenstate> solve_spectrum(const ModelParams& p, const SpectrumOptions& opts = {}) {
  if (!(p.g() > 0.0)) throw DomainError("solve_spectrum needs g > 0");
  const RootSet roots = dispersion_roots(p, opts.roots);
  const std::size_t expected = roots.size();

  std::vector<Eigenstate> states;
  auto add_unique = [&](const Eigenstate& s) {
    for (const auto& other : states) {
      if (detail::same_state(other, s, opts.dedupe_tol)) return false;
    }
    states.push_back(s);
    return true;
  };

  for (const cplx z : roots.roots) {
    try {
      Eigenstate s = classify_root(p, z, opts.classify_tol, opts);
      add_unique(newton_refine(p, s, opts.refine_tol, opts));
    } catch (const Error&) {
      // resolved by the multi-start pass below
    }
  }

  if (states.size() < expected) {
    for (const cplx z0 : roots.roots) {
      for (const cplx z : {z0, std::conj(z0)}) {
        const WaveNumberCandidates cands = wave_numbers(p, z);
        for (SheetId sheet : all_sheets) {
          const WaveNumber kp = select_for_sheet(cands.plus, sheet, Channel::plus);
          const WaveNumber km = select_for_sheet(cands.minus, sheet, Channel::minus);
          auto out = detail::refine_on_sheet(p, kp, km, sheet, opts.refine_tol, opts.refine_max_iter, opts);
          if (out.status != detail::RefineStatus::converged || out.state.sheet != sheet) continue;
          out.state.provenance = Provenance::multistart;
          add_unique(out.state);
        }
      }
    }
  }

  if (states.size() < expected) {
    for (const auto& seed : detail::weak_coupling_seeds(p)) {
      auto out = detail::refine_on_sheet(p, seed.k_plus, seed.k_minus, seed.sheet, opts.refine_tol,
                                         opts.refine_max_iter, opts);
      if (out.status != detail::RefineStatus::converged || out.state.sheet != seed.sheet) continue;
      out.state.provenance = Provenance::multistart;
      add_unique(out.state);
    }
  }

  // (z, K_+, K_-) -> (conj z, -conj K_+, -conj K_-) maps solutions to solutions on the same sheet. A
  // conjugate pair split off the real axis by less than the root error is recovered from one member.
  if (states.size() < expected) {
    const std::size_t found = states.size();
    for (std::size_t i = 0; i < found; ++i) {
      const Eigenstate& s = states[i];
      if (s.energy.imag() == 0.0) continue;
      const WaveNumber kp{-std::conj(s.k_plus.k), -std::conj(s.k_plus.sin_k)};
      const WaveNumber km{-std::conj(s.k_minus.k), -std::conj(s.k_minus.sin_k)};
      Eigenstate m = detail::make_state(p, std::conj(s.energy), kp, km, s.sheet, opts);
      m.provenance = s.provenance;
      m.iterations = s.iterations;
      add_unique(m);
    }
  }

  if (states.size() != expected) {
    throw StructuralError("expected " + std::to_string(expected) + " eigenstates, resolved " +
                          std::to_string(states.size()));
  }
  assign_labels(states, opts);
  return states;
}

/// One cluster of the decoupled (g = 0) spectrum: the dot level or a band edge, with the number of
/// polynomial roots that collapse onto it.
struct DecoupledCluster {
  double energy = 0.0;
  int multiplicity = 0;
  std::string origin;  ///< "dot" or the band edge name
  cplx centroid;       ///< numerical location of the multiple root
};

/// At g = 0 the polynomial factors as ((z - E_d)^2 B_+ B_-)^2: a quadruple root at E_d and double
/// roots at the four band edges. Computed roots are assigned to the nearest analytic location and each
/// group is located as a root of the matching derivative.
inline std::vector<DecoupledCluster> decoupled_clusters(const ModelParams& p, const RootFinderOptions& opts = {}) {
  if (p.g() != 0.0) throw DomainError("decoupled_clusters needs g = 0");
  using CL = std::complex<long double>;
  const BandEdges e = band_edges(p);
  std::vector<DecoupledCluster> out = {{p.e_d(), 0, "dot", {}},
                                       {e.lower_band.min, 0, "lower band bottom", {}},
                                       {e.lower_band.max, 0, "lower band top", {}},
                                       {e.upper_band.min, 0, "upper band bottom", {}},
                                       {e.upper_band.max, 0, "upper band top", {}}};
  const auto poly = dispersion_polynomial<long double>(p);
  const auto roots = find_roots(poly, opts);
  std::vector<CL> sum(out.size());
  std::vector<long double> spread(out.size(), 0.0L);
  std::vector<std::size_t> owner;
  for (const CL z : roots.roots) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < out.size(); ++k) {
      if (std::abs(z - (long double)out[k].energy) < std::abs(z - (long double)out[best].energy)) best = k;
    }
    owner.push_back(best);
    sum[best] += z;
    ++out[best].multiplicity;
  }
  for (std::size_t i = 0; i < owner.size(); ++i) {
    const std::size_t k = owner[i];
    spread[k] = std::max(spread[k], std::abs(roots.roots[i] - sum[k] / (long double)out[k].multiplicity));
  }
  std::vector<DecoupledCluster> kept;
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto& c = out[k];
    if (c.multiplicity == 0) continue;
    const CL mean = sum[k] / (long double)c.multiplicity;
    const CL at = c.multiplicity > 1 ? detail::cluster_center(poly, c.multiplicity, mean, spread[k]) : mean;
    c.centroid = cplx(static_cast<double>(at.real()), static_cast<double>(at.imag()));
    kept.push_back(c);
  }
  return kept;
}

/// Sheet reached by continuing from the upper half plane across the real axis at energy e: the
/// square root of every channel whose band contains e changes branch.
inline SheetId continuation_sheet(const ModelParams& p, double e) {
  const BandEdges b = band_edges(p);
  const bool plus = b.lower_band.contains_strictly(e);
  const bool minus = b.upper_band.contains_strictly(e);
  if (plus && minus) return SheetId::IV;
  if (plus) return SheetId::II;
  if (minus) return SheetId::III;
  return SheetId::I;
}

/// Looks a state up by label; nullptr if absent.
inline const Eigenstate* find_state(const std::vector<Eigenstate>& states, const std::string& label) {
  for (const auto& s : states) {
    if (s.label == label) return &s;
  }
  return nullptr;
}

}  // namespace qbic
