#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qbic/errors.hpp"
#include "qbic/model.hpp"
#include "qbic/spectrum.hpp"

namespace qbic {

enum class SweepParam { e_d, g, tp_h };

inline const char* to_string(SweepParam p) {
  switch (p) {
    case SweepParam::e_d: return "ed";
    case SweepParam::g: return "g";
    case SweepParam::tp_h: return "tp";
  }
  return "?";
}

inline std::optional<SweepParam> parse_sweep_param(const std::string& s) {
  if (s == "ed" || s == "e_d") return SweepParam::e_d;
  if (s == "g") return SweepParam::g;
  if (s == "tp" || s == "tp_h") return SweepParam::tp_h;
  return std::nullopt;
}

inline ModelParams with_param(const ModelParams& base, SweepParam param, double v) {
  switch (param) {
    case SweepParam::e_d: return base.with_e_d(v);
    case SweepParam::g: return base.with_g(v);
    case SweepParam::tp_h: return base.with_tp_h(v);
  }
  return base;
}

struct SweepRecord {
  SweepParam param_name = SweepParam::e_d;
  double param_value = 0.0;
  std::size_t grid_index = 0;
  Eigenstate state;
  int track_id = 0;
  std::string track_label;  ///< label of the track's state at the first grid point
};

/// A step where tracking was not clean: two candidates nearly equidistant from the prediction, or a
/// track that had to leave its sheet.
struct TrackSplit {
  std::size_t grid_index = 0;
  double param_value = 0.0;
  std::vector<int> track_ids;
  std::string diagnostic;
};

struct SweepResult {
  std::vector<SweepRecord> records;  ///< grid-major, track id within a grid point
  std::vector<TrackSplit> splits;
  std::vector<std::string> track_labels;

  std::vector<SweepRecord> track(int id) const {
    std::vector<SweepRecord> out;
    for (const auto& r : records) {
      if (r.track_id == id) out.push_back(r);
    }
    return out;
  }
  std::optional<int> track_id(const std::string& label) const {
    for (std::size_t i = 0; i < track_labels.size(); ++i) {
      if (track_labels[i] == label) return static_cast<int>(i);
    }
    return std::nullopt;
  }
};

/// Tracking or solving failed at some grid point; records for the points before it are kept.
class TrackingError : public Error {
 public:
  TrackingError(const std::string& what, SweepResult partial, std::size_t grid_index, double param_value)
      : Error(what), partial_(std::move(partial)), grid_index_(grid_index), param_value_(param_value) {}

  const SweepResult& partial() const { return partial_; }
  std::size_t grid_index() const { return grid_index_; }
  double param_value() const { return param_value_; }

 private:
  SweepResult partial_;
  std::size_t grid_index_;
  double param_value_;
};

struct SweepOptions {
  SpectrumOptions spectrum;
  /// Worker threads for the per-point solves; 0 picks the hardware concurrency.
  unsigned threads = 0;
  /// Continuity radius = radius_factor * largest predicted step, at least radius_floor * t_h.
  double radius_factor = 5.0;
  double radius_floor = 1e-6;
  /// Second candidate closer than ambiguity_ratio times the best one marks the match ambiguous.
  double ambiguity_ratio = 2.0;
};

namespace detail {

struct PointSolve {
  std::vector<Eigenstate> states;
  std::optional<std::string> error;
};

inline std::vector<PointSolve> solve_points(const std::vector<ModelParams>& points, const SweepOptions& opts) {
  std::vector<PointSolve> out(points.size());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n = std::min<unsigned>(opts.threads ? opts.threads : hw, static_cast<unsigned>(points.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        out[i].states = solve_spectrum(points[i], opts.spectrum);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  if (n <= 1) {
    work();
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  return out;
}

struct Match {
  std::vector<int> candidate_of;  ///< per track, -1 if unmatched
  std::vector<bool> sheet_change;
};

/// Greedy nearest-neighbour assignment of candidates to predictions inside the radius. Same-sheet
/// pairs are taken first; leftovers may cross sheets.
inline Match greedy_match(const std::vector<cplx>& predicted, const std::vector<SheetId>& sheets,
                          const std::vector<Eigenstate>& cands, double radius) {
  const std::size_t nt = predicted.size();
  Match m{std::vector<int>(nt, -1), std::vector<bool>(nt, false)};
  std::vector<bool> taken(cands.size(), false);
  for (const bool same_sheet : {true, false}) {
    struct Pair {
      double d;
      std::size_t track;
      std::size_t cand;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < nt; ++i) {
      if (m.candidate_of[i] >= 0) continue;
      for (std::size_t j = 0; j < cands.size(); ++j) {
        if (taken[j] || (same_sheet && cands[j].sheet != sheets[i])) continue;
        const double d = std::abs(cands[j].energy - predicted[i]);
        if (d <= radius) pairs.push_back({d, i, j});
      }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
      if (a.d != b.d) return a.d < b.d;
      if (a.track != b.track) return a.track < b.track;
      return a.cand < b.cand;
    });
    for (const auto& pr : pairs) {
      if (m.candidate_of[pr.track] >= 0 || taken[pr.cand]) continue;
      m.candidate_of[pr.track] = static_cast<int>(pr.cand);
      m.sheet_change[pr.track] = !same_sheet;
      taken[pr.cand] = true;
    }
  }
  return m;
}

inline bool lower_first(const Eigenstate& a, const Eigenstate& b) {
  if (a.energy.imag() != b.energy.imag()) return a.energy.imag() < b.energy.imag();
  return a.energy.real() < b.energy.real();
}

}  // namespace detail

/// Solves the spectrum at every grid value (concurrently) and links states across neighbouring
/// points. Track ids and labels are seeded from the first grid point.
inline SweepResult sweep_parameter(const ModelParams& base, SweepParam param, const std::vector<double>& grid,
                                   const SweepOptions& opts = {}) {
  if (grid.empty()) throw DomainError("sweep grid is empty");
  const double dir = grid.size() > 1 ? (grid[1] > grid[0] ? 1.0 : -1.0) : 1.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!((grid[i] - grid[i - 1]) * dir > 0.0)) throw DomainError("sweep grid must be strictly monotone");
  }
  std::vector<ModelParams> points;
  points.reserve(grid.size() + 1);
  for (const double v : grid) points.push_back(with_param(base, param, v));
  // A probe just past the first point gives the first step a secant prediction.
  double probe = 0.0;
  if (grid.size() > 1) {
    probe = grid[0] + 1e-3 * (grid[1] - grid[0]);
    points.push_back(with_param(base, param, probe));
  }
  const std::vector<detail::PointSolve> solved = detail::solve_points(points, opts);

  SweepResult result;
  auto fail = [&](std::size_t i, const std::string& msg) {
    throw TrackingError(msg, result, i, grid[i]);
  };
  auto emit = [&](std::size_t i, const std::vector<Eigenstate>& states) {
    for (std::size_t k = 0; k < states.size(); ++k) {
      SweepRecord r;
      r.param_name = param;
      r.param_value = grid[i];
      r.grid_index = i;
      r.state = states[k];
      r.track_id = static_cast<int>(k);
      r.track_label = result.track_labels[k];
      result.records.push_back(std::move(r));
    }
  };

  if (solved[0].error) fail(0, "solve failed at " + std::string(to_string(param)) + " = " + std::to_string(grid[0]) + ": " + *solved[0].error);
  std::vector<Eigenstate> current = solved[0].states;
  for (const auto& s : current) result.track_labels.push_back(s.label);
  emit(0, current);
  if (grid.size() == 1) return result;

  const double t = base.t_h();
  const std::size_t nt = current.size();
  std::vector<Eigenstate> previous;
  double prev_step = 0.0;

  // Probe step: tiny, so plain nearest-neighbour matching is safe.
  {
    const auto& pr = solved.back();
    if (pr.error) fail(0, "solve failed at probe " + std::to_string(probe) + ": " + *pr.error);
    std::vector<cplx> pred;
    std::vector<SheetId> sheets;
    for (const auto& s : current) {
      pred.push_back(s.energy);
      sheets.push_back(s.sheet);
    }
    const auto m = detail::greedy_match(pred, sheets, pr.states, std::numeric_limits<double>::infinity());
    previous.resize(nt);
    for (std::size_t k = 0; k < nt; ++k) previous[k] = pr.states[static_cast<std::size_t>(m.candidate_of[k])];
    prev_step = grid[0] - probe;
  }
  bool previous_is_probe = true;

  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (solved[i].error) {
      fail(i, "solve failed at " + std::string(to_string(param)) + " = " + std::to_string(grid[i]) + ": " + *solved[i].error);
    }
    const auto& cands = solved[i].states;
    if (cands.size() != nt) fail(i, "state count changed along the sweep");
    const double step = grid[i] - grid[i - 1];
    // previous holds the states one step behind current; with the probe it sits on the other side.
    const double ratio = previous_is_probe ? step / -prev_step : step / prev_step;
    std::vector<cplx> pred(nt);
    std::vector<SheetId> sheets(nt);
    double largest = 0.0;
    for (std::size_t k = 0; k < nt; ++k) {
      const cplx slope = previous_is_probe ? (previous[k].energy - current[k].energy) : (current[k].energy - previous[k].energy);
      pred[k] = current[k].energy + slope * ratio;
      sheets[k] = current[k].sheet;
      largest = std::max(largest, std::abs(pred[k] - current[k].energy));
    }
    const double radius = std::max(opts.radius_factor * largest, opts.radius_floor * t);

    auto m = detail::greedy_match(pred, sheets, cands, radius);
    for (std::size_t k = 0; k < nt; ++k) {
      if (m.candidate_of[k] >= 0) continue;
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& c : cands) nearest = std::min(nearest, std::abs(c.energy - pred[k]));
      fail(i, "track " + result.track_labels[k] + " lost at " + to_string(param) + " = " + std::to_string(grid[i]) +
                  ": nearest candidate " + std::to_string(nearest) + " from the prediction exceeds the continuity radius " +
                  std::to_string(radius) + "; refine the grid");
    }

    // Near-ties (typically a real pair turning into a conjugate pair): the lower track id takes the
    // candidate with the lower imaginary part, then the lower real part.
    for (std::size_t k = 0; k < nt; ++k) {
      const auto& mine = cands[static_cast<std::size_t>(m.candidate_of[k])];
      const double d1 = std::abs(mine.energy - pred[k]);
      for (std::size_t o = 0; o < nt; ++o) {
        if (o == k) continue;
        const auto& theirs = cands[static_cast<std::size_t>(m.candidate_of[o])];
        if (theirs.sheet != sheets[k] || mine.sheet != sheets[o]) continue;
        const double d2 = std::abs(theirs.energy - pred[k]);
        if (d2 > radius || d2 > opts.ambiguity_ratio * d1) continue;
        const double e1 = std::abs(theirs.energy - pred[o]);
        const double e2 = std::abs(mine.energy - pred[o]);
        if (e2 > radius || e2 > opts.ambiguity_ratio * e1) continue;
        const std::size_t lo = std::min(k, o);
        const std::size_t hi = std::max(k, o);
        auto& clo = m.candidate_of[lo];
        auto& chi = m.candidate_of[hi];
        if (detail::lower_first(cands[static_cast<std::size_t>(chi)], cands[static_cast<std::size_t>(clo)])) std::swap(clo, chi);
        const bool logged = std::any_of(result.splits.begin(), result.splits.end(), [&](const TrackSplit& s) {
          return s.grid_index == i && s.track_ids == std::vector<int>{static_cast<int>(lo), static_cast<int>(hi)};
        });
        if (!logged) {
          result.splits.push_back({i, grid[i], {static_cast<int>(lo), static_cast<int>(hi)},
                                   "ambiguous match between tracks " + result.track_labels[lo] + " and " +
                                       result.track_labels[hi] + "; resolved by ordering on Im E"});
        }
      }
    }

    std::vector<Eigenstate> next(nt);
    for (std::size_t k = 0; k < nt; ++k) {
      next[k] = cands[static_cast<std::size_t>(m.candidate_of[k])];
      if (m.sheet_change[k]) {
        result.splits.push_back({i, grid[i], {static_cast<int>(k)},
                                 "track " + result.track_labels[k] + " moved from sheet " + to_string(sheets[k]) +
                                     " to sheet " + to_string(next[k].sheet)});
      }
    }
    emit(i, next);
    previous = std::move(current);
    current = std::move(next);
    prev_step = step;
    previous_is_probe = false;
  }
  return result;
}

/// Evenly spaced grid from a to b inclusive.
inline std::vector<double> linear_grid(double a, double b, std::size_t n) {
  if (n == 0) throw DomainError("grid needs at least one point");
  if (n == 1) return {a};
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  g.back() = b;
  return g;
}

struct ScalingFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
  std::vector<double> g_grid;  ///< ascending
  std::vector<double> im_e;
  std::vector<bool> included;  ///< |Im E| above the noise floor

  /// |Im E| predicted by the fitted power law.
  double predict(double g) const { return prefactor * std::pow(g, exponent); }
};

/// Tracks the labeled state from the largest g downward and fits log|Im E| against log g.
inline ScalingFit fit_g_scaling(const ModelParams& base, const std::string& state_label, std::vector<double> g_grid,
                                const SweepOptions& opts = {}) {
  if (g_grid.size() < 5) throw DomainError("scaling fit needs at least 5 g values");
  for (const double g : g_grid) {
    if (!(g > 0.0) || g > 0.5 * base.t_h()) throw DomainError("g grid must lie in (0, t_h/2]");
  }
  std::sort(g_grid.begin(), g_grid.end(), std::greater<>());
  if (std::adjacent_find(g_grid.begin(), g_grid.end()) != g_grid.end()) throw DomainError("g grid has duplicate values");

  SweepResult sweep;
  try {
    sweep = sweep_parameter(base, SweepParam::g, g_grid, opts);
  } catch (const TrackingError& e) {
    throw TrackingError("lost track of " + state_label + " at g = " + std::to_string(e.param_value()) + ": " + e.what(),
                        e.partial(), e.grid_index(), e.param_value());
  }
  const auto id = sweep.track_id(state_label);
  if (!id) throw DomainError("no state labeled " + state_label + " at g = " + std::to_string(g_grid.front()));
  const auto track = sweep.track(*id);
  const StateKind seed_kind = track.front().state.kind;
  if (seed_kind == StateKind::bound) throw DomainError("bound state " + state_label + " has no width to fit");

  ScalingFit fit;
  for (auto it = track.rbegin(); it != track.rend(); ++it) {
    const double im = std::abs(it->state.energy.imag());
    fit.g_grid.push_back(it->param_value);
    fit.im_e.push_back(im);
    fit.included.push_back(im > 1e-13);
  }
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < fit.g_grid.size(); ++k) {
    if (!fit.included[k]) continue;
    xs.push_back(std::log(fit.g_grid[k]));
    ys.push_back(std::log(fit.im_e[k]));
  }
  if (xs.size() < 2) throw DomainError(state_label + " has no measurable width on this g grid");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  fit.exponent = sxy / sxx;
  fit.prefactor = std::exp(my - fit.exponent * mx);
  fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace qbic
