#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "qbic/errors.hpp"
#include "qbic/polynomial.hpp"

namespace qbic {

struct RootFinderOptions {
  /// Relative backward-error target: |P(z)| <= tol * sum |c_i| |z|^i.
  double tol = 1e-13;
  int max_iter = 200;
  /// Roots closer than this (or with overlapping inclusion disks) share a cluster id.
  double cluster_radius = 1e-9;
  /// Rotation of the initial circle, breaks the symmetry of real-coefficient inputs.
  double phase_offset = 0.4;
  bool polish = true;
  /// For real-coefficient input, snap the output to an exactly conjugation-invariant multiset.
  bool symmetrize_conjugates = true;
};

template <typename Real>
struct BasicRootSet {
  std::vector<std::complex<Real>> roots;
  std::vector<Real> residuals;  ///< |P(z)| per root
  std::vector<int> iterations;
  std::vector<int> cluster_ids;
  std::vector<bool> flagged;  ///< residual above the backward-error target
  int cluster_count = 0;
  /// Per cluster: for multiplicity m > 1 the root of P^(m-1) near the member mean, else the root.
  std::vector<std::complex<Real>> centers;

  std::size_t size() const { return roots.size(); }

  int multiplicity(int cluster) const {
    return static_cast<int>(std::count(cluster_ids.begin(), cluster_ids.end(), cluster));
  }

  /// Mean of a cluster's members.
  std::complex<Real> cluster_centroid(int cluster) const {
    std::complex<Real> sum(0);
    int n = 0;
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (cluster_ids[i] == cluster) {
        sum += roots[i];
        ++n;
      }
    }
    return n > 0 ? sum / Real(n) : sum;
  }
};

using RootSet = BasicRootSet<double>;

/// Root set rounded to another precision; cluster structure is kept as computed.
template <typename To, typename From>
BasicRootSet<To> cast_roots(const BasicRootSet<From>& in) {
  BasicRootSet<To> out;
  for (const auto& z : in.roots) out.roots.emplace_back(static_cast<To>(z.real()), static_cast<To>(z.imag()));
  for (const auto r : in.residuals) out.residuals.push_back(static_cast<To>(r));
  out.iterations = in.iterations;
  out.cluster_ids = in.cluster_ids;
  out.flagged = in.flagged;
  out.cluster_count = in.cluster_count;
  for (const auto& c : in.centers) out.centers.emplace_back(static_cast<To>(c.real()), static_cast<To>(c.imag()));
  return out;
}

namespace detail {

/// Scale of the rounding error in evaluating p at z: sum |c_i| |z|^i, capped by max|c_i| max(1,|z|)^n.
template <typename Real>
Real backward_scale(const Polynomial<Real>& p, std::complex<Real> z) {
  const Real r = std::max(Real(1), std::abs(z));
  return std::min(p.abs_bound(z), p.max_abs_coeff() * std::pow(r, Real(p.degree())));
}

/// Root of the (m-1)-th derivative near start: a multiple root of order m stays a simple root there,
/// and a tight cluster of m roots keeps one near its mean.
template <typename Real>
std::complex<Real> cluster_center(const Polynomial<Real>& p, int m, std::complex<Real> start, Real spread) {
  Polynomial<Real> d = p;
  for (int k = 1; k < m; ++k) d = d.derivative();
  std::complex<Real> z = start;
  for (int it = 0; it < 20; ++it) {
    const auto [v, dv] = d.value_and_derivative(z);
    if (dv == std::complex<Real>(0)) break;
    const std::complex<Real> step = v / dv;
    if (!std::isfinite(std::abs(step)) || std::abs(step) > spread + std::numeric_limits<Real>::epsilon() * std::abs(z)) {
      return start;
    }
    z -= step;
    if (std::abs(step) <= 4 * std::numeric_limits<Real>::epsilon() * std::max(Real(1), std::abs(z))) break;
  }
  return z;
}

/// Weierstrass inclusion radius: the disk of this radius around z_i holds a root of p.
template <typename Real>
Real inclusion_radius(const Polynomial<Real>& p, const std::vector<std::complex<Real>>& z, std::size_t i) {
  std::complex<Real> denom = p.leading();
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (j != i) denom *= z[i] - z[j];
  }
  const Real d = std::abs(denom);
  if (d == Real(0)) return std::numeric_limits<Real>::infinity();
  return Real(p.degree()) * std::abs(p(z[i])) / d;
}

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

/// Pairs every root with its mirror image (or itself, if it sits on the real axis) and makes the
/// pairing exact. Only pairs whose mismatch lies inside the inclusion disks are touched.
template <typename Real>
void symmetrize(std::vector<std::complex<Real>>& z, const std::vector<Real>& radius) {
  struct Candidate {
    Real cost;
    std::size_t i, j;
  };
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t j = i; j < z.size(); ++j) {
      const Real cost = std::abs(z[i] - std::conj(z[j]));
      const Real slack = radius[i] + radius[j] + 8 * std::numeric_limits<Real>::epsilon() * std::abs(z[i]);
      if (cost <= slack) cands.push_back({cost, i, j});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return a.cost < b.cost || (a.cost == b.cost && (a.i < b.i || (a.i == b.i && a.j < b.j)));
  });
  std::vector<bool> used(z.size(), false);
  for (const auto& c : cands) {
    if (used[c.i] || used[c.j]) continue;
    used[c.i] = used[c.j] = true;
    if (c.i == c.j) {
      z[c.i] = {z[c.i].real(), Real(0)};
    } else {
      const std::complex<Real> mid = (z[c.i] + std::conj(z[c.j])) / Real(2);
      z[c.i] = mid;
      z[c.j] = std::conj(mid);
    }
  }
}

}  // namespace detail

/// All roots of p with multiplicity, by Aberth-Ehrlich simultaneous iteration followed by a guarded
/// Newton polish. Deterministic: the starting points depend only on the coefficients.
template <typename Real>
BasicRootSet<Real> find_roots(const Polynomial<Real>& p, const RootFinderOptions& opts = {}) {
  using C = std::complex<Real>;
  if (p.degree() < 1) throw DomainError("find_roots needs a polynomial of degree >= 1");
  if (!(opts.tol > 0.0)) throw DomainError("find_roots needs tol > 0");

  const int n = p.degree();
  const auto nz = static_cast<std::size_t>(n);
  const Real tol = static_cast<Real>(opts.tol);

  Real cauchy = 0;
  for (int i = 0; i < n; ++i) cauchy = std::max(cauchy, std::abs(p.coeff(i) / p.leading()));
  const Real radius0 = Real(1) + cauchy;

  std::vector<C> z(nz);
  for (std::size_t k = 0; k < nz; ++k) {
    const Real phase = Real(2) * std::numbers::pi_v<Real> * Real(k) / Real(n) + Real(opts.phase_offset);
    z[k] = std::polar(radius0, phase);
  }

  std::vector<bool> done(nz, false);
  std::vector<int> iterations(nz, 0);
  auto converged = [&](std::size_t k) {
    return std::abs(p(z[k])) <= tol * detail::backward_scale(p, z[k]);
  };
  // Iterate down to the Horner rounding floor, not just to tol: members of a cluster that stop at tol
  // leave the cluster mean off by tol^(1/m).
  const Real floor_tol = std::min(tol, Real(4 * n) * std::numeric_limits<Real>::epsilon());
  auto at_floor = [&](std::size_t k) {
    return std::abs(p(z[k])) <= floor_tol * detail::backward_scale(p, z[k]);
  };

  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    bool all_done = true;
    for (std::size_t k = 0; k < nz; ++k) {
      if (done[k]) continue;
      if (at_floor(k)) {
        done[k] = true;
        continue;
      }
      all_done = false;
      const auto [val, der] = p.value_and_derivative(z[k]);
      C repulsion(0);
      for (std::size_t j = 0; j < nz; ++j) {
        if (j != k) repulsion += C(1) / (z[k] - z[j]);
      }
      const C ratio = val / der;
      const C step = ratio / (C(1) - ratio * repulsion);
      if (std::isfinite(step.real()) && std::isfinite(step.imag())) z[k] -= step;
      ++iterations[k];
    }
    if (all_done) break;
  }

  Real worst = 0;
  for (std::size_t k = 0; k < nz; ++k) {
    if (!done[k] && !converged(k)) {
      worst = std::max(worst, std::abs(p(z[k])) / detail::backward_scale(p, z[k]));
    }
  }
  if (worst > Real(0)) {
    std::vector<std::complex<double>> best;
    for (const auto& r : z) best.emplace_back(static_cast<double>(r.real()), static_cast<double>(r.imag()));
    throw ConvergenceError("Aberth iteration did not converge", std::move(best), static_cast<double>(worst));
  }

  if (opts.polish) {
    for (std::size_t k = 0; k < nz; ++k) {
      Real nearest = std::numeric_limits<Real>::infinity();
      for (std::size_t j = 0; j < nz; ++j) {
        if (j != k) nearest = std::min(nearest, std::abs(z[k] - z[j]));
      }
      for (int s = 0; s < 3; ++s) {
        const auto [val, der] = p.value_and_derivative(z[k]);
        if (der == C(0)) break;
        const C step = val / der;
        if (!(std::abs(step) < Real(0.1) * nearest)) break;
        const C trial = z[k] - step;
        if (!(std::abs(p(trial)) < std::abs(val))) break;
        z[k] = trial;
      }
    }
  }

  std::vector<Real> radius(nz);
  for (std::size_t k = 0; k < nz; ++k) radius[k] = detail::inclusion_radius(p, z, k);

  if (opts.symmetrize_conjugates && p.has_real_coefficients()) {
    detail::symmetrize(z, radius);
    for (std::size_t k = 0; k < nz; ++k) radius[k] = detail::inclusion_radius(p, z, k);
  }

  BasicRootSet<Real> out;
  out.roots = z;
  out.iterations = iterations;
  detail::DisjointSet clusters(nz);
  const Real cluster_radius = static_cast<Real>(opts.cluster_radius);
  for (std::size_t i = 0; i < nz; ++i) {
    for (std::size_t j = i + 1; j < nz; ++j) {
      if (std::abs(z[i] - z[j]) <= std::max(cluster_radius, radius[i] + radius[j])) {
        clusters.unite(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  std::vector<int> relabel(nz, -1);
  for (std::size_t i = 0; i < nz; ++i) {
    const int root = clusters.find(static_cast<int>(i));
    if (relabel[static_cast<std::size_t>(root)] < 0) relabel[static_cast<std::size_t>(root)] = out.cluster_count++;
    out.cluster_ids.push_back(relabel[static_cast<std::size_t>(root)]);
  }
  for (std::size_t k = 0; k < nz; ++k) {
    const Real res = std::abs(p(z[k]));
    out.residuals.push_back(res);
    out.flagged.push_back(res > tol * detail::backward_scale(p, z[k]));
  }
  for (int c = 0; c < out.cluster_count; ++c) {
    const int m = out.multiplicity(c);
    const C mean = out.cluster_centroid(c);
    if (m == 1) {
      out.centers.push_back(mean);
      continue;
    }
    Real spread = 0;
    for (std::size_t k = 0; k < nz; ++k) {
      if (out.cluster_ids[k] == c) spread = std::max(spread, std::abs(z[k] - mean));
    }
    out.centers.push_back(detail::cluster_center(p, m, mean, spread));
  }
  return out;
}

}  // namespace qbic
