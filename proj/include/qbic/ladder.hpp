#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include "qbic/errors.hpp"
#include "qbic/model.hpp"

namespace qbic {

/// Symmetric band matrix stored by diagonals: band[d][i] = A(i, i + d) for d = 0..width.
template <typename T>
class SymmetricBand {
 public:
  SymmetricBand() = default;
  SymmetricBand(std::size_t n, std::size_t width) : n_(n), band_(width + 1, std::vector<T>(n, T(0))) {}

  std::size_t size() const { return n_; }
  std::size_t width() const { return band_.size() - 1; }

  T get(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    const std::size_t d = j - i;
    return d < band_.size() ? band_[d][i] : T(0);
  }
  void set(std::size_t i, std::size_t j, T v) {
    if (i > j) std::swap(i, j);
    const std::size_t d = j - i;
    if (d >= band_.size()) throw DomainError("entry outside the band");
    band_[d][i] = v;
  }

  /// y = A x
  template <typename V>
  void multiply(const std::vector<V>& x, std::vector<V>& y) const {
    y.assign(n_, V(0));
    for (std::size_t i = 0; i < n_; ++i) y[i] += band_[0][i] * x[i];
    for (std::size_t d = 1; d < band_.size(); ++d) {
      const auto& b = band_[d];
      for (std::size_t i = 0; i + d < n_; ++i) {
        if (b[i] == T(0)) continue;
        y[i] += b[i] * x[i + d];
        y[i + d] += b[i] * x[i];
      }
    }
  }

  const std::vector<T>& diagonal(std::size_t d) const { return band_[d]; }

 private:
  std::size_t n_ = 0;
  std::vector<std::vector<T>> band_;
};

/// Unpivoted banded LDL^T of a symmetric (real or complex-symmetric) matrix. Used for the
/// Crank-Nicolson solve, where 1 + i dt H / 2 has no small pivots.
template <typename T>
class BandLdlt {
 public:
  explicit BandLdlt(const SymmetricBand<T>& a) : n_(a.size()), w_(a.width()), l_(n_ * (w_ + 1), T(0)), d_(n_) {
    // An exactly vanishing pivot is replaced by eps ||A||, which moves no eigenvalue across zero by
    // more than rounding already does.
    double norm = 0.0;
    for (std::size_t d = 0; d <= w_; ++d) {
      for (const auto& v : a.diagonal(d)) norm = std::max(norm, std::abs(v));
    }
    const double tiny = std::numeric_limits<double>::epsilon() * std::max(norm, std::numeric_limits<double>::min());
    // l_(i, k) holds L(i, i - k) for k = 1..w.
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t lo = i > w_ ? i - w_ : 0;
      for (std::size_t j = lo; j < i; ++j) {
        T s = a.get(i, j);
        const std::size_t klo = std::max(lo, j > w_ ? j - w_ : 0);
        for (std::size_t k = klo; k < j; ++k) s -= lower(i, k) * lower(j, k) * d_[k];
        lower(i, j) = s / d_[j];
      }
      T s = a.get(i, i);
      for (std::size_t k = lo; k < i; ++k) s -= lower(i, k) * lower(i, k) * d_[k];
      if (s == T(0)) s = T(tiny);
      d_[i] = s;
    }
  }

  const std::vector<T>& pivots() const { return d_; }

  /// Solves A x = b in place.
  template <typename V>
  void solve(std::vector<V>& b) const {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t lo = i > w_ ? i - w_ : 0;
      for (std::size_t k = lo; k < i; ++k) b[i] -= lower(i, k) * b[k];
    }
    for (std::size_t i = 0; i < n_; ++i) b[i] /= d_[i];
    for (std::size_t ii = n_; ii-- > 0;) {
      const std::size_t hi = std::min(n_ - 1, ii + w_);
      for (std::size_t k = ii + 1; k <= hi; ++k) b[ii] -= lower(k, ii) * b[k];
    }
  }

 private:
  T& lower(std::size_t i, std::size_t j) { return l_[i * (w_ + 1) + (i - j)]; }
  const T& lower(std::size_t i, std::size_t j) const { return l_[i * (w_ + 1) + (i - j)]; }

  std::size_t n_;
  std::size_t w_;
  std::vector<T> l_;
  std::vector<T> d_;
};

/// Open ladder x in [-L, L] with the dot attached to site (0, 1). Rows are ordered along the ladder
/// with the dot placed right after (0, 1), which keeps the matrix banded (half-width 3).
class FiniteLadder {
 public:
  static constexpr int dot = 0;

  FiniteLadder(const ModelParams& p, int half_length) : params_(p), half_length_(half_length) {
    if (half_length < 1) throw DomainError("ladder half length must be >= 1");
    h_ = SymmetricBand<double>(dimension(), 3);
    const double t = p.t_h();
    for (int x = -half_length; x <= half_length; ++x) {
      h_.set(index(x, 1), index(x, 2), -p.tp_h());
      if (x < half_length) {
        h_.set(index(x, 1), index(x + 1, 1), -0.5 * t);
        h_.set(index(x, 2), index(x + 1, 2), -0.5 * t);
      }
    }
    h_.set(dot_index(), dot_index(), p.e_d());
    h_.set(dot_index(), index(0, 1), p.g());
  }

  const ModelParams& params() const { return params_; }
  int half_length() const { return half_length_; }
  std::size_t dimension() const { return 2 * (2 * static_cast<std::size_t>(half_length_) + 1) + 1; }

  /// Row of site (x, leg), leg in {1, 2}.
  std::size_t index(int x, int leg) const {
    if (x < -half_length_ || x > half_length_ || (leg != 1 && leg != 2)) throw DomainError("site outside the ladder");
    const std::size_t base = 2 * static_cast<std::size_t>(x + half_length_) + static_cast<std::size_t>(leg - 1);
    return (x > 0 || (x == 0 && leg == 2)) ? base + 1 : base;
  }
  std::size_t dot_index() const { return 2 * static_cast<std::size_t>(half_length_) + 1; }

  struct Site {
    int x = 0;
    int leg = dot;  ///< 1, 2, or dot
  };
  Site site(std::size_t row) const {
    const std::size_t d = dot_index();
    if (row == d) return {0, dot};
    const std::size_t r = row > d ? row - 1 : row;
    return {static_cast<int>(r / 2) - half_length_, static_cast<int>(r % 2) + 1};
  }

  const SymmetricBand<double>& matrix() const { return h_; }

  template <typename V>
  void apply(const std::vector<V>& x, std::vector<V>& y) const {
    h_.multiply(x, y);
  }

  /// Dense copy, row major.
  std::vector<double> to_dense() const {
    const std::size_t n = dimension();
    std::vector<double> m(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < std::min(n, i + h_.width() + 1); ++j) {
        m[i * n + j] = m[j * n + i] = h_.get(i, j);
      }
    }
    return m;
  }

  /// Gershgorin enclosure of the spectrum.
  Interval gershgorin_bounds() const {
    const std::size_t n = dimension();
    Interval out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < n; ++i) {
      double radius = 0.0;
      const std::size_t lo = i > h_.width() ? i - h_.width() : 0;
      const std::size_t hi = std::min(n - 1, i + h_.width());
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j != i) radius += std::abs(h_.get(i, j));
      }
      out.min = std::min(out.min, h_.get(i, i) - radius);
      out.max = std::max(out.max, h_.get(i, i) + radius);
    }
    return out;
  }

  /// Largest absolute row sum.
  double max_row_sum() const {
    const std::size_t n = dimension();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      const std::size_t lo = i > h_.width() ? i - h_.width() : 0;
      const std::size_t hi = std::min(n - 1, i + h_.width());
      for (std::size_t j = lo; j <= hi; ++j) s += std::abs(h_.get(i, j));
      worst = std::max(worst, s);
    }
    return worst;
  }

  /// Number of eigenvalues below sigma. In the channel basis the ladder is two chains joined through
  /// the dot, a tree, so eliminating from the chain ends inward gives an LDL^T without fill whose
  /// negative pivots are counted.
  std::size_t count_below(double sigma) const {
    const double t = params_.t_h();
    const double hop2 = 0.25 * t * t;
    const double tiny = std::numeric_limits<double>::epsilon() * std::max(1.0, max_row_sum());
    std::size_t count = 0;
    auto pivot = [&](double d) {
      if (d == 0.0) d = -tiny;
      if (d < 0.0) ++count;
      return d;
    };
    double dot = params_.e_d() - sigma;
    for (const Channel ch : {Channel::plus, Channel::minus}) {
      const double a = -channel_sign(ch) * params_.tp_h() - sigma;
      // One arm x = L..1; the other is its mirror image.
      double d = 0.0;
      std::size_t arm = 0;
      for (int x = half_length_; x >= 1; --x) {
        const std::size_t before = count;
        d = pivot(x == half_length_ ? a : a - hop2 / d);
        arm += count - before;
      }
      count += arm;
      const double centre = pivot(a - 2.0 * hop2 / d);
      dot -= 0.5 * params_.g() * params_.g() / centre;
    }
    pivot(dot);
    return count;
  }

  /// k-th smallest eigenvalue (k = 0 is the lowest) by bisection on the inertia count.
  double eigenvalue(std::size_t k, double tol = 1e-13) const {
    if (k >= dimension()) throw DomainError("eigenvalue index out of range");
    const Interval g = gershgorin_bounds();
    double lo = g.min - 1e-9;
    double hi = g.max + 1e-9;
    while (hi - lo > tol * std::max(1.0, std::abs(lo) + std::abs(hi))) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (count_below(mid) > k) hi = mid;
      else lo = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  ModelParams params_;
  int half_length_;
  SymmetricBand<double> h_;
};

inline FiniteLadder build_finite_ladder(const ModelParams& p, int half_length) { return FiniteLadder(p, half_length); }

}  // namespace qbic
