#pragma once

#include <algorithm>
#include <complex>
#include <initializer_list>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "qbic/model.hpp"

namespace qbic {

/// Dense polynomial with complex coefficients; coeffs()[i] multiplies z^i.
template <typename Real>
class Polynomial {
 public:
  using real_type = Real;
  using value_type = std::complex<Real>;

  /// Degree reported for the zero polynomial.
  static constexpr int zero_degree = std::numeric_limits<int>::min();

  Polynomial() = default;
  explicit Polynomial(std::vector<value_type> coeffs) : coeffs_(std::move(coeffs)) { trim(); }
  Polynomial(std::initializer_list<value_type> coeffs) : coeffs_(coeffs) { trim(); }

  static Polynomial constant(value_type c) { return Polynomial({c}); }
  /// z - root
  static Polynomial linear_factor(value_type root) { return Polynomial({-root, value_type(1)}); }

  int degree() const { return coeffs_.empty() ? zero_degree : static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  std::span<const value_type> coeffs() const { return coeffs_; }
  value_type coeff(int i) const {
    return i >= 0 && i < static_cast<int>(coeffs_.size()) ? coeffs_[static_cast<std::size_t>(i)]
                                                          : value_type(0);
  }
  value_type leading() const { return coeffs_.empty() ? value_type(0) : coeffs_.back(); }

  bool has_real_coefficients() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const value_type& c) { return c.imag() == Real(0); });
  }

  Real max_abs_coeff() const {
    Real m = 0;
    for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
    return m;
  }

  /// Horner evaluation.
  value_type operator()(value_type z) const {
    value_type acc(0);
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  /// Value and first derivative in one Horner sweep.
  std::pair<value_type, value_type> value_and_derivative(value_type z) const {
    value_type p(0), dp(0);
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
      dp = dp * z + p;
      p = p * z + *it;
    }
    return {p, dp};
  }

  Polynomial derivative() const {
    std::vector<value_type> d;
    for (std::size_t i = 1; i < coeffs_.size(); ++i) d.push_back(coeffs_[i] * Real(i));
    return Polynomial(std::move(d));
  }

  /// sum_i |c_i| |z|^i, the natural scale for backward-error tests.
  Real abs_bound(value_type z) const {
    const Real r = std::abs(z);
    Real acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * r + std::abs(*it);
    return acc;
  }

  template <typename Other>
  Polynomial<Other> cast() const {
    std::vector<std::complex<Other>> out;
    out.reserve(coeffs_.size());
    for (const auto& c : coeffs_) out.emplace_back(static_cast<Other>(c.real()), static_cast<Other>(c.imag()));
    return Polynomial<Other>(std::move(out));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<value_type> out(std::max(a.coeffs_.size(), b.coeffs_.size()), value_type(0));
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) out[i] += a.coeffs_[i];
    for (std::size_t i = 0; i < b.coeffs_.size(); ++i) out[i] += b.coeffs_[i];
    return Polynomial(std::move(out));
  }

  friend Polynomial operator-(const Polynomial& a) { return a * value_type(-1); }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

  /// Discrete convolution of the coefficient sequences.
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<value_type> out(a.coeffs_.size() + b.coeffs_.size() - 1, value_type(0));
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
    return Polynomial(std::move(out));
  }

  friend Polynomial operator*(const Polynomial& a, value_type s) {
    std::vector<value_type> out(a.coeffs_);
    for (auto& c : out) c *= s;
    return Polynomial(std::move(out));
  }
  friend Polynomial operator*(value_type s, const Polynomial& a) { return a * s; }

  bool operator==(const Polynomial&) const = default;

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == value_type(0)) coeffs_.pop_back();
  }

  std::vector<value_type> coeffs_;
};

template <typename Real>
Polynomial<Real> poly_add(const Polynomial<Real>& a, const Polynomial<Real>& b) {
  return a + b;
}
template <typename Real>
Polynomial<Real> poly_mul(const Polynomial<Real>& a, const Polynomial<Real>& b) {
  return a * b;
}
template <typename Real>
Polynomial<Real> poly_scale(const Polynomial<Real>& a, std::complex<Real> s) {
  return a * s;
}

/// Radical-free form of the two-channel dispersion equation.
///
/// With A = z - E_d and B_sigma = (z + sigma t')^2 - t^2, the equation
///   A = (g^2/2) (s_+ + s_-),  s_sigma^2 = 1/B_sigma
/// is squared twice to eliminate both square roots:
///   [A^2 B_+ B_- - (g^4/4)(B_+ + B_-)]^2 - (g^8/4) B_+ B_- = 0.
/// Every sign choice of (s_+, s_-) solves this, so its twelve roots are the union of all four Riemann
/// sheets. The inner bracket is assembled by convolution and squared afterwards.
template <typename Real = double>
Polynomial<Real> dispersion_polynomial(const ModelParams& p) {
  using C = std::complex<Real>;
  const Real t = p.t_h();
  const Real tp = p.tp_h();
  const Real g2 = Real(p.g()) * Real(p.g());
  const Real g4 = g2 * g2;

  const Polynomial<Real> a({C(-Real(p.e_d())), C(1)});
  const Polynomial<Real> b_plus({C(tp * tp - t * t), C(2 * tp), C(1)});
  const Polynomial<Real> b_minus({C(tp * tp - t * t), C(-2 * tp), C(1)});

  const Polynomial<Real> b_prod = b_plus * b_minus;
  const Polynomial<Real> inner = a * a * b_prod - (b_plus + b_minus) * C(g4 / 4);
  return inner * inner - b_prod * C(g4 * g4 / 4);
}

}  // namespace qbic
