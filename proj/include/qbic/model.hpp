#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "qbic/errors.hpp"

namespace qbic {

/// Rung eigenmodes of the ladder: c_{x,+} = (c_{x,1} + c_{x,2})/sqrt(2) and its antisymmetric partner.
enum class Channel { plus, minus };

/// +1 for the symmetric channel, -1 for the antisymmetric one.
constexpr double channel_sign(Channel ch) { return ch == Channel::plus ? 1.0 : -1.0; }

inline const char* to_string(Channel ch) { return ch == Channel::plus ? "+" : "-"; }

/// Physical parameters of the ladder with a side-coupled dot. Energies are in units of t_h and hbar = 1.
class ModelParams {
 public:
  ModelParams() = default;

  ModelParams(double t_h, double tp_h, double g, double e_d) : t_h_(t_h), tp_h_(tp_h), g_(g), e_d_(e_d) {
    if (!std::isfinite(t_h) || !std::isfinite(tp_h) || !std::isfinite(g) || !std::isfinite(e_d)) {
      throw DomainError("model parameters must be finite");
    }
    if (t_h <= 0.0) throw DomainError("leg hopping t_h must be positive");
    if (g < 0.0) throw DomainError("dot coupling g must be non-negative");
  }

  double t_h() const { return t_h_; }
  double tp_h() const { return tp_h_; }
  double g() const { return g_; }
  double e_d() const { return e_d_; }

  ModelParams with_tp_h(double v) const { return {t_h_, v, g_, e_d_}; }
  ModelParams with_g(double v) const { return {t_h_, tp_h_, v, e_d_}; }
  ModelParams with_e_d(double v) const { return {t_h_, tp_h_, g_, v}; }

  /// The two channel bands overlap, so each van Hove edge of one sits inside the other's continuum.
  bool bands_overlap() const { return std::abs(tp_h_) < std::abs(t_h_); }

  bool operator==(const ModelParams&) const = default;

 private:
  double t_h_ = 1.0;
  double tp_h_ = 0.0;
  double g_ = 0.0;
  double e_d_ = 0.0;
};

struct Interval {
  double min = 0.0;
  double max = 0.0;

  bool contains_strictly(double e) const { return e > min && e < max; }
  bool operator==(const Interval&) const = default;
};

/// Band of channel + (lower) and channel - (upper).
struct BandEdges {
  Interval lower_band;
  Interval upper_band;
  bool overlap = false;

  const Interval& band(Channel ch) const { return ch == Channel::plus ? lower_band : upper_band; }
};

/// Dispersion of a channel: -t_h cos k - sigma t'_h.
inline double band_energy(const ModelParams& p, Channel ch, double k) {
  return -p.t_h() * std::cos(k) - channel_sign(ch) * p.tp_h();
}

inline BandEdges band_edges(const ModelParams& p) {
  const double t = p.t_h();
  const double tp = p.tp_h();
  return BandEdges{{-t - tp, t - tp}, {-t + tp, t + tp}, p.bands_overlap()};
}

/// One-dimensional density of states per site; diverges as an inverse square root at both edges.
inline double density_of_states(const ModelParams& p, Channel ch, double e) {
  const Interval band = band_edges(p).band(ch);
  if (!band.contains_strictly(e)) {
    throw DomainError(std::string("energy outside band of channel ") + to_string(ch) + " [" +
                      std::to_string(band.min) + ", " + std::to_string(band.max) + "]");
  }
  const double shifted = e + channel_sign(ch) * p.tp_h();
  return 1.0 / (std::numbers::pi * std::sqrt((p.t_h() - shifted) * (p.t_h() + shifted)));
}

}  // namespace qbic
