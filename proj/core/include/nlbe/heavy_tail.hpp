#pragma once

#include <vector>

#include "nlbe/rng.hpp"

namespace nlbe {

// Symmetric real distribution with density
//
//   coeff * |v|^(-p-1) / ln^2 |v|   for |v| >= v0,
//   height                          for |v| <  v0,
//
// normalized to total mass 1 and unit second moment. The exponent p > 2 is
// the only free parameter; (coeff, v0, height) are solved so that the
// density is also continuous at |v| = v0. The q-th absolute moment is
// finite exactly for q <= p (the log correction makes E|V|^p finite).
class LogPowerTail {
 public:
  explicit LogPowerTail(double p);

  double p() const { return p_; }
  double v0() const { return v0_; }
  double height() const { return height_; }
  double coeff() const { return coeff_; }

  double pdf(double v) const;
  // P(|V| > t) for t >= 0.
  double tail_two_sided(double t) const;
  // P(V > t) for t >= 0 (symmetric halves).
  double tail_one_sided(double t) const { return 0.5 * tail_two_sided(t); }

  // E|V|^alpha; finite iff alpha <= p. Throws std::domain_error beyond p.
  bool moment_finite(double alpha) const { return alpha <= p_; }
  double abs_moment(double alpha) const;

  // v >= v0 such that the one-sided tail mass P(V > v) equals m,
  // for 0 < m <= tail_one_sided(v0).
  double quantile_one_sided_tail(double m) const;

  // Draw from the conditional law of V given V > b (one-sided), b >= v0.
  double sample_tail_above(double b, Rng& rng) const;

  double sample(Rng& rng) const;

 private:
  double tail_integral(double rate, double v) const;  // coeff*I(rate, ln v)
  double newton_tail_quantile(double m, double v_init) const;

  double p_ = 0;
  double v0_ = 0;
  double height_ = 0;
  double coeff_ = 0;
  double side_tail_mass_ = 0;  // P(V > v0)

  // Quantile table on a uniform grid in s = ln(m), with exact slopes for
  // cubic Hermite interpolation.
  double s_top_ = 0;    // ln(side_tail_mass_)
  double s_step_ = 0;   // spacing (positive, grid descends)
  std::vector<double> q_value_;  // v at each knot
  std::vector<double> q_slope_;  // dv/ds at each knot
};

}  // namespace nlbe
