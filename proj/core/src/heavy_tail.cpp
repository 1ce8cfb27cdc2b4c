#include "nlbe/heavy_tail.hpp"

#include <cmath>
#include <stdexcept>

#include "nlbe/integrate.hpp"

namespace nlbe {

namespace {

// One-sided raw tail integrals of v^(-p-1)/ln^2 v (coefficient 1):
//   mass_like(rate = p), second-moment-like (rate = p-2), etc.
double raw_tail(double rate, double v) {
  return exp_tail_integral(rate, std::log(v));
}

}  // namespace

LogPowerTail::LogPowerTail(double p) : p_(p) {
  if (!(p > 2.0)) {
    throw std::domain_error(
        "LogPowerTail: exponent p must exceed 2 (finite variance tail)");
  }
  // For a given v0, (height, coeff) solve the linear system
  //   2*v0*height       + 2*q(v0)*coeff = 1        (total mass)
  //   (2/3)*v0^3*height + 2*s(v0)*coeff = 1        (second moment)
  // with q = raw mass integral, s = raw second-moment integral. Positivity
  // of both requires 1 < v0 < sqrt(3); v0 is then pinned by continuity of
  // the density at |v| = v0.
  const auto solve_hc = [&](double v0, double& h, double& c) {
    const double q = raw_tail(p_, v0);
    const double s = raw_tail(p_ - 2.0, v0);
    const double det = 4.0 * v0 * (s - v0 * v0 * q / 3.0);
    h = 2.0 * (s - q) / det;
    c = 2.0 * v0 * (1.0 - v0 * v0 / 3.0) / det;
  };
  const auto continuity_gap = [&](double v0) {
    double h, c;
    solve_hc(v0, h, c);
    const double lv = std::log(v0);
    return h - c * std::pow(v0, -p_ - 1.0) / (lv * lv);
  };
  // Bracket by scanning, then bisect. The gap is -inf near v0 = 1 and
  // positive near sqrt(3).
  double lo = 1.0 + 1e-6;
  double hi = std::sqrt(3.0) - 1e-9;
  double glo = continuity_gap(lo);
  if (glo > 0.0) {
    throw std::runtime_error("LogPowerTail: bracketing failed at left edge");
  }
  const int scan = 64;
  double prev = lo, gprev = glo, found_hi = -1.0;
  for (int i = 1; i <= scan; ++i) {
    const double v = lo + (hi - lo) * i / scan;
    const double g = continuity_gap(v);
    if (gprev < 0.0 && g >= 0.0) {
      lo = prev;
      found_hi = v;
      break;
    }
    prev = v;
    gprev = g;
  }
  if (found_hi < 0.0) {
    throw std::runtime_error("LogPowerTail: no continuity root in (1, sqrt 3)");
  }
  hi = found_hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (continuity_gap(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-15 * hi) break;
  }
  v0_ = 0.5 * (lo + hi);
  solve_hc(v0_, height_, coeff_);
  if (!(height_ > 0.0) || !(coeff_ > 0.0)) {
    throw std::runtime_error("LogPowerTail: infeasible solution");
  }
  side_tail_mass_ = coeff_ * raw_tail(p_, v0_);

  // Quantile table: uniform grid in s = ln(m) covering 13 decades of
  // one-sided tail mass, Newton-refined knots, exact Hermite slopes.
  const int knots = 1024;
  s_top_ = std::log(side_tail_mass_);
  const double s_bottom = s_top_ - std::log(1e13);
  s_step_ = (s_top_ - s_bottom) / knots;
  q_value_.resize(knots + 1);
  q_slope_.resize(knots + 1);
  double v = v0_;
  for (int j = 0; j <= knots; ++j) {
    const double m = std::exp(s_top_ - j * s_step_);
    v = newton_tail_quantile(m, v);
    q_value_[j] = v;
    // dv/ds = dv/dm * m = -m / pdf(v).
    q_slope_[j] = -m / pdf(v);
  }
}

double LogPowerTail::tail_integral(double rate, double v) const {
  return coeff_ * raw_tail(rate, v);
}

double LogPowerTail::pdf(double v) const {
  const double a = std::fabs(v);
  if (a < v0_) return height_;
  const double la = std::log(a);
  return coeff_ * std::pow(a, -p_ - 1.0) / (la * la);
}

double LogPowerTail::tail_two_sided(double t) const {
  if (t < 0.0) throw std::domain_error("tail_two_sided: t < 0");
  if (t >= v0_) return 2.0 * tail_integral(p_, t);
  return 1.0 - 2.0 * height_ * t;
}

double LogPowerTail::abs_moment(double alpha) const {
  if (alpha < 0.0) throw std::domain_error("abs_moment: alpha < 0");
  if (!moment_finite(alpha)) {
    throw std::domain_error("abs_moment: infinite moment (alpha > p)");
  }
  const double center =
      2.0 * height_ * std::pow(v0_, alpha + 1.0) / (alpha + 1.0);
  return center + 2.0 * tail_integral(p_ - alpha, v0_);
}

double LogPowerTail::newton_tail_quantile(double m, double v_init) const {
  // The tail mass is smooth and log-convex in ln v, so Newton from a
  // same-order seed converges monotonically.
  double v = v_init;
  for (int it = 0; it < 100; ++it) {
    const double f = tail_integral(p_, v) - m;
    const double d = pdf(v);
    const double step = f / d;
    double vn = v + step;
    if (vn < v0_) vn = 0.5 * (v + v0_);
    const double rel = std::fabs(vn - v) / vn;
    v = vn;
    if (rel < 1e-14) break;
  }
  return v;
}

double LogPowerTail::quantile_one_sided_tail(double m) const {
  if (!(m > 0.0) || m > side_tail_mass_ * (1.0 + 1e-12)) {
    throw std::domain_error("quantile_one_sided_tail: mass out of range");
  }
  const double s = std::log(m);
  const double pos = (s_top_ - s) / s_step_;
  if (pos <= 0.0) return v0_;
  const auto n = static_cast<long>(q_value_.size()) - 1;
  if (pos >= static_cast<double>(n)) {
    // Below the table: Newton from the last knot (rare).
    return newton_tail_quantile(m, q_value_.back());
  }
  const auto j = static_cast<long>(pos);
  const double t = pos - j;  // in [0,1), s decreasing across the cell
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
  const double h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t);
  const double h11 = t * t * (t - 1);
  const double ds = -s_step_;  // s advances by -s_step_ across the cell
  return h00 * q_value_[j] + h10 * ds * q_slope_[j] + h01 * q_value_[j + 1] +
         h11 * ds * q_slope_[j + 1];
}

double LogPowerTail::sample_tail_above(double b, Rng& rng) const {
  const double mb = (b <= v0_) ? side_tail_mass_ : tail_integral(p_, b);
  return quantile_one_sided_tail(mb * rng.u01());
}

double LogPowerTail::sample(Rng& rng) const {
  const double s = rng.u01() - 0.5;
  const double half_center = height_ * v0_;
  const double a = std::fabs(s);
  if (a < half_center) return s / height_;
  const double m = 0.5 - a;  // one-sided tail mass beyond the draw
  const double v = quantile_one_sided_tail(m);
  return s > 0 ? v : -v;
}

}  // namespace nlbe
