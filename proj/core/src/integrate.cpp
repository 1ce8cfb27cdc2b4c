#include "nlbe/integrate.hpp"

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

namespace nlbe {

namespace {

double simpson_step(const std::function<double(double)>& f, double a,
                    double fa, double b, double fb, double m, double fm,
                    double whole, double abs_tol, double rel_tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double h = b - a;
  const double left = h / 12.0 * (fa + 4.0 * flm + fm);
  const double right = h / 12.0 * (fm + 4.0 * frm + fb);
  const double refined = left + right;
  const double err = refined - whole;
  const double tol = abs_tol + rel_tol * std::fabs(refined);
  if (depth <= 0 || std::fabs(err) <= 15.0 * tol) {
    return refined + err / 15.0;
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * abs_tol, rel_tol,
                      depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * abs_tol, rel_tol,
                      depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol, double rel_tol,
                        int max_depth) {
  if (a == b) return 0.0;
  // Seed with a few panels so narrow features near an endpoint are seen.
  const int panels = 8;
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double x0 = a + i * h;
    const double x1 = x0 + h;
    const double xm = 0.5 * (x0 + x1);
    const double f0 = f(x0);
    const double f1 = f(x1);
    const double fm = f(xm);
    const double whole = h / 6.0 * (f0 + 4.0 * fm + f1);
    total += simpson_step(f, x0, f0, x1, f1, xm, fm, whole, abs_tol / panels,
                          rel_tol, max_depth);
  }
  return total;
}

double exp_tail_integral(double rate, double lower) {
  if (lower <= 0.0) throw std::domain_error("exp_tail_integral: lower <= 0");
  if (rate < 0.0) throw std::domain_error("exp_tail_integral: rate < 0");
  if (rate == 0.0) return 1.0 / lower;
  const double x = rate * lower;
  if (x > 30.0) {
    // integral = (exp(-x)/L) * sum_k (-1)^k (k+1)! / x^(k+1), truncated at
    // the smallest term (asymptotic series).
    double sum = 0.0;
    double term = 1.0 / x;
    double prev = std::fabs(term);
    for (int k = 0; k < 60; ++k) {
      sum += term;
      term *= -(k + 2.0) / x;
      const double mag = std::fabs(term);
      if (mag >= prev || mag < 1e-18 * std::fabs(sum)) break;
      prev = mag;
    }
    return std::exp(-x) / lower * sum;
  }
  return std::exp(-x) / lower - rate * boost::math::expint(1, x);
}

double expect_gaussian(const std::function<double(double)>& g, double mean,
                       double sd, double tol) {
  const auto integrand = [&](double z) {
    return g(mean + sd * z) *
           (0.3989422804014327 * std::exp(-0.5 * z * z));
  };
  return adaptive_simpson(integrand, -13.0, 13.0, tol, tol);
}

double expect_std_exponential(const std::function<double(double)>& g,
                              double shift, double tol) {
  const auto integrand = [&](double e) { return g(shift - 1.0 + e) * std::exp(-e); };
  // Split so the adaptive grid resolves the bulk separately from the tail.
  return adaptive_simpson(integrand, 0.0, 12.0, tol, tol) +
         adaptive_simpson(integrand, 12.0, 120.0, tol, tol);
}

double expect_chi(const std::function<double(double)>& g, int k, double tol) {
  if (k < 1) throw std::domain_error("expect_chi: k < 1");
  const double log_norm =
      (1.0 - 0.5 * k) * std::log(2.0) - std::lgamma(0.5 * k);
  const auto integrand = [&](double r) {
    if (r <= 0.0) return 0.0;
    const double log_pdf = log_norm + (k - 1) * std::log(r) - 0.5 * r * r;
    return g(r) * std::exp(log_pdf);
  };
  const double hi = 14.0 + 2.0 * std::sqrt(static_cast<double>(k));
  return adaptive_simpson(integrand, 0.0, hi, tol, tol);
}

double expect_chi_square(const std::function<double(double)>& g, int k,
                         double tol) {
  if (k < 1) throw std::domain_error("expect_chi_square: k < 1");
  const double half_k = 0.5 * k;
  const double log_norm = -half_k * std::log(2.0) - std::lgamma(half_k);
  const auto integrand = [&](double x) {
    if (x <= 0.0) return 0.0;
    const double log_pdf = log_norm + (half_k - 1.0) * std::log(x) - 0.5 * x;
    return g(x) * std::exp(log_pdf);
  };
  const double hi = 40.0 + 4.0 * k;
  return adaptive_simpson(integrand, 0.0, hi, tol, tol);
}

}  // namespace nlbe
