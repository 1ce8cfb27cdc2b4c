#pragma once

#include <functional>

namespace nlbe {

// Adaptive Simpson quadrature of f over [a, b]. The tolerance is applied as
// abs_tol + rel_tol * |estimate| on each subinterval.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol = 1e-12,
                        double rel_tol = 1e-12, int max_depth = 48);

// integral_L^inf exp(-rate*u) * u^-2 du for L > 0, rate >= 0.
// rate == 0 gives 1/L exactly; otherwise E1-based with an asymptotic
// branch for large rate*L.
double exp_tail_integral(double rate, double lower);

// E[g(X)] for X ~ N(mean, sd^2).
double expect_gaussian(const std::function<double(double)>& g, double mean,
                       double sd, double tol = 1e-11);

// E[g(shift - 1 + E)] for E ~ Exp(1), i.e. the standardized exponential
// with mean `shift`.
double expect_std_exponential(const std::function<double(double)>& g,
                              double shift, double tol = 1e-11);

// E[g(R)] where R = ||Z|| for a k-dimensional standard normal Z (chi_k).
double expect_chi(const std::function<double(double)>& g, int k,
                  double tol = 1e-11);

// E[g(G)] for G ~ chi-square with k degrees of freedom.
double expect_chi_square(const std::function<double(double)>& g, int k,
                         double tol = 1e-10);

}  // namespace nlbe
