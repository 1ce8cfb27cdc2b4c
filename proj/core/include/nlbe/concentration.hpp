#pragma once

#include <functional>
#include <vector>

#include "nlbe/bounds.hpp"
#include "nlbe/distribution.hpp"

namespace nlbe {

// Hoeffding-type tail bound for W = sum xi_i with sum E xi_i^2 = 1 (caller
// contract): P(W >= z) <= G_xi(t) + (e / (1 + z t))^(z/t).
double hoeffding_tail(double z, double t,
                      const std::function<double(double)>& tail_G);

// Finitely supported independent scalar components.
struct DiscreteAtom {
  double value = 0.0;
  double prob = 0.0;
};
struct DiscreteComponent {
  std::vector<DiscreteAtom> atoms;
};
struct DiscreteFamily {
  std::vector<DiscreteComponent> comps;

  long joint_size() const;
  double sum_mean() const;
  double sum_second_moment() const;
  // E|xi_i|^p for component i.
  double component_abs_moment(size_t i, double p) const;
  double component_mean(size_t i) const;
  // Exact P(W >= z) by enumeration of the joint support.
  double prob_sum_at_least(double z) const;
  // Centers and normalizes values so sum E xi^2 = 1, E xi_i = 0.
  DiscreteFamily standardized() const;
};

// Exponential reweighting by exp(c * Wbar) with Wbar = sum xi_i 1{xi_i <= 1}.
// Independence across components is preserved; each component is reweighted
// by exp(c * value * 1{value <= 1}) and renormalized.
struct TiltedDistribution {
  DiscreteFamily base;
  DiscreteFamily tilted;
  double c = 0.0;
  std::vector<double> component_normalizers;  // E exp(c xibar_i)
  double joint_normalizer = 1.0;              // E exp(c Wbar)
};
TiltedDistribution tilt(const DiscreteFamily& base, double c);

// Vector atoms for the symmetric max-of-sum inequality.
struct VectorComponent {
  std::vector<std::vector<double>> points;
  std::vector<double> probs;
};
struct VectorFamily {
  int dim = 1;
  std::vector<VectorComponent> comps;
  long joint_size() const;
};

struct MaxSumCheck {
  double lhs = 0.0;  // P(||S|| > x)
  double mid = 0.0;  // (1/2) P(max ||X_i|| > x)
  double rhs = 0.0;  // (1/2) sumP / (1 + sumP)
  bool holds = false;
  bool exact = true;  // enumeration (vs Monte Carlo fallback)
};
// Components must be symmetric about 0. Enumeration is used when the joint
// support has at most `enumeration_limit` points, Monte Carlo otherwise.
MaxSumCheck max_sum_check(const VectorFamily& family, double x,
                          long enumeration_limit = 10000000,
                          long mc_draws = 200000, std::uint64_t seed = 1);

// Truncation threshold x = sqrt(sigma |z| / (3 C1)),
// Lambda1 = 12 e p C1 D^2 s_2^2 / sigma, and the tail bound
// G_X(x / (2p)) + (Lambda1/|z|)^p, for z in the non-uniform range.
struct SumTailBound {
  double x = 0.0;
  double Lambda1 = 0.0;
  double bound = 0.0;
};
SumTailBound sum_tail_bound(const BoundInputs& in, double z);

// Rosenthal-type envelope ||S||_p <= K (s_p + D s_2); the companion tail
// form bounds P(||S|| > eps) by K (s_p^p + D^p s_2^p) / eps^p.
double rosenthal_envelope(const MomentProfile& profile, double p, double D,
                          double user_constant);
double rosenthal_tail_envelope(const MomentProfile& profile, double p,
                               double D, double user_constant, double epsilon);

}  // namespace nlbe
