#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nlbe/distribution.hpp"

namespace nlbe {

struct range_violation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct degeneracy_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Independent scalar summand family xi_1..xi_n, stored as groups of
// identically distributed components with multiplicities.
struct ScalarFamily {
  std::vector<std::pair<DistributionSpec, long>> groups;

  static ScalarFamily iid(const DistributionSpec& spec, long n) {
    return ScalarFamily{{{spec, n}}};
  }
  static ScalarFamily single(const DistributionSpec& spec) {
    return iid(spec, 1);
  }
  long size() const;
  double sum_mean() const;
  double sum_second_moment() const;
  double sigma_alpha(double alpha) const;  // (sum E|xi|^alpha)^(1/alpha)
  double tail(double z) const;             // sum P(|xi| > z)
};

// delta solves sum_i E|xi_i| (delta ^ |xi_i|) >= 1/2 (minimal such value);
// beta = sum_i E(xi_i^2 ^ |xi_i|^3).
struct LinearizationScalars {
  double delta = 0.0;
  double beta = 0.0;
  std::map<double, double> sigma_alpha;
};

LinearizationScalars linearization_scalars(
    const ScalarFamily& family, const std::vector<double>& alphas = {2.0, 3.0});

// Inputs for the smooth-statistic bounds: operator norm of the derivative L,
// sigma = sd of L(S), smoothness constant M on the epsilon ball, type-2
// constant D, moment exponent p, and the summand moment profile.
struct BoundInputs {
  double norm_L = 1.0;
  double sigma = 1.0;
  double M = 1.0;
  double epsilon = 1.0;
  double D = 1.0;
  double p = 3.0;
  MomentProfile profile;

  double C1() const { return std::max(0.5 * M, norm_L / epsilon); }
  double q() const { return p / (p - 1.0); }
  double q_tilde() const { return p / (p - 2.0); }
  void validate() const;
};

struct BoundTerm {
  std::string label;
  double value = 0.0;
  std::string equation_tag;
};

// Itemized right-hand side of one bound, modulo the suppressed constant
// A(p). `user_constant` multiplies the total when a caller wants to plug in
// an explicit constant.
struct BoundReport {
  std::vector<BoundTerm> terms;
  double total_modulo_constant = 0.0;
  std::optional<double> z;
  std::optional<std::pair<double, double>> valid_z_range;
  std::string constant_caveat;
  double user_constant = 1.0;

  double scaled_total() const { return user_constant * total_modulo_constant; }
  nlohmann::json to_json() const;
  std::string to_csv() const;  // columns: label,value,equation_tag
};

// lambda_alpha = ||L|| s_alpha / sigma (infinite-moment flag propagates).
MomentValue lambda_alpha(const BoundInputs& in, double alpha);

// u = lambda_{2q} 1{p>=3} + lambda_p^{(p-1)/2} 1{p<3},
// v = D lambda_2 + lambda_p^p 1{p<3}.
std::pair<double, double> compute_uv(const BoundInputs& in);

// Gamma and Gamma_1 = Gamma + lambda_p^{q~} (1 + lambda_p).
std::pair<double, double> gamma_terms(const BoundInputs& in);

// Uniform bound on |P(f(S)/sigma <= z) - P(L(S)/sigma <= z)|: terms
// P(||S||>eps), lambda_{p^3}^{p^3}, G_X(sigma/||L||), Gamma. When the first
// probability is not supplied, the Chebyshev fallback D^2 s_2^2 / eps^2 is
// used. The tail argument defaults to the profile's G_X(sigma/||L||).
BoundReport uniform_fS_bound(const BoundInputs& in,
                             std::optional<double> prob_S_exceeds_eps = {},
                             std::optional<double> tail_at_sigma_over_L = {});

// Non-uniform bound, valid on 1 <= |z| <= 3 C1 eps^2 / sigma.
BoundReport nonuniform_fS_bound(const BoundInputs& in, double z);

// One component of a (xi, eta) pair family with |xi| <= |eta| a.s.
struct XiEtaAtom {
  double xi = 0.0;
  double eta = 0.0;
  double prob = 0.0;
};
struct XiEtaFamily {
  std::vector<std::pair<std::vector<XiEtaAtom>, long>> groups;
  long size() const;
  double G_xi(double z) const;
  double G_eta(double z) const;
  double sigma_alpha(double alpha) const;
  static XiEtaFamily from_scalar(const ScalarFamily& fam);  // eta = xi
};

// Linear-statistic Berry-Esseen terms: B1(z), B2(z,p), and min(B1, B2).
struct LinearBEBound {
  double B1 = 0.0;
  double B2 = 0.0;
  double B = 0.0;
};
LinearBEBound linear_BE_bound(const XiEtaFamily& family, double z, double p);
// f(S) route, substituting xi = L(X)/sigma, eta = ||L|| ||X|| / sigma.
LinearBEBound linear_BE_bound(const BoundInputs& in, double z);

// Constants of the i.i.d. p=3 corollary.
struct IidP3Terms {
  double A1 = 0.0;
  double A2 = 0.0;
};
IidP3Terms iid_p3_constants(double C1, double epsilon, double norm_L,
                            double sigma1, double V2, double V3, long n);

// Explicit truncation+exponential chain giving the suboptimal-rate uniform
// bound; `be_constant` is the classical linear Berry-Esseen constant
// (external input, default 0.56).
struct SuboptimalNorms {
  double V2 = 0.0;
  double Vp = 0.0;
  double LVp3 = 0.0;  // ||L(V)||_{p^3}
  double sigma1 = 0.0;
};
BoundReport suboptimal_exp_bound(long n, double p, const SuboptimalNorms& norms,
                                 double M, double epsilon,
                                 double be_constant = 0.56, double D = 1.0);

// Unit transformation X -> c X when f carries dimension d.
BoundInputs scale_inputs(const BoundInputs& in, double c, double d);

// Generic nonlinear-vs-linear assemblies (arguments are the already-computed
// expectations).
enum class UniformVariant { DeltaForm, BetaForm, BetaVsNormal };
BoundReport nonlinear_vs_linear_ub(double delta, double beta,
                                   double E_W_barDelta, double sum_E_xi_dd,
                                   double P_max_eta_gt_1,
                                   UniformVariant variant);
double chen_shao_tau(double barDelta_q, double delta, double sigma_p,
                     double sum_xi_p_dd_q);
BoundReport nonlinear_vs_linear_nub(double gamma_z, double tau, double z);

}  // namespace nlbe
