#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nlbe/bounds.hpp"
#include "nlbe/distribution.hpp"

namespace nlbe {

// Statistic value with an explicit undefined flag. Undefined replicates
// (zero empirical variance, singular covariance) are surfaced to callers and
// never folded into a finite sentinel value.
struct StatValue {
  double value = 0.0;
  bool defined = true;
};

// sqrt(n) * mean / empirical sd (1/n normalization).
StatValue student_T(std::span<const double> xs);
// Product-moment correlation.
StatValue pearson_R(std::span<const double> xs, std::span<const double> ys);
// n * mean' * inv(empirical covariance) * mean; undefined when the
// covariance has relative condition number above 1e12.
StatValue hotelling_T2(const SampleMatrix& sample);

enum class StatKind { Student, Pearson, Hotelling, User };

std::string to_string(StatKind k);

// Parameters: Student takes mu (scalar), Pearson takes rho, Hotelling takes
// the mean vector mu.
struct StatParams {
  std::vector<double> mu;
  double rho = 0.0;
};

// The smooth-function model behind one statistic: the V-embedding of an
// observation, the functional f on the epsilon ball, its derivative L at 0,
// sigma1 = ||L(V)||_2, and a numerically certified smoothness constant M.
struct SmoothStatisticModel {
  StatKind kind = StatKind::User;
  StatParams params;
  DistributionSpec obs_dist;
  int obs_dim = 1;
  int v_dim = 1;

  std::function<void(std::span<const double>, std::span<double>)> embed;
  std::function<double(std::span<const double>)> f;
  std::vector<double> L_coeffs;  // Riesz representer in the flattened coords
  double norm_L = 0.0;           // value used in bound inputs
  double norm_L_numeric = 0.0;   // exact representer norm (diagnostic)
  double sigma1 = 0.0;
  double epsilon = 0.5;
  double M = 0.0;  // certified, with 10% inflation
  MomentValue V2;
  MomentValue V3;
  bool sixth_moment_finite = true;

  double L_of(std::span<const double> v) const;
  double C1() const { return std::max(0.5 * M, norm_L / epsilon); }
  // sigma1 below 1e-9 relative to the natural scale ||L|| ||V||_2.
  bool effectively_degenerate() const {
    const double scale = norm_L * (V2.finite ? V2.value : 1.0);
    return !(sigma1 >= 1e-9 * std::max(scale, 1e-30));
  }
  // Centering and scale of the standardized statistic at sample size n:
  // (stat - center(n)) / scale(n) is compared against the standard normal.
  double center(long n) const;
  double scale(long n) const;
  StatValue evaluate(const SampleMatrix& sample) const;

  BoundInputs bound_inputs(long n, double p = 3.0,
                           const std::vector<double>& alphas = {1.5, 2.0, 3.0}) const;

  // Pushforward law of ||V||: raw moments E||V||^alpha (with finiteness
  // flag), P(||V|| > t), and E g(||V||). Set by build_model.
  std::function<MomentValue(double)> v_norm_moment_;
  std::function<double(double)> v_norm_tail_;
  std::function<double(const std::function<double(double)>&)> v_expect_norm_;
};

struct ModelOptions {
  double epsilon = 0.5;
  long certify_points = 100000;
  std::uint64_t certify_seed = 0x5eedULL;
  double safety_inflation = 1.10;
  long mc_draws = 400000;  // for kinds without an exact moment path
};

SmoothStatisticModel build_model(StatKind kind, const StatParams& params,
                                 const DistributionSpec& obs_dist,
                                 const ModelOptions& opts = {});

struct DegeneracyReport {
  double sigma1 = 0.0;
  bool degenerate = false;
  std::string witness;
  nlohmann::json to_json() const;
};

DegeneracyReport degeneracy_check(StatKind kind, const StatParams& params,
                                  const DistributionSpec& obs_dist);

struct CertifyResult {
  double M_hat = 0.0;
  long violations = 0;
};

// Max finite-difference Hessian operator norm over random points of the
// epsilon ball, plus the count of points violating
// |f(x) - L(x)| <= (M_hat/2) ||x||^2 (1 + 1e-6).
CertifyResult smoothness_certify(
    const std::function<double(std::span<const double>)>& f,
    const std::function<double(std::span<const double>)>& L, int dim,
    double epsilon, long n_points, std::uint64_t seed);
CertifyResult smoothness_certify(const SmoothStatisticModel& model,
                                 double epsilon, long n_points,
                                 std::uint64_t seed);

enum class IdentityCheck { Holds, Fails, NotApplicable };

// Verifies f(Vbar) against the statistic transform on the event
// ||Vbar|| <= 1/2, to 1e-10 relative.
IdentityCheck linearization_identity_check(const SmoothStatisticModel& model,
                                           const SampleMatrix& sample);

}  // namespace nlbe
