#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nlbe/statistics.hpp"

namespace nlbe {

enum class DistanceWeight { Uniform, Polynomial, Exponential };

// Exact sup_z |F_hat(z) - Phi(z)| from the order statistics of the sample.
double uniform_ks_distance(std::span<const double> sorted_values);

// Empirical CDF of a sorted sample at z.
double empirical_cdf(std::span<const double> sorted_values, double z);

// Weighted distance max over the z grid of w(z) |F_hat(z) - Phi(z)| with
// w(z) = 1, (1 + |z|)^p, or exp(|z|/3).
double weighted_distance(std::span<const double> sorted_values,
                         std::span<const double> z_grid, DistanceWeight weight,
                         double poly_p = 3.0);

struct RateEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_half_width = 0.0;  // 95%, bootstrap when replicates are available
  double predicted_order = 0.0;
};

// Least squares of log D_n on log n; needs >= 3 points, all D_n > 0.
RateEstimate rate_fit(const std::vector<std::pair<double, double>>& points,
                      double predicted_order = -0.5);

struct ExperimentConfig {
  SmoothStatisticModel model;
  std::vector<long> n_grid;
  long replicates = 200000;
  std::vector<double> z_grid;  // defaults to +/-2..6 when empty
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency
  int bootstrap = 500;
  double predicted_order = -0.5;
  bool keep_values = true;
};

struct PerNResult {
  long n = 0;
  long sentinel_count = 0;
  double uniform_distance = 0.0;
  double weighted_poly = 0.0;   // (1+|z|)^3 weight over the z grid
  double weighted_exp = 0.0;    // exp(|z|/3) weight over the z grid
  std::vector<double> z_grid;
  std::vector<double> empirical_gap;  // |F_hat(z) - Phi(z)| per grid point
  std::vector<double> values;         // sorted standardized values
};

struct SimulationRun {
  std::string digest;
  std::uint64_t seed = 0;
  StatKind kind = StatKind::User;
  std::vector<PerNResult> per_n;
  RateEstimate rate;
  bool rate_valid = false;  // needs >= 3 grid points with positive distances
  double wall_seconds = 0.0;

  nlohmann::json to_json() const;
  std::string distances_csv() const;  // n,uniform,weighted_poly,weighted_exp,sentinels
  std::string loglog_data() const;    // two columns: log n, log D_n
};

// Degeneracy is checked by the caller (run refuses sigma1 = 0 models).
SimulationRun run_experiment(const ExperimentConfig& cfg);

struct BoundVsTruthRow {
  long n = 0;
  double z = 0.0;
  double empirical = 0.0;
  double shape = 0.0;
  double implied_constant = 0.0;
  bool in_range = true;
};

struct BoundVsTruthResult {
  std::vector<BoundVsTruthRow> rows;
  std::vector<std::pair<long, double>> sup_implied;  // per n, in-range rows
  std::vector<std::pair<long, IidP3Terms>> constants;
  std::string csv() const;  // n,z,empirical,shape,implied_constant,in_range
};

BoundVsTruthResult bound_vs_truth(const SmoothStatisticModel& model,
                                  const std::vector<long>& n_grid,
                                  const std::vector<double>& z_grid,
                                  long replicates, std::uint64_t seed,
                                  int workers = 0);

// Exact gamma_z cross term sum_i P(|W - xi_i| > (|z|-2)/3) P(|eta_i| > 1)
// by enumeration, plus the supplied P(|Delta| > (|z|+1)/3) and the family's
// G_xi((|z|+1)/3).
double gamma_z_estimate(const std::vector<std::vector<XiEtaAtom>>& comps,
                        double z, double prob_delta_exceeds);

// Single-large-jump decomposition for the heavy-tail quadratic demo.
// For f(x) = x + x^2 the standardized statistic is T = sqrt(n)(Sbar+Sbar^2)
// with linear part W = sqrt(n) Sbar; the defect P(T>z) - P(W>z) at z =
// kappa sqrt(n) is estimated by conditioning on the number of summands
// exceeding a threshold (one- and two-jump terms estimated, zero- and
// three-plus-jump mass bounded and reported).
struct OptimalityPoint {
  long n = 0;
  double kappa = 0.0;
  double z = 0.0;
  double w = 0.0;           // n^(3/4) z^(1/2)
  double prob_T = 0.0;      // P(T > z)
  double prob_W = 0.0;      // P(W > z)
  double prob_delta = 0.0;  // P(Delta > 2z)
  double defect = 0.0;      // prob_T - prob_W
  double defect_se = 0.0;
  double tail_delta = 0.0;  // n P(V > sqrt(2) w), quadrature
  double ratio = 0.0;       // defect / tail_delta
  double ratio_se = 0.0;
  double remainder_ratio = 0.0;  // certified neglected mass / tail_delta
};

struct OptimalityReport {
  double p = 0.0;
  long n = 0;
  long replicates = 0;
  bool linear_f = false;
  std::vector<OptimalityPoint> points;
  nlohmann::json to_json() const;
  std::string csv() const;
};

OptimalityReport optimality_demo(double p, const std::vector<double>& kappa_grid,
                                 long n, long replicates, std::uint64_t seed,
                                 int workers = 0, bool linear_f = false);

// Center/scale a replicate sample by its own mean and sd (the "naive"
// standardization used when sigma1 vanishes).
std::vector<double> self_standardized(std::span<const double> values);

}  // namespace nlbe
