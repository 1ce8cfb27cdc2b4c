#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nlbe/heavy_tail.hpp"
#include "nlbe/rng.hpp"

namespace nlbe {

struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct infinite_moment_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A possibly-infinite moment. Bound formulas must refuse infinite inputs
// explicitly instead of propagating sentinel numbers.
struct MomentValue {
  double value = 0.0;
  bool finite = true;
  std::optional<double> std_error;  // set for Monte Carlo estimates

  double require_finite(const char* what) const {
    if (!finite) throw infinite_moment_error(what);
    return value;
  }
};

enum class DistKind {
  DiscreteAtoms,
  Gaussian,
  StandardizedExponential,
  TwoPointBernoulliShift,
  HeavyTailLogCorrected,
  ProductOfMarginals,
  UserSampler,
};

std::string to_string(DistKind k);

// A sampleable (and, for closed-form kinds, exactly integrable) model of a
// random vector. Immutable after construction; safe to share across threads.
class DistributionSpec {
 public:
  static DistributionSpec discrete_atoms(std::vector<std::vector<double>> points,
                                         std::vector<double> probs);
  static DistributionSpec discrete_atoms_1d(const std::vector<double>& values,
                                            const std::vector<double>& probs);
  static DistributionSpec gaussian(std::vector<double> mean, double sd = 1.0);
  static DistributionSpec gaussian_1d(double mean, double sd = 1.0);
  static DistributionSpec standardized_exponential(double shift);
  static DistributionSpec two_point_bernoulli_shift(double p);
  static DistributionSpec heavy_tail_log_corrected(double p);
  static DistributionSpec product_of_marginals(std::vector<DistributionSpec> marginals);
  static DistributionSpec user_sampler(
      int dim, std::function<void(Rng&, std::span<double>)> draw);

  DistKind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool is_scalar() const { return dim_ == 1; }
  bool supports_exact() const;

  // One draw (dim doubles) into out.
  void draw(Rng& rng, std::span<double> out) const;
  double draw1(Rng& rng) const;

  // Atoms (two-point kind is materialized as its two atoms).
  bool has_atoms() const;
  const std::vector<std::vector<double>>& atom_points() const;
  const std::vector<double>& atom_probs() const;

  const std::vector<DistributionSpec>& marginals() const { return marginals_; }
  const LogPowerTail& tail_model() const;
  double gaussian_sd() const { return sd_; }
  const std::vector<double>& gaussian_mean() const { return mean_; }
  double exponential_shift() const { return shift_; }
  double bernoulli_p() const { return bern_p_; }

  // P(||X|| > t), exact for every kind except UserSampler.
  double norm_tail(double t) const;
  // E ||X||^alpha with an explicit infinite flag (heavy tails).
  MomentValue norm_moment(double alpha) const;
  // E g(||X||); requires a kind with an exact path.
  double expect_norm(const std::function<double(double)>& g) const;
  // E g(X) for scalar kinds with an exact path.
  double expect_scalar(const std::function<double(double)>& g) const;

  // Exact mean / second-moment diagnostics (scalar kinds and atoms).
  double mean_value(int coord = 0) const;
  double second_moment(int coord = 0) const;

  nlohmann::json to_json() const;
  static DistributionSpec from_json(const nlohmann::json& j);

 public:
  DistributionSpec() = default;  // empty spec; every operation throws

 private:
  void build_atom_cdf();

  DistKind kind_ = DistKind::UserSampler;
  int dim_ = 1;
  std::vector<std::vector<double>> atom_points_;
  std::vector<double> atom_probs_;
  std::vector<double> atom_cdf_;
  std::vector<double> mean_;
  double sd_ = 1.0;
  double shift_ = 0.0;
  double bern_p_ = 0.5;
  double tail_p_ = 0.0;
  std::shared_ptr<const LogPowerTail> tail_;
  std::vector<DistributionSpec> marginals_;
  std::function<void(Rng&, std::span<double>)> user_draw_;
};

// n draws from spec, row-major (n x dim). Deterministic in (spec, n, seed).
struct SampleMatrix {
  long rows = 0;
  int cols = 1;
  std::vector<double> data;
  std::span<const double> row(long i) const {
    return {data.data() + static_cast<size_t>(i) * cols,
            static_cast<size_t>(cols)};
  }
};
SampleMatrix sample(const DistributionSpec& spec, long n, std::uint64_t seed);

enum class MomentMode { Exact, MonteCarlo };

// Scalar summary of a summand family feeding the bound formulas.
//
// Two shapes: a generic independent family (groups of identical components
// with multiplicities), or the i.i.d. reduction X_i = V_i / n where
// s_alpha = ||V||_alpha / n^(1 - 1/alpha) and G_X(z) = n P(||V|| > n z).
class MomentProfile {
 public:
  static MomentProfile iid_of(const DistributionSpec& v, long n,
                              const std::vector<double>& alphas,
                              MomentMode mode = MomentMode::Exact,
                              long mc_draws = 200000, std::uint64_t seed = 1);
  static MomentProfile family(
      std::vector<std::pair<DistributionSpec, long>> groups,
      const std::vector<double>& alphas,
      MomentMode mode = MomentMode::Exact, long mc_draws = 200000,
      std::uint64_t seed = 1);
  // i.i.d. profile for a pushforward V-distribution given by callables
  // (used for statistic embeddings whose law is not a DistributionSpec).
  static MomentProfile iid_custom(
      long n, std::function<MomentValue(double)> norm_moment,
      std::function<double(double)> norm_tail,
      std::function<double(const std::function<double(double)>&)> expect_norm,
      const std::vector<double>& alphas);

  bool iid_mode() const { return iid_; }
  long n() const { return n_; }
  MomentMode mode() const { return mode_; }

  // (sum_i E||X_i||^alpha)^(1/alpha); computed lazily for untracked alphas
  // when an exact path exists.
  MomentValue s(double alpha) const;
  // ||V||_alpha in i.i.d. mode.
  MomentValue v_norm(double alpha) const;
  const std::map<double, MomentValue>& tracked_s() const { return s_alpha_; }

  // G(z) = sum_i P(||X_i|| > z).
  double tail_sum(double z) const;

  // sum_i E[ min((c||X_i||)^2, (c||X_i||)^3) ]; exact kinds only.
  double sum_expect_min_sq_cube(double c) const;

  // Scale transformation X -> scale * X (used by the unit-freeness suite).
  MomentProfile scaled(double scale) const;

  // i.i.d. source spec (if any).
  const DistributionSpec* source() const { return source_ ? source_.get() : nullptr; }

 public:
  MomentProfile() = default;  // empty profile; accessors throw

 private:
  bool iid_ = false;
  long n_ = 0;
  MomentMode mode_ = MomentMode::Exact;
  double scale_ = 1.0;
  std::map<double, MomentValue> s_alpha_;
  std::map<double, MomentValue> v_alpha_;
  std::shared_ptr<const DistributionSpec> source_;
  std::shared_ptr<const std::vector<std::pair<DistributionSpec, long>>> groups_;
  std::shared_ptr<const std::vector<double>> mc_norms_;  // sorted, MC mode
  std::function<MomentValue(double)> custom_norm_moment_;
  std::function<double(double)> custom_norm_tail_;
  std::function<double(const std::function<double(double)>&)> custom_expect_norm_;
};

MomentProfile moment_profile(const DistributionSpec& spec,
                             const std::vector<double>& alphas, long n,
                             MomentMode mode = MomentMode::Exact,
                             long mc_draws = 200000, std::uint64_t seed = 1);
double tail_sum(const MomentProfile& profile, double z);

}  // namespace nlbe
