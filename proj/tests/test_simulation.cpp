#include <doctest.h>

#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include <nlohmann/json.hpp>

#include "nlbe/normal.hpp"
#include "nlbe/simulation.hpp"

using namespace nlbe;

namespace {

ModelOptions quick_opts() {
  ModelOptions o;
  o.certify_points = 2000;
  return o;
}

SmoothStatisticModel student_gaussian(double mu) {
  return build_model(StatKind::Student, {.mu = {mu}},
                     DistributionSpec::gaussian_1d(mu, 1.0), quick_opts());
}

}  // namespace

TEST_CASE("uniform distance: point mass and quantile grid") {
  const std::vector<double> zeros(100, 0.0);
  CHECK(uniform_ks_distance(zeros) == doctest::Approx(0.5).epsilon(1e-12));

  const long n = 1000;
  std::vector<double> grid(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) {
    grid[static_cast<size_t>(i)] =
        inv_norm_cdf((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  }
  CHECK(uniform_ks_distance(grid) ==
        doctest::Approx(1.0 / (2.0 * n)).epsilon(1e-9));
}

TEST_CASE("uniform distance equals a brute-force grid scan") {
  Rng rng(17);
  std::vector<double> vals(4000);
  for (auto& v : vals) v = rng.gauss() * 1.1 + 0.05;
  std::sort(vals.begin(), vals.end());
  const double exact = uniform_ks_distance(vals);
  double brute = 0.0;
  const long grid_n = 100000;
  for (long i = 0; i <= grid_n; ++i) {
    const double z = -8.0 + 16.0 * static_cast<double>(i) / grid_n;
    brute = std::max(brute,
                     std::fabs(empirical_cdf(vals, z) - norm_cdf(z)));
  }
  CHECK(brute <= exact + 1e-12);
  CHECK(exact <= brute + 2e-4);  // grid resolution slack
}

TEST_CASE("weighted distance: point mass with polynomial weight") {
  const std::vector<double> zeros(100, 0.0);
  std::vector<double> zgrid;
  for (int z = -6; z <= -1; ++z) zgrid.push_back(z);
  const double d =
      weighted_distance(zeros, zgrid, DistanceWeight::Polynomial, 3.0);
  CHECK(d == doctest::Approx(8.0 * norm_cdf(-1.0)).epsilon(1e-9));
  CHECK(d == doctest::Approx(1.2696).epsilon(1e-3));
}

TEST_CASE("rate fit: exact power laws and noise") {
  std::vector<std::pair<double, double>> pts;
  for (double n : {50.0, 100.0, 200.0, 400.0}) {
    pts.emplace_back(n, 3.0 / std::sqrt(n));
  }
  CHECK(rate_fit(pts).slope == doctest::Approx(-0.5).epsilon(1e-12));

  std::vector<std::pair<double, double>> flat;
  for (double n : {50.0, 100.0, 200.0}) flat.emplace_back(n, 0.17);
  CHECK(rate_fit(flat).slope == doctest::Approx(0.0));

  Rng rng(3);
  std::vector<std::pair<double, double>> noisy;
  for (double n : {50.0, 100.0, 200.0, 400.0, 800.0, 1600.0}) {
    noisy.emplace_back(n, std::pow(n, -0.5) * (1.0 + 0.1 * (rng.u01() - 0.5)));
  }
  const double slope = rate_fit(noisy).slope;
  CHECK(slope > -0.6);
  CHECK(slope < -0.4);

  CHECK_THROWS_AS(rate_fit({{50.0, 0.1}, {100.0, 0.05}}), validation_error);
  CHECK_THROWS_AS(rate_fit({{50.0, 0.1}, {100.0, 0.0}, {200.0, 0.1}}),
                  validation_error);
}

TEST_CASE("run_experiment: deterministic across worker counts") {
  ExperimentConfig cfg;
  cfg.model = student_gaussian(0.0);
  cfg.n_grid = {50};
  cfg.replicates = 2000;
  cfg.seed = 11;
  cfg.bootstrap = 0;
  cfg.workers = 1;
  const SimulationRun a = run_experiment(cfg);
  cfg.workers = 4;
  const SimulationRun b = run_experiment(cfg);
  cfg.workers = 16;
  const SimulationRun c = run_experiment(cfg);
  CHECK(a.per_n[0].uniform_distance == b.per_n[0].uniform_distance);
  CHECK(b.per_n[0].uniform_distance == c.per_n[0].uniform_distance);
  CHECK(a.per_n[0].values == b.per_n[0].values);
  CHECK(a.per_n[0].sentinel_count == 0);  // continuous observations
}

TEST_CASE("run_experiment: distances shrink and rate is sane") {
  ExperimentConfig cfg;
  cfg.model = build_model(StatKind::Student, {.mu = {1.0}},
                          DistributionSpec::standardized_exponential(1.0),
                          quick_opts());
  cfg.n_grid = {50, 200, 800};
  cfg.replicates = 20000;
  cfg.seed = 5;
  cfg.bootstrap = 100;
  const SimulationRun run = run_experiment(cfg);
  CHECK(run.per_n.front().uniform_distance >
        run.per_n.back().uniform_distance);
  CHECK(run.rate.slope < -0.2);
  CHECK(run.rate.slope > -0.9);
  CHECK(run.rate.ci_half_width > 0.0);
  // Pearson at n = 200 stays well within 0.05 of normal.
  ExperimentConfig pc;
  pc.model = build_model(
      StatKind::Pearson, {.rho = 0.0},
      DistributionSpec::product_of_marginals(
          {DistributionSpec::gaussian_1d(0.0, 1.0),
           DistributionSpec::gaussian_1d(0.0, 1.0)}),
      quick_opts());
  pc.n_grid = {200};
  pc.replicates = 20000;
  pc.seed = 6;
  pc.bootstrap = 0;
  const SimulationRun pr = run_experiment(pc);
  CHECK(pr.per_n[0].uniform_distance < 0.05);
}

TEST_CASE("run_experiment refuses degenerate models") {
  const auto two = DistributionSpec::two_point_bernoulli_shift(0.3);
  ModelOptions quick;
  quick.certify_points = 500;
  SmoothStatisticModel m =
      build_model(StatKind::Student, {.mu = {two.mean_value()}}, two, quick);
  ExperimentConfig cfg;
  cfg.model = m;
  cfg.n_grid = {100};
  cfg.replicates = 100;
  CHECK_THROWS_AS(run_experiment(cfg), degeneracy_error);
}

TEST_CASE("student with gaussian observations matches scaled t distribution") {
  // Two-sample KS at the 1% level across two seeds: MC draws of
  // sqrt((n-1)/n) T against exact Student t(n-1) samples.
  const long n = 30;
  const long reps = 20000;
  const boost::math::students_t_distribution<double> tdist(n - 1);
  for (std::uint64_t seed : {101ULL, 202ULL}) {
    ExperimentConfig cfg;
    cfg.model = student_gaussian(0.0);
    cfg.n_grid = {n};
    cfg.replicates = reps;
    cfg.seed = seed;
    cfg.bootstrap = 0;
    const SimulationRun run = run_experiment(cfg);
    // values are (T - 0)/sigma1 with sigma1 = 1, i.e. T itself.
    std::vector<double> mc = run.per_n[0].values;
    const double scale = std::sqrt(static_cast<double>(n - 1) /
                                   static_cast<double>(n));
    for (auto& v : mc) v *= scale;
    Rng rng(seed + 7);
    std::vector<double> ref(static_cast<size_t>(reps));
    for (auto& v : ref) v = boost::math::quantile(tdist, rng.u01());
    std::sort(ref.begin(), ref.end());
    // two-sample KS
    double d = 0.0;
    size_t i = 0, j = 0;
    while (i < mc.size() && j < ref.size()) {
      const double x = std::min(mc[i], ref[j]);
      while (i < mc.size() && mc[i] <= x) ++i;
      while (j < ref.size() && ref[j] <= x) ++j;
      d = std::max(d, std::fabs(static_cast<double>(i) / mc.size() -
                                static_cast<double>(j) / ref.size()));
    }
    const double crit =
        1.628 * std::sqrt(2.0 / static_cast<double>(reps));  // alpha = 0.01
    CHECK(d < crit);
  }
}

TEST_CASE("bound_vs_truth produces finite implied constants in range") {
  const auto model = student_gaussian(1.0);
  const BoundVsTruthResult r = bound_vs_truth(model, {200, 400}, {-3, -2, 2, 3},
                                              20000, 31, 0);
  REQUIRE(r.sup_implied.size() == 2);
  for (const auto& [n, sup] : r.sup_implied) {
    CHECK(std::isfinite(sup));
    CHECK(sup > 0.0);
  }
  for (const auto& row : r.rows) {
    CHECK(row.shape > 0.0);
    CHECK(row.in_range);  // z range is wide at these n
  }
  const std::string csv = r.csv();
  CHECK(csv.rfind("n,z,", 0) == 0);
}

TEST_CASE("gamma_z estimate: exact enumeration cross-check") {
  // Two components: xi in {+-0.6} and {+-0.8}, eta = 2 xi so some eta
  // exceed 1.
  std::vector<std::vector<XiEtaAtom>> comps(2);
  comps[0] = {{0.6, 1.2, 0.5}, {-0.6, -1.2, 0.5}};
  comps[1] = {{0.8, 1.6, 0.5}, {-0.8, -1.6, 0.5}};
  const double z = 2.0;
  const double got = gamma_z_estimate(comps, z, 0.25);
  // By hand: G_xi(1) = 0; the cross term: for each i,
  // P(|W - xi_i| > 0) = 1 (the other value is +-0.6 or +-0.8, never 0) and
  // P(|eta_i| > 1) = 1, so the sum is 2. Total = 0.25 + 0 + 2.
  CHECK(got == doctest::Approx(2.25).epsilon(1e-12));
}

TEST_CASE("self standardization centers and scales") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const auto out = self_standardized(xs);
  double m = 0.0;
  for (double v : out) m += v;
  CHECK(std::fabs(m) < 1e-12);
}

TEST_CASE("optimality demo: linear f gives zero defect") {
  const OptimalityReport rep =
      optimality_demo(2.5, {1.0}, 1000, 2000, 77, 0, /*linear_f=*/true);
  REQUIRE(rep.points.size() == 1);
  CHECK(rep.points[0].defect == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("optimality demo: quadratic f produces a stable positive ratio") {
  const OptimalityReport rep = optimality_demo(2.5, {1.0}, 1000, 4000, 78, 0);
  REQUIRE(rep.points.size() == 1);
  const auto& pt = rep.points[0];
  CHECK(pt.defect > 0.0);
  CHECK(pt.tail_delta > 0.0);
  CHECK(pt.ratio > 0.3);
  CHECK(pt.ratio < 50.0);
  // The certified remainder must be a small fraction of the tail scale.
  CHECK(pt.remainder_ratio < 0.1);
  // Statistical error under control.
  CHECK(pt.ratio_se < 0.2 * pt.ratio);
}

TEST_CASE("optimality demo is deterministic across workers") {
  const OptimalityReport a = optimality_demo(2.5, {1.0}, 500, 1000, 9, 1);
  const OptimalityReport b = optimality_demo(2.5, {1.0}, 500, 1000, 9, 4);
  CHECK(a.points[0].defect == b.points[0].defect);
  CHECK(a.points[0].ratio == b.points[0].ratio);
}
