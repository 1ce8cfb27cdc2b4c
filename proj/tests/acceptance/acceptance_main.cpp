// Acceptance suite: one criterion per invocation (--criterion N) or all in
// sequence. Each criterion prints a single [PASS]/[FAIL] line with the
// measured quantities; the process exits nonzero if any requested criterion
// fails.

#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "nlbe/bounds.hpp"
#include "nlbe/concentration.hpp"
#include "nlbe/normal.hpp"
#include "nlbe/simulation.hpp"
#include "nlbe/statistics.hpp"
#include "nlbe/verify.hpp"

using namespace nlbe;

namespace {

constexpr std::uint64_t kSeed = 20260810;

struct Outcome {
  bool pass = false;
  std::string detail;
};

long replicates_per_n() { return 200000; }

std::vector<long> rate_n_grid() { return {50, 100, 200, 400, 800, 1600, 3200}; }

double run_rate_slope(const SmoothStatisticModel& model, std::uint64_t seed,
                      double* wall_seconds) {
  ExperimentConfig cfg;
  cfg.model = model;
  cfg.n_grid = rate_n_grid();
  cfg.replicates = replicates_per_n();
  cfg.seed = seed;
  cfg.bootstrap = 0;
  cfg.keep_values = false;
  const SimulationRun run = run_experiment(cfg);
  if (wall_seconds) *wall_seconds = run.wall_seconds;
  return run.rate.slope;
}

Outcome criterion1() {
  const auto model =
      build_model(StatKind::Student, {.mu = {1.0}},
                  DistributionSpec::standardized_exponential(1.0));
  double wall = 0.0;
  const double slope = run_rate_slope(model, kSeed, &wall);
  const bool in_window = slope >= -0.65 && slope <= -0.35;
  const bool in_time = wall <= 600.0;
  std::ostringstream os;
  os << "student/shifted-exponential slope " << slope
     << " (target window [-0.65,-0.35]), wall " << wall << "s";
  return {in_window && in_time, os.str()};
}

Outcome criterion2() {
  const auto pearson = build_model(
      StatKind::Pearson, {.rho = 0.0},
      DistributionSpec::product_of_marginals(
          {DistributionSpec::gaussian_1d(0.0, 1.0),
           DistributionSpec::gaussian_1d(0.0, 1.0)}));
  const auto hotelling = build_model(StatKind::Hotelling, {.mu = {1.0, 0.0}},
                                     DistributionSpec::gaussian({1.0, 0.0}, 1.0));
  const double slope_p = run_rate_slope(pearson, kSeed + 1, nullptr);
  const double slope_h = run_rate_slope(hotelling, kSeed + 2, nullptr);
  const bool ok_p = slope_p >= -0.65 && slope_p <= -0.35;
  const bool ok_h = slope_h >= -0.65 && slope_h <= -0.35;
  std::ostringstream os;
  os << "pearson slope " << slope_p << (ok_p ? " (in window)" : " (OUT)")
     << ", hotelling slope " << slope_h << (ok_h ? " (in window)" : " (OUT)");
  if (!ok_p) {
    os << " | note: for rho=0 gaussian marginals the exact law of sqrt(n)R "
          "is symmetric, its Kolmogorov distance to normal decays like 1/n "
          "(exact-law slope -1.005) and sits below the 2e5-replicate noise "
          "floor for n >= 200, so no honest measurement can land in the "
          "window; the sqrt(n) bound is an upper bound, not tight here";
  }
  return {ok_p && ok_h, os.str()};
}

Outcome criterion3() {
  const auto model = build_model(StatKind::Student, {.mu = {1.0}},
                                 DistributionSpec::gaussian_1d(1.0, 1.0));
  std::vector<double> z_grid;
  for (int z = 2; z <= 5; ++z) {
    z_grid.push_back(z);
    z_grid.push_back(-z);
  }
  const BoundVsTruthResult r = bound_vs_truth(model, {400, 1600}, z_grid,
                                              replicates_per_n(), kSeed + 3);
  const double s400 = r.sup_implied[0].second;
  const double s1600 = r.sup_implied[1].second;
  const double ratio = std::max(s400, s1600) / std::min(s400, s1600);
  const bool ok = std::isfinite(s400) && std::isfinite(s1600) && s400 > 0.0 &&
                  s1600 > 0.0 && ratio < 3.0;
  std::ostringstream os;
  os << "implied constant sup: n=400 -> " << s400 << ", n=1600 -> " << s1600
     << ", ratio " << ratio << " (< 3 required)";
  return {ok, os.str()};
}

Outcome criterion4() {
  // Student two-point observation law, p = 0.3.
  const auto two = DistributionSpec::two_point_bernoulli_shift(0.3);
  const double mu = two.mean_value();
  const DegeneracyReport ds =
      degeneracy_check(StatKind::Student, {.mu = {mu}}, two);
  // Pearson four-point example with x = y = 1 (kappa = 2).
  const double kappa = 2.0;
  const double c = std::sqrt(2.0 / (kappa * kappa + 1.0));
  const auto four = DistributionSpec::discrete_atoms(
      {{c, kappa * c}, {-c, -kappa * c}, {kappa * c, c}, {-kappa * c, -c}},
      {0.25, 0.25, 0.25, 0.25});
  const DegeneracyReport dp = degeneracy_check(
      StatKind::Pearson, {.rho = 2.0 * kappa / (kappa * kappa + 1.0)}, four);

  // Naively standardized Student statistic at n = 2000 stays far from
  // normal (chi-square-type limit).
  const long n = 2000;
  const long reps = replicates_per_n();
  const Rng root(kSeed + 4);
  std::vector<double> values;
  values.reserve(static_cast<size_t>(reps));
  long undefined = 0;
  for (long r = 0; r < reps; ++r) {
    Rng rng = root.stream(static_cast<std::uint64_t>(r));
    double s1 = 0.0, s2 = 0.0;
    for (long i = 0; i < n; ++i) {
      const double x = two.draw1(rng);
      s1 += x;
      s2 += x * x;
    }
    const double m = s1 / static_cast<double>(n);
    const double var = s2 / static_cast<double>(n) - m * m;
    if (!(var > 1e-12 * std::max(s2 / static_cast<double>(n), 1e-300))) {
      ++undefined;
      continue;
    }
    values.push_back(std::sqrt(static_cast<double>(n)) * m / std::sqrt(var));
  }
  std::vector<double> std_values = self_standardized(values);
  std::sort(std_values.begin(), std_values.end());
  const double ks = uniform_ks_distance(std_values);

  const bool ok = ds.sigma1 < 1e-9 && dp.sigma1 < 1e-9 && ds.degenerate &&
                  dp.degenerate && ks > 0.1;
  std::ostringstream os;
  os << "sigma1(student two-point) = " << ds.sigma1
     << ", sigma1(pearson four-point) = " << dp.sigma1
     << ", naive-standardized KS at n=2000: " << ks << " (> 0.1 required, "
     << undefined << " undefined replicates)";
  return {ok, os.str()};
}

Outcome criterion5() {
  VerifyOptions opts;
  opts.seed = kSeed + 5;
  opts.hoeffding_families = 100;
  opts.max_ineq_families = 1000;
  opts.tilt_families = 200;
  const auto results = run_verification_suite(opts);
  bool ok = true;
  std::ostringstream os;
  for (const auto& r : results) {
    if (r.name == "hoeffding-tail-vs-enumeration" ||
        r.name == "symmetric-max-of-sum-inequality" ||
        r.name == "tilt-identity-and-moment-bounds") {
      ok = ok && r.pass;
      os << r.name << " [" << (r.pass ? "ok" : "FAIL") << ": " << r.detail
         << "] ";
    }
  }
  return {ok, os.str()};
}

Outcome criterion6() {
  VerifyOptions opts;
  opts.seed = kSeed + 6;
  const auto results = run_verification_suite(opts);
  for (const auto& r : results) {
    if (r.name == "bound-term-unit-freeness") {
      return {r.pass, r.detail};
    }
  }
  return {false, "unit-freeness check missing"};
}

Outcome criterion7() {
  bool ok = true;
  std::ostringstream os;
  const auto expect = [&](const char* label, double got, double want,
                          double tol) {
    const bool pass = std::fabs(got - want) <= tol * std::max(1.0, std::fabs(want));
    ok = ok && pass;
    os << label << "=" << got << (pass ? " " : " [MISMATCH] ");
  };

  const double C1 = std::max(4.0 / 2.0, 1.0 / 0.5);
  const IidP3Terms t = iid_p3_constants(C1, 0.5, 1.0, 1.0, 1.0, 1.2, 100);
  expect("A1", t.A1, 1.808, 1e-9);
  expect("A2", t.A2, 10.1376, 1e-9);

  {
    BoundInputs in;
    in.norm_L = 1.0;
    in.sigma = 0.1;
    in.M = 2.0;
    in.epsilon = 0.5;
    in.p = 3.0;
    in.profile = MomentProfile::iid_custom(
        100,
        [](double alpha) -> MomentValue {
          return {std::pow(2.0, alpha), true, {}};
        },
        [](double) { return 0.0; },
        [](const std::function<double(double)>&) -> double { return 0.0; },
        {3.0});
    expect("lambda3", lambda_alpha(in, 3.0).value,
           2.0 / std::pow(100.0, 1.0 / 6.0), 1e-9);
  }
  {
    BoundInputs in;
    in.norm_L = 1.0;
    in.sigma = 1.0;
    in.M = 2.0;
    in.epsilon = 1.0;
    in.p = 3.0;
    in.profile = MomentProfile::iid_custom(
        1,
        [](double alpha) -> MomentValue {
          if (alpha == 1.5) return {std::pow(0.05, 1.5), true, {}};
          if (alpha == 2.0) return {std::pow(0.1, 2.0), true, {}};
          return {std::pow(0.2, alpha), true, {}};
        },
        [](double) { return 0.0; },
        [](const std::function<double(double)>&) -> double { return 0.0; },
        {1.5, 2.0, 3.0});
    const auto [gamma, gamma1] = gamma_terms(in);
    expect("Gamma", gamma, 0.061, 1e-9);
    expect("Gamma1", gamma1, 0.0706, 1e-9);
    const SumTailBound st = sum_tail_bound(
        [&in]() {
          BoundInputs cp = in;
          cp.profile = MomentProfile::iid_custom(
              1,
              [](double alpha) -> MomentValue {
                return {std::pow(0.1, alpha), true, {}};
              },
              [](double) { return 0.0; },
              [](const std::function<double(double)>&) -> double { return 0.0; },
              {2.0, 3.0});
          return cp;
        }(),
        3.0);
    expect("Lambda1", st.Lambda1, 0.36 * M_E, 1e-9);
  }
  {
    SuboptimalNorms norms;
    norms.V2 = 1.0;
    norms.Vp = 1.3;
    norms.LVp3 = 1.1;
    norms.sigma1 = 1.0;
    const BoundReport r = suboptimal_exp_bound(1000, 3.0, norms, 4.0, 0.5);
    expect("n*exp_term", r.terms[4].value * 1000.0, 1.0, 1e-9);
  }
  return {ok, os.str()};
}

Outcome criterion8() {
  bool ok = true;
  std::ostringstream os;

  const std::vector<double> s{1.0, 2.0, 3.0};
  const double t = student_T(s).value;
  ok = ok && std::fabs(t - 2.0 * std::sqrt(4.5)) <= 1e-12;
  os << "T(1,2,3)=" << t << " ";

  const std::vector<double> px{0, 1, 0}, py{0, 0, 1};
  const double r = pearson_R(px, py).value;
  ok = ok && std::fabs(r + 0.5) <= 1e-12;
  os << "R=" << r << " ";

  SampleMatrix m;
  m.rows = 3;
  m.cols = 2;
  m.data = {1, 0, 0, 1, 1, 1};
  const double h = hotelling_T2(m).value;
  ok = ok && std::fabs(h - 24.0) <= 1e-12;
  os << "T2=" << h << " ";

  // Invariance fuzz, 1000 samples per property.
  Rng root(kSeed + 8);
  long fails = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    Rng rng = root.stream(static_cast<std::uint64_t>(rep));
    const long n = 5 + static_cast<long>(rng.below(25));
    std::vector<double> x(static_cast<size_t>(n)), y(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) {
      x[static_cast<size_t>(i)] = rng.gauss() + 0.4;
      y[static_cast<size_t>(i)] = rng.gauss();
    }
    const double a = 0.05 + 4.0 * rng.u01();
    std::vector<double> xs = x;
    for (auto& v : xs) v *= a;
    if (std::fabs(student_T(xs).value - student_T(x).value) > 1e-8) ++fails;

    std::vector<double> xa = x, ya = y;
    const double b = 0.05 + 3.0 * rng.u01();
    const double d = 0.05 + 3.0 * rng.u01();
    for (auto& v : xa) v = 0.7 + b * v;
    for (auto& v : ya) v = -0.2 + d * v;
    if (std::fabs(pearson_R(xa, ya).value - pearson_R(x, y).value) > 1e-8) {
      ++fails;
    }

    SampleMatrix mm;
    mm.rows = n;
    mm.cols = 2;
    for (long i = 0; i < n; ++i) {
      mm.data.push_back(x[static_cast<size_t>(i)] + 0.6);
      mm.data.push_back(y[static_cast<size_t>(i)]);
    }
    double b00 = 0, b01 = 0, b10 = 0, b11 = 0, det = 0;
    while (std::fabs(det) < 0.15) {
      b00 = 2.0 * rng.u01() - 1.0;
      b01 = 2.0 * rng.u01() - 1.0;
      b10 = 2.0 * rng.u01() - 1.0;
      b11 = 2.0 * rng.u01() - 1.0;
      det = b00 * b11 - b01 * b10;
    }
    SampleMatrix mb = mm;
    for (long i = 0; i < n; ++i) {
      const double u = mm.data[static_cast<size_t>(2 * i)];
      const double v = mm.data[static_cast<size_t>(2 * i + 1)];
      mb.data[static_cast<size_t>(2 * i)] = b00 * u + b01 * v;
      mb.data[static_cast<size_t>(2 * i + 1)] = b10 * u + b11 * v;
    }
    const StatValue h0 = hotelling_T2(mm);
    const StatValue h1 = hotelling_T2(mb);
    if (h0.defined && h1.defined) {
      const double rel = std::fabs(h1.value - h0.value) /
                         std::max(1.0, std::fabs(h0.value));
      if (rel > 1e-8) ++fails;
    }
  }
  ok = ok && fails == 0;
  os << "invariance fuzz failures: " << fails << "/3000";
  return {ok, os.str()};
}

Outcome criterion9() {
  bool ok = true;
  std::ostringstream os;

  const auto f = [](std::span<const double> x) { return x[0] + x[0] * x[0]; };
  const auto L = [](std::span<const double> x) { return x[0]; };
  const CertifyResult q = smoothness_certify(f, L, 1, 1.0, 100000, kSeed + 9);
  ok = ok && std::fabs(q.M_hat - 2.0) <= 1e-6 && q.violations == 0;
  os << "quadratic M_hat=" << q.M_hat << " violations=" << q.violations << "; ";

  const auto student = build_model(StatKind::Student, {.mu = {1.0}},
                                   DistributionSpec::gaussian_1d(1.0, 1.0));
  const CertifyResult cs = smoothness_certify(student, 0.5, 100000, kSeed + 10);
  ok = ok && cs.violations == 0;
  os << "student M_hat=" << cs.M_hat << " violations=" << cs.violations << "; ";

  const auto pearson = build_model(
      StatKind::Pearson, {.rho = 0.0},
      DistributionSpec::product_of_marginals(
          {DistributionSpec::gaussian_1d(0.0, 1.0),
           DistributionSpec::gaussian_1d(0.0, 1.0)}));
  const CertifyResult cp = smoothness_certify(pearson, 0.5, 100000, kSeed + 11);
  ok = ok && cp.violations == 0;
  os << "pearson M_hat=" << cp.M_hat << " violations=" << cp.violations << "; ";

  const auto hotelling = build_model(StatKind::Hotelling, {.mu = {1.0, 0.0}},
                                     DistributionSpec::gaussian({1.0, 0.0}, 1.0));
  const CertifyResult ch =
      smoothness_certify(hotelling, 0.5, 100000, kSeed + 12);
  ok = ok && ch.violations == 0;
  os << "hotelling M_hat=" << ch.M_hat << " violations=" << ch.violations;
  return {ok, os.str()};
}

Outcome criterion10() {
  const std::vector<long> ns = {1000, 4000, 16000};
  std::vector<OptimalityPoint> pts;
  std::ostringstream os;
  for (size_t i = 0; i < ns.size(); ++i) {
    const double kappa = std::pow(static_cast<double>(ns[i]), 0.25);
    const OptimalityReport rep = optimality_demo(
        2.5, {kappa}, ns[i], 20000, kSeed + 13 + i, 0, false);
    pts.push_back(rep.points[0]);
    os << "n=" << ns[i] << " ratio=" << rep.points[0].ratio << " (se "
       << rep.points[0].ratio_se << ", certified remainder "
       << rep.points[0].remainder_ratio << "); ";
  }
  bool ok = true;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const double band = 1.96 * (pts[i].ratio_se + pts[i + 1].ratio_se) +
                        pts[i].remainder_ratio + pts[i + 1].remainder_ratio;
    if (pts[i + 1].ratio < pts[i].ratio - band) {
      ok = false;
      os << "decrease " << pts[i].ratio << " -> " << pts[i + 1].ratio
         << " exceeds the error band " << band << "; ";
    }
  }
  if (!ok) {
    os << "note: the ratio is bounded well away from zero (the defect stays "
          "comparable to n P(V > sqrt(2) w), which is the substantive "
          "property) but converges to its large-n limit from above, so "
          "strict nondecrease fails once the estimator is tight";
  }
  return {ok, os.str()};
}

Outcome run_criterion(int idx) {
  switch (idx) {
    case 1: return criterion1();
    case 2: return criterion2();
    case 3: return criterion3();
    case 4: return criterion4();
    case 5: return criterion5();
    case 6: return criterion6();
    case 7: return criterion7();
    case 8: return criterion8();
    case 9: return criterion9();
    case 10: return criterion10();
    default: return {false, "unknown criterion"};
  }
}

const char* criterion_name(int idx) {
  switch (idx) {
    case 1: return "rate reproduction, student/shifted-exponential";
    case 2: return "rate reproduction, pearson and hotelling";
    case 3: return "non-uniform shape: implied constant stability";
    case 4: return "degeneracy detection and non-normal limit";
    case 5: return "exact inequality suites";
    case 6: return "unit-freeness of bound terms";
    case 7: return "arithmetic fixtures";
    case 8: return "statistic oracles and invariance";
    case 9: return "smoothness certification";
    case 10: return "optimality demo ratio trend";
    default: return "?";
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      wanted.push_back(std::atoi(argv[i + 1]));
      ++i;
    }
  }
  if (wanted.empty()) {
    for (int i = 1; i <= 10; ++i) wanted.push_back(i);
  }
  int failures = 0;
  for (int idx : wanted) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run_criterion(idx);
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::cout << (out.pass ? "[PASS] " : "[FAIL] ") << "criterion " << idx
              << " (" << criterion_name(idx) << "): " << out.detail << " ["
              << secs << "s]" << std::endl;
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
