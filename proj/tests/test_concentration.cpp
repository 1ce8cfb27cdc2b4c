#include <doctest.h>

#include <cmath>

#include "nlbe/concentration.hpp"
#include "nlbe/verify.hpp"

using namespace nlbe;

namespace {

DiscreteFamily rademacher_family(long n, double value) {
  DiscreteFamily fam;
  fam.comps.resize(static_cast<size_t>(n));
  for (auto& c : fam.comps) {
    c.atoms = {{value, 0.5}, {-value, 0.5}};
  }
  return fam;
}

}  // namespace

TEST_CASE("hoeffding tail: closed-form values and enumeration comparison") {
  const auto zero_tail = [](double) { return 0.0; };
  CHECK(hoeffding_tail(0.0, 1.0, zero_tail) == doctest::Approx(1.0));
  CHECK(hoeffding_tail(4.0, 1.0, zero_tail) ==
        doctest::Approx(std::pow(M_E / 5.0, 4.0)).epsilon(1e-12));

  // n = 4 i.i.d. +/-1/2: exact P(W >= 2) = 1/16 <= (e/3)^2.
  const DiscreteFamily fam = rademacher_family(4, 0.5);
  CHECK(fam.sum_second_moment() == doctest::Approx(1.0));
  CHECK(fam.prob_sum_at_least(2.0) == doctest::Approx(1.0 / 16.0));
  const auto tail = [&fam](double t) {
    double s = 0.0;
    for (const auto& c : fam.comps) {
      for (const auto& a : c.atoms) {
        if (std::fabs(a.value) > t) s += a.prob;
      }
    }
    return s;
  };
  const double bound = hoeffding_tail(2.0, 1.0, tail);
  CHECK(bound == doctest::Approx(std::pow(M_E / 3.0, 2.0)).epsilon(1e-12));
  CHECK(fam.prob_sum_at_least(2.0) <= bound);
  CHECK_THROWS_AS(hoeffding_tail(1.0, 0.0, zero_tail), validation_error);
}

TEST_CASE("tilt: identity cases and frozen reweightings") {
  // c = 0 leaves the family unchanged.
  const DiscreteFamily fam = rademacher_family(1, 1.0);
  const TiltedDistribution id = tilt(fam, 0.0);
  CHECK(id.tilted.comps[0].atoms[0].prob == doctest::Approx(0.5));
  CHECK(id.joint_normalizer == doctest::Approx(1.0));

  // Single +/-1: P(tilted = 1) = e^c / (e^c + e^{-c}).
  for (double c : {0.3, 1.0, 2.0}) {
    const TiltedDistribution td = tilt(fam, c);
    const double expect = std::exp(c) / (std::exp(c) + std::exp(-c));
    // atom order: +1 first
    CHECK(td.tilted.comps[0].atoms[0].prob ==
          doctest::Approx(expect).epsilon(1e-12));
  }

  // Atoms {2, -2}: the value 2 is truncated out of the exponent, so
  // P(tilted = 2) = 1/(1 + e^{-2c}) and P(tilted = -2) = 1/(1 + e^{2c}).
  DiscreteFamily big;
  big.comps.resize(1);
  big.comps[0].atoms = {{2.0, 0.5}, {-2.0, 0.5}};
  for (double c : {0.5, 1.0, 3.0}) {
    const TiltedDistribution td = tilt(big, c);
    CHECK(td.tilted.comps[0].atoms[0].prob ==
          doctest::Approx(1.0 / (1.0 + std::exp(-2.0 * c))).epsilon(1e-12));
    CHECK(td.tilted.comps[0].atoms[1].prob ==
          doctest::Approx(1.0 / (1.0 + std::exp(2.0 * c))).epsilon(1e-12));
  }
  CHECK_THROWS_AS(tilt(fam, -0.1), validation_error);
}

TEST_CASE("tilt preserves independence (joint factorization)") {
  DiscreteFamily fam;
  fam.comps.resize(2);
  fam.comps[0].atoms = {{0.8, 0.3}, {-0.4, 0.7}};
  fam.comps[1].atoms = {{1.6, 0.25}, {-0.2, 0.75}};
  const double c = 0.7;
  const TiltedDistribution td = tilt(fam, c);
  // E f(tilted) = E f(xi) e^{c Wbar} / E e^{c Wbar} for joint-atom
  // indicators: enumerate both sides exactly.
  double z_joint = 0.0;
  for (const auto& a0 : fam.comps[0].atoms) {
    for (const auto& a1 : fam.comps[1].atoms) {
      const double w = (a0.value <= 1.0 ? a0.value : 0.0) +
                       (a1.value <= 1.0 ? a1.value : 0.0);
      z_joint += a0.prob * a1.prob * std::exp(c * w);
    }
  }
  CHECK(z_joint == doctest::Approx(td.joint_normalizer).epsilon(1e-12));
  for (size_t i = 0; i < 2; ++i) {
    for (size_t j = 0; j < 2; ++j) {
      const auto& a0 = fam.comps[0].atoms[i];
      const auto& a1 = fam.comps[1].atoms[j];
      const double w = (a0.value <= 1.0 ? a0.value : 0.0) +
                       (a1.value <= 1.0 ? a1.value : 0.0);
      const double rhs = a0.prob * a1.prob * std::exp(c * w) / z_joint;
      const double lhs = td.tilted.comps[0].atoms[i].prob *
                         td.tilted.comps[1].atoms[j].prob;
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("max-of-sum inequality: frozen Rademacher cases") {
  VectorFamily fam;
  fam.dim = 1;
  fam.comps.resize(2);
  for (auto& c : fam.comps) {
    c.points = {{1.0}, {-1.0}};
    c.probs = {0.5, 0.5};
  }
  const MaxSumCheck a = max_sum_check(fam, 0.5);
  CHECK(a.exact);
  CHECK(a.lhs == doctest::Approx(0.5));
  CHECK(a.mid == doctest::Approx(0.5));
  CHECK(a.rhs == doctest::Approx(1.0 / 3.0));
  CHECK(a.holds);

  const MaxSumCheck b = max_sum_check(fam, 1.5);
  CHECK(b.lhs == doctest::Approx(0.5));
  CHECK(b.mid == doctest::Approx(0.0));
  CHECK(b.rhs == doctest::Approx(0.0));
  CHECK(b.holds);

  VectorFamily one;
  one.dim = 1;
  one.comps.resize(1);
  one.comps[0].points = {{2.0}, {-2.0}};
  one.comps[0].probs = {0.5, 0.5};
  const MaxSumCheck c = max_sum_check(one, 1.0);
  CHECK(c.lhs == doctest::Approx(1.0));
  CHECK(c.holds);

  VectorFamily asym;
  asym.dim = 1;
  asym.comps.resize(1);
  asym.comps[0].points = {{1.0}, {-2.0}};
  asym.comps[0].probs = {0.5, 0.5};
  CHECK_THROWS_AS(max_sum_check(asym, 1.0), validation_error);
}

TEST_CASE("max-of-sum inequality: vector atoms and MC fallback") {
  VectorFamily fam;
  fam.dim = 2;
  fam.comps.resize(3);
  for (auto& c : fam.comps) {
    c.points = {{1.0, 0.5}, {-1.0, -0.5}, {0.0, 0.0}};
    c.probs = {0.3, 0.3, 0.4};
  }
  const MaxSumCheck ex = max_sum_check(fam, 1.0);
  CHECK(ex.exact);
  CHECK(ex.holds);
  // Force the Monte Carlo fallback and compare loosely.
  const MaxSumCheck mc = max_sum_check(fam, 1.0, 2, 200000, 9);
  CHECK_FALSE(mc.exact);
  CHECK(mc.holds);
  CHECK(std::fabs(mc.lhs - ex.lhs) < 0.01);
}

TEST_CASE("sum tail bound: frozen x and Lambda1") {
  BoundInputs in;
  in.norm_L = 1.0;
  in.sigma = 1.0;
  in.M = 2.0;
  in.epsilon = 1.0;
  in.D = 1.0;
  in.p = 3.0;
  in.profile = MomentProfile::iid_custom(
      1,
      [](double alpha) -> MomentValue {
        return {std::pow(0.1, alpha), true, {}};  // s_2 = 0.1
      },
      [](double) { return 0.0; },
      [](const std::function<double(double)>&) -> double { return 0.0; },
      {2.0, 3.0});
  const SumTailBound st = sum_tail_bound(in, 3.0);
  CHECK(st.x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(st.Lambda1 == doctest::Approx(0.36 * M_E).epsilon(1e-9));
  CHECK(st.bound ==
        doctest::Approx(std::pow(0.36 * M_E / 3.0, 3.0)).epsilon(1e-9));
  CHECK_THROWS_AS(sum_tail_bound(in, 4.0), range_violation);
}

TEST_CASE("rosenthal envelope") {
  const auto profile = MomentProfile::iid_custom(
      1,
      [](double alpha) -> MomentValue {
        // s_p = 1 at p = 3, s_2 = 2.
        if (alpha == 3.0) return {1.0, true, {}};
        return {std::pow(2.0, alpha), true, {}};
      },
      [](double) { return 0.0; },
      [](const std::function<double(double)>&) -> double { return 0.0; },
      {2.0, 3.0});
  CHECK(rosenthal_envelope(profile, 3.0, 1.0, 1.0) == doctest::Approx(3.0));
  const auto zero = MomentProfile::iid_custom(
      1, [](double) -> MomentValue { return {0.0, true, {}}; },
      [](double) { return 0.0; },
      [](const std::function<double(double)>&) -> double { return 0.0; },
      {2.0, 3.0});
  CHECK(rosenthal_envelope(zero, 3.0, 1.0, 1.0) == doctest::Approx(0.0));
  // Tail companion never undercuts the exact gaussian probability when the
  // user constant is >= 1: S ~ N(0, 1/n) for V standard gaussian, eps grid.
  const long n = 100;
  const auto prof =
      moment_profile(DistributionSpec::gaussian_1d(0.0, 1.0), {2.0, 3.0}, n);
  for (double eps : {0.2, 0.3, 0.5}) {
    const double exact =
        2.0 * 0.5 *
        std::erfc(eps * std::sqrt(static_cast<double>(n)) / std::sqrt(2.0));
    CHECK(rosenthal_tail_envelope(prof, 3.0, 1.0, 1.0, eps) >= exact - 1e-12);
  }
}

TEST_CASE("verification suite passes with reduced counts") {
  VerifyOptions opts;
  opts.hoeffding_families = 25;
  opts.max_ineq_families = 100;
  opts.tilt_families = 40;
  const auto results = run_verification_suite(opts);
  for (const auto& r : results) {
    INFO(r.name, ": ", r.detail);
    CHECK(r.pass);
  }
}
