#include "nlbe/verify.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "nlbe/bounds.hpp"
#include "nlbe/concentration.hpp"
#include "nlbe/distribution.hpp"
#include "nlbe/rng.hpp"

namespace nlbe {

namespace {

DiscreteFamily random_family(Rng& rng, int max_comps = 8, int max_atoms = 4) {
  DiscreteFamily fam;
  const int n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_comps - 1)));
  fam.comps.resize(static_cast<size_t>(n));
  for (auto& comp : fam.comps) {
    const int k = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_atoms - 1)));
    double total = 0.0;
    comp.atoms.resize(static_cast<size_t>(k));
    for (auto& a : comp.atoms) {
      a.value = 4.0 * rng.u01() - 2.0;
      a.prob = 0.05 + rng.u01();
      total += a.prob;
    }
    for (auto& a : comp.atoms) a.prob /= total;
  }
  return fam.standardized();
}

VectorFamily random_symmetric_family(Rng& rng, int max_comps = 8) {
  VectorFamily fam;
  fam.dim = 1;
  const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_comps)));
  fam.comps.resize(static_cast<size_t>(n));
  for (auto& comp : fam.comps) {
    const int pairs = 1 + static_cast<int>(rng.below(2));
    const bool with_zero = rng.u01() < 0.4;
    double total = 0.0;
    std::vector<double> mags, probs;
    for (int i = 0; i < pairs; ++i) {
      mags.push_back(0.1 + 2.5 * rng.u01());
      probs.push_back(0.05 + rng.u01());
      total += 2.0 * probs.back();
    }
    double zero_p = 0.0;
    if (with_zero) {
      zero_p = 0.05 + rng.u01();
      total += zero_p;
    }
    for (int i = 0; i < pairs; ++i) {
      comp.points.push_back({mags[static_cast<size_t>(i)]});
      comp.probs.push_back(probs[static_cast<size_t>(i)] / total);
      comp.points.push_back({-mags[static_cast<size_t>(i)]});
      comp.probs.push_back(probs[static_cast<size_t>(i)] / total);
    }
    if (with_zero) {
      comp.points.push_back({0.0});
      comp.probs.push_back(zero_p / total);
    }
  }
  return fam;
}

CheckResult hoeffding_check(std::uint64_t seed, int families) {
  CheckResult out{"hoeffding-tail-vs-enumeration", true, ""};
  Rng root(seed);
  long violations = 0, cases = 0;
  const double z_grid[] = {0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
  const double t_grid[] = {0.25, 0.5, 1.0, 2.0};
  for (int f = 0; f < families; ++f) {
    Rng rng = root.stream(static_cast<std::uint64_t>(f));
    const DiscreteFamily fam = random_family(rng);
    const auto tail_G = [&fam](double t) {
      double s = 0.0;
      for (const auto& c : fam.comps) {
        for (const auto& a : c.atoms) {
          if (std::fabs(a.value) > t) s += a.prob;
        }
      }
      return s;
    };
    for (double z : z_grid) {
      const double exact = fam.prob_sum_at_least(z);
      for (double t : t_grid) {
        ++cases;
        if (exact > hoeffding_tail(z, t, tail_G) + 1e-12) ++violations;
      }
    }
  }
  std::ostringstream os;
  os << families << " families, " << cases << " (z,t) cases, " << violations
     << " violations";
  out.detail = os.str();
  out.pass = violations == 0;
  return out;
}

CheckResult max_inequality_check(std::uint64_t seed, int families) {
  CheckResult out{"symmetric-max-of-sum-inequality", true, ""};
  Rng root(seed);
  long violations = 0, cases = 0;
  for (int f = 0; f < families; ++f) {
    Rng rng = root.stream(static_cast<std::uint64_t>(f));
    const VectorFamily fam = random_symmetric_family(rng);
    for (double x : {0.05, 0.3, 0.8, 1.4, 2.2, 3.5}) {
      ++cases;
      const MaxSumCheck chk = max_sum_check(fam, x);
      if (!chk.holds) ++violations;
    }
  }
  std::ostringstream os;
  os << families << " fuzzed symmetric families, " << cases << " thresholds, "
     << violations << " violations";
  out.detail = os.str();
  out.pass = violations == 0;
  return out;
}

CheckResult tilt_check(std::uint64_t seed, int families) {
  CheckResult out{"tilt-identity-and-moment-bounds", true, ""};
  Rng root(seed);
  long bad = 0, cases = 0;
  for (int f = 0; f < families; ++f) {
    Rng rng = root.stream(static_cast<std::uint64_t>(f));
    const DiscreteFamily fam = random_family(rng, 5, 3);
    for (double c : {0.0, 0.3, 1.0, 2.0}) {
      const TiltedDistribution td = tilt(fam, c);
      // Identity per component atom: P(hat xi = a) * E e^{c xibar}
      //   = P(xi = a) * e^{c abar}, exactly.
      for (size_t i = 0; i < fam.comps.size(); ++i) {
        for (size_t j = 0; j < fam.comps[i].atoms.size(); ++j) {
          ++cases;
          const double value = fam.comps[i].atoms[j].value;
          const double truncated = value <= 1.0 ? value : 0.0;
          const double lhs = td.tilted.comps[i].atoms[j].prob *
                             td.component_normalizers[i];
          const double rhs =
              fam.comps[i].atoms[j].prob * std::exp(c * truncated);
          if (std::fabs(lhs - rhs) > 1e-12 * std::max(1.0, std::fabs(rhs))) {
            ++bad;
          }
        }
        // Moment bounds E|hat xi|^p <= e^{2c} E|xi|^p and
        // |E hat xi| <= c e^{2c} E xi^2.
        for (double pw : {2.0, 2.5, 3.0}) {
          ++cases;
          if (td.tilted.component_abs_moment(i, pw) >
              std::exp(2.0 * c) * fam.component_abs_moment(i, pw) + 1e-12) {
            ++bad;
          }
        }
        ++cases;
        if (std::fabs(td.tilted.component_mean(i)) >
            c * std::exp(2.0 * c) * fam.component_abs_moment(i, 2.0) + 1e-12) {
          ++bad;
        }
      }
      // Probabilities still sum to one.
      for (const auto& comp : td.tilted.comps) {
        double s = 0.0;
        for (const auto& a : comp.atoms) s += a.prob;
        ++cases;
        if (std::fabs(s - 1.0) > 1e-12) ++bad;
      }
    }
  }
  std::ostringstream os;
  os << families << " families x {0, 0.3, 1, 2} tilts, " << cases
     << " checks, " << bad << " failures";
  out.detail = os.str();
  out.pass = bad == 0;
  return out;
}

CheckResult chebyshev_check() {
  CheckResult out{"tail-sum-chebyshev-consistency", true, ""};
  long bad = 0, cases = 0;
  const std::vector<double> alphas = {1.5, 2.0, 3.0};
  std::vector<MomentProfile> profiles;
  profiles.push_back(moment_profile(
      DistributionSpec::gaussian_1d(0.0, 1.0), alphas, 50));
  profiles.push_back(moment_profile(
      DistributionSpec::standardized_exponential(1.0), alphas, 200));
  profiles.push_back(moment_profile(
      DistributionSpec::discrete_atoms_1d({-1.0, 1.0}, {0.5, 0.5}), alphas, 16));
  for (const auto& prof : profiles) {
    for (double z : {0.001, 0.005, 0.02, 0.1, 0.5}) {
      const double g = prof.tail_sum(z);
      for (double a : alphas) {
        ++cases;
        const double bound = std::pow(prof.s(a).value / z, a);
        if (g > bound * (1.0 + 1e-10) + 1e-12) ++bad;
      }
    }
  }
  std::ostringstream os;
  os << profiles.size() << " profiles, " << cases << " (z, alpha) checks, "
     << bad << " violations";
  out.detail = os.str();
  out.pass = bad == 0;
  return out;
}

CheckResult unit_freeness_check() {
  CheckResult out{"bound-term-unit-freeness", true, ""};
  long bad = 0, cases = 0;
  double worst = 0.0;
  for (double p : {2.5, 3.0}) {
    BoundInputs base;
    base.norm_L = 1.3;
    base.sigma = 0.9;
    base.M = 3.0;
    base.epsilon = 0.7;
    base.D = 1.0;
    base.p = p;
    base.profile = moment_profile(
        DistributionSpec::standardized_exponential(0.0),
        {1.5, 2.0, 2.5, 3.0, 10.0 / 3.0}, 50);
    const BoundReport uni0 = uniform_fS_bound(base);
    const BoundReport non0 = nonuniform_fS_bound(base, 2.0);
    for (double c : {0.5, 2.0, 10.0}) {
      for (double d : {-1.0, 0.0, 1.0}) {
        const BoundInputs scaled = scale_inputs(base, c, d);
        const BoundReport uni = uniform_fS_bound(scaled);
        const BoundReport non = nonuniform_fS_bound(scaled, 2.0);
        const auto compare = [&](const BoundReport& a, const BoundReport& b) {
          for (size_t i = 0; i < a.terms.size(); ++i) {
            ++cases;
            const double va = a.terms[i].value;
            const double vb = b.terms[i].value;
            const double rel =
                std::fabs(va - vb) / std::max({1e-300, std::fabs(va), std::fabs(vb)});
            if (va == 0.0 && vb == 0.0) continue;
            worst = std::max(worst, rel);
            if (rel > 1e-10) ++bad;
          }
        };
        compare(uni0, uni);
        compare(non0, non);
      }
    }
  }
  std::ostringstream os;
  os << cases << " term comparisons over c in {0.5,2,10}, d in {-1,0,1}; "
     << bad << " beyond 1e-10 (worst rel dev " << worst << ")";
  out.detail = os.str();
  out.pass = bad == 0;
  return out;
}

}  // namespace

std::vector<CheckResult> run_verification_suite(const VerifyOptions& opts) {
  std::vector<CheckResult> results;
  results.push_back(hoeffding_check(opts.seed, opts.hoeffding_families));
  results.push_back(max_inequality_check(opts.seed + 1, opts.max_ineq_families));
  results.push_back(tilt_check(opts.seed + 2, opts.tilt_families));
  results.push_back(chebyshev_check());
  results.push_back(unit_freeness_check());
  return results;
}

}  // namespace nlbe
