#include "nlbe/concentration.hpp"

#include <algorithm>
#include <cmath>

namespace nlbe {

double hoeffding_tail(double z, double t,
                      const std::function<double(double)>& tail_G) {
  if (!(t > 0.0)) throw validation_error("hoeffding_tail: t must be positive");
  if (z < 0.0) throw validation_error("hoeffding_tail: z must be >= 0");
  return tail_G(t) + std::pow(M_E / (1.0 + z * t), z / t);
}

long DiscreteFamily::joint_size() const {
  long n = 1;
  for (const auto& c : comps) {
    n *= static_cast<long>(c.atoms.size());
    if (n > (1L << 60) / 2) return n;  // saturated; callers only compare
  }
  return n;
}

double DiscreteFamily::component_mean(size_t i) const {
  double s = 0.0;
  for (const auto& a : comps[i].atoms) s += a.prob * a.value;
  return s;
}

double DiscreteFamily::component_abs_moment(size_t i, double p) const {
  double s = 0.0;
  for (const auto& a : comps[i].atoms) {
    s += a.prob * std::pow(std::fabs(a.value), p);
  }
  return s;
}

double DiscreteFamily::sum_mean() const {
  double s = 0.0;
  for (size_t i = 0; i < comps.size(); ++i) s += component_mean(i);
  return s;
}

double DiscreteFamily::sum_second_moment() const {
  double s = 0.0;
  for (size_t i = 0; i < comps.size(); ++i) s += component_abs_moment(i, 2.0);
  return s;
}

double DiscreteFamily::prob_sum_at_least(double z) const {
  double total = 0.0;
  const std::function<void(size_t, double, double)> walk =
      [&](size_t depth, double sum, double prob) {
        if (depth == comps.size()) {
          if (sum >= z) total += prob;
          return;
        }
        for (const auto& a : comps[depth].atoms) {
          walk(depth + 1, sum + a.value, prob * a.prob);
        }
      };
  walk(0, 0.0, 1.0);
  return total;
}

DiscreteFamily DiscreteFamily::standardized() const {
  DiscreteFamily out = *this;
  double total_var = 0.0;
  for (size_t i = 0; i < out.comps.size(); ++i) {
    const double m = component_mean(i);
    for (auto& a : out.comps[i].atoms) a.value -= m;
    double v = 0.0;
    for (const auto& a : out.comps[i].atoms) v += a.prob * a.value * a.value;
    total_var += v;
  }
  if (!(total_var > 0.0)) {
    throw validation_error("standardized: family has zero total variance");
  }
  const double s = 1.0 / std::sqrt(total_var);
  for (auto& c : out.comps) {
    for (auto& a : c.atoms) a.value *= s;
  }
  return out;
}

TiltedDistribution tilt(const DiscreteFamily& base, double c) {
  if (c < 0.0) throw validation_error("tilt: c must be nonnegative");
  TiltedDistribution out;
  out.base = base;
  out.tilted = base;
  out.c = c;
  out.component_normalizers.resize(base.comps.size());
  double joint = 1.0;
  for (size_t i = 0; i < base.comps.size(); ++i) {
    double zi = 0.0;
    for (const auto& a : base.comps[i].atoms) {
      const double truncated = a.value <= 1.0 ? a.value : 0.0;
      zi += a.prob * std::exp(c * truncated);
    }
    out.component_normalizers[i] = zi;
    joint *= zi;
    auto& atoms = out.tilted.comps[i].atoms;
    for (size_t j = 0; j < atoms.size(); ++j) {
      const double value = base.comps[i].atoms[j].value;
      const double truncated = value <= 1.0 ? value : 0.0;
      atoms[j].prob =
          base.comps[i].atoms[j].prob * std::exp(c * truncated) / zi;
    }
  }
  out.joint_normalizer = joint;
  return out;
}

long VectorFamily::joint_size() const {
  long n = 1;
  for (const auto& c : comps) {
    n *= static_cast<long>(c.points.size());
    if (n > (1L << 60) / 2) return n;
  }
  return n;
}

namespace {

double vec_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void require_symmetric(const VectorFamily& fam) {
  for (const auto& c : fam.comps) {
    for (size_t i = 0; i < c.points.size(); ++i) {
      // Find the negated point with matching probability.
      bool found = false;
      for (size_t j = 0; j < c.points.size(); ++j) {
        bool neg = true;
        for (size_t d = 0; d < c.points[i].size(); ++d) {
          if (std::fabs(c.points[i][d] + c.points[j][d]) > 1e-12) {
            neg = false;
            break;
          }
        }
        if (neg && std::fabs(c.probs[i] - c.probs[j]) <= 1e-12) {
          found = true;
          break;
        }
      }
      if (!found) {
        throw validation_error("max_sum_check: component is not symmetric");
      }
    }
  }
}

}  // namespace

MaxSumCheck max_sum_check(const VectorFamily& family, double x,
                          long enumeration_limit, long mc_draws,
                          std::uint64_t seed) {
  require_symmetric(family);
  MaxSumCheck out;
  double sum_p = 0.0;
  for (const auto& c : family.comps) {
    double p = 0.0;
    for (size_t i = 0; i < c.points.size(); ++i) {
      if (vec_norm(c.points[i]) > x) p += c.probs[i];
    }
    sum_p += p;
  }
  out.rhs = 0.5 * sum_p / (1.0 + sum_p);

  const int dim = family.dim;
  const size_t n = family.comps.size();
  if (family.joint_size() <= enumeration_limit) {
    out.exact = true;
    double p_sum = 0.0, p_max = 0.0;
    std::vector<double> acc(static_cast<size_t>(dim), 0.0);
    const std::function<void(size_t, double, double)> walk =
        [&](size_t depth, double prob, double max_norm) {
          if (depth == n) {
            if (vec_norm(acc) > x) p_sum += prob;
            if (max_norm > x) p_max += prob;
            return;
          }
          const auto& c = family.comps[depth];
          for (size_t i = 0; i < c.points.size(); ++i) {
            for (int d = 0; d < dim; ++d) {
              acc[static_cast<size_t>(d)] += c.points[i][static_cast<size_t>(d)];
            }
            walk(depth + 1, prob * c.probs[i],
                 std::max(max_norm, vec_norm(c.points[i])));
            for (int d = 0; d < dim; ++d) {
              acc[static_cast<size_t>(d)] -= c.points[i][static_cast<size_t>(d)];
            }
          }
        };
    walk(0, 1.0, 0.0);
    out.lhs = p_sum;
    out.mid = 0.5 * p_max;
  } else {
    out.exact = false;
    Rng root(seed);
    long c_sum = 0, c_max = 0;
    std::vector<double> s(static_cast<size_t>(dim));
    for (long r = 0; r < mc_draws; ++r) {
      Rng rng = root.stream(static_cast<std::uint64_t>(r));
      std::fill(s.begin(), s.end(), 0.0);
      double mx = 0.0;
      for (const auto& c : family.comps) {
        const double u = rng.u01();
        double acc = 0.0;
        size_t pick = c.points.size() - 1;
        for (size_t i = 0; i < c.probs.size(); ++i) {
          acc += c.probs[i];
          if (u <= acc) { pick = i; break; }
        }
        for (int d = 0; d < dim; ++d) {
          s[static_cast<size_t>(d)] += c.points[pick][static_cast<size_t>(d)];
        }
        mx = std::max(mx, vec_norm(c.points[pick]));
      }
      if (vec_norm(s) > x) ++c_sum;
      if (mx > x) ++c_max;
    }
    out.lhs = static_cast<double>(c_sum) / static_cast<double>(mc_draws);
    out.mid = 0.5 * static_cast<double>(c_max) / static_cast<double>(mc_draws);
  }
  const double slack = out.exact ? 1e-12 : 3.0 / std::sqrt(static_cast<double>(mc_draws));
  out.holds = out.lhs >= out.mid - slack && out.mid >= out.rhs - slack;
  return out;
}

SumTailBound sum_tail_bound(const BoundInputs& in, double z) {
  in.validate();
  const double az = std::fabs(z);
  const double z_hi = 3.0 * in.C1() * in.epsilon * in.epsilon / in.sigma;
  if (az < 1.0 || az > z_hi) {
    throw range_violation("sum_tail_bound: z outside the non-uniform range");
  }
  SumTailBound out;
  out.x = std::sqrt(in.sigma * az / (3.0 * in.C1()));
  const double s2 = in.profile.s(2.0).require_finite("s_2");
  out.Lambda1 = 12.0 * M_E * in.p * in.C1() * in.D * in.D * s2 * s2 / in.sigma;
  out.bound = in.profile.tail_sum(out.x / (2.0 * in.p)) +
              std::pow(out.Lambda1 / az, in.p);
  return out;
}

double rosenthal_envelope(const MomentProfile& profile, double p, double D,
                          double user_constant) {
  const double sp = profile.s(p).require_finite("s_p");
  const double s2 = profile.s(2.0).require_finite("s_2");
  return user_constant * (sp + D * s2);
}

double rosenthal_tail_envelope(const MomentProfile& profile, double p,
                               double D, double user_constant, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw validation_error("rosenthal_tail_envelope: epsilon must be positive");
  }
  const double sp = profile.s(p).require_finite("s_p");
  const double s2 = profile.s(2.0).require_finite("s_2");
  return user_constant * (std::pow(sp, p) + std::pow(D * s2, p)) /
         std::pow(epsilon, p);
}

}  // namespace nlbe
