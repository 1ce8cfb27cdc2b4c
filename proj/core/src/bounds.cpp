#include "nlbe/bounds.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nlbe {

using nlohmann::json;

namespace {

constexpr const char* kCaveat =
    "terms are reported modulo the unspecified absolute constant A(p)";

void push(BoundReport& r, std::string label, double value, std::string tag) {
  if (value < 0.0 && value > -1e-15) value = 0.0;
  if (value < 0.0) throw std::logic_error("bound term went negative: " + label);
  r.terms.push_back({std::move(label), value, std::move(tag)});
  r.total_modulo_constant += value;
}

}  // namespace

long ScalarFamily::size() const {
  long n = 0;
  for (const auto& [spec, cnt] : groups) n += cnt;
  return n;
}

double ScalarFamily::sum_mean() const {
  double s = 0.0;
  for (const auto& [spec, cnt] : groups) {
    s += static_cast<double>(cnt) * spec.mean_value();
  }
  return s;
}

double ScalarFamily::sum_second_moment() const {
  double s = 0.0;
  for (const auto& [spec, cnt] : groups) {
    s += static_cast<double>(cnt) * spec.second_moment();
  }
  return s;
}

double ScalarFamily::sigma_alpha(double alpha) const {
  double s = 0.0;
  for (const auto& [spec, cnt] : groups) {
    s += static_cast<double>(cnt) *
         spec.norm_moment(alpha).require_finite("sigma_alpha");
  }
  return std::pow(s, 1.0 / alpha);
}

double ScalarFamily::tail(double z) const {
  double s = 0.0;
  for (const auto& [spec, cnt] : groups) {
    s += static_cast<double>(cnt) * spec.norm_tail(z);
  }
  return s;
}

LinearizationScalars linearization_scalars(const ScalarFamily& family,
                                           const std::vector<double>& alphas) {
  if (std::fabs(family.sum_mean()) > 1e-8) {
    throw validation_error("linearization_scalars: family is not centered");
  }
  if (std::fabs(family.sum_second_moment() - 1.0) > 1e-8) {
    throw validation_error(
        "linearization_scalars: family variance must total 1");
  }
  // h(delta) = sum_i E |xi_i| (delta ^ |xi_i|) is nondecreasing with limit
  // sum E xi_i^2 = 1 >= 1/2, so the 1/2 level is always reached.
  const auto h = [&](double delta) {
    double s = 0.0;
    for (const auto& [spec, cnt] : family.groups) {
      s += static_cast<double>(cnt) *
           spec.expect_norm([delta](double a) { return a * std::min(delta, a); });
    }
    return s;
  };
  double lo = 0.0, hi = 1.0;
  while (h(hi) < 0.5) {
    hi *= 2.0;
    if (hi > 1e12) throw std::logic_error("delta bisection failed to bracket");
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) >= 0.5) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  LinearizationScalars out;
  out.delta = hi;
  double beta = 0.0;
  for (const auto& [spec, cnt] : family.groups) {
    beta += static_cast<double>(cnt) * spec.expect_norm([](double a) {
      return std::min(a * a, a * a * a);
    });
  }
  out.beta = beta;
  for (double a : alphas) out.sigma_alpha[a] = family.sigma_alpha(a);
  return out;
}

void BoundInputs::validate() const {
  if (!(norm_L > 0.0)) throw validation_error("BoundInputs: ||L|| must be > 0");
  if (!(sigma > 0.0)) {
    throw degeneracy_error("BoundInputs: sigma = 0 (degenerate linearization)");
  }
  if (!(M > 0.0)) throw validation_error("BoundInputs: M must be > 0");
  if (!(epsilon > 0.0)) throw validation_error("BoundInputs: epsilon must be > 0");
  if (!(D >= 1.0)) throw validation_error("BoundInputs: D must be >= 1");
}

MomentValue lambda_alpha(const BoundInputs& in, double alpha) {
  in.validate();
  MomentValue s = in.profile.s(alpha);
  if (!s.finite) return s;
  s.value *= in.norm_L / in.sigma;
  if (s.std_error) *s.std_error *= in.norm_L / in.sigma;
  return s;
}

std::pair<double, double> compute_uv(const BoundInputs& in) {
  if (!(in.p > 2.0)) throw validation_error("compute_uv: p must exceed 2");
  const double lam2 = lambda_alpha(in, 2.0).require_finite("lambda_2");
  const double lam_p = lambda_alpha(in, in.p).require_finite("lambda_p");
  double u, v;
  if (in.p >= 3.0) {
    const double lam_2q =
        lambda_alpha(in, 2.0 * in.q()).require_finite("lambda_2q");
    u = lam_2q;
    v = in.D * lam2;
  } else {
    u = std::pow(lam_p, 0.5 * (in.p - 1.0));
    v = in.D * lam2 + std::pow(lam_p, in.p);
  }
  return {u, v};
}

std::pair<double, double> gamma_terms(const BoundInputs& in) {
  const auto [u, v] = compute_uv(in);
  const double lam_p = lambda_alpha(in, in.p).require_finite("lambda_p");
  const double lam_q = lambda_alpha(in, in.q()).require_finite("lambda_q");
  const double front = in.C1() * in.sigma / (in.norm_L * in.norm_L);
  const double gamma =
      front * ((u * u + v * v) * (1.0 + lam_p) + lam_p * lam_q * v);
  const double gamma1 =
      gamma + std::pow(lam_p, in.q_tilde()) * (1.0 + lam_p);
  return {gamma, gamma1};
}

BoundReport uniform_fS_bound(const BoundInputs& in,
                             std::optional<double> prob_S_exceeds_eps,
                             std::optional<double> tail_at_sigma_over_L) {
  in.validate();
  if (prob_S_exceeds_eps &&
      (*prob_S_exceeds_eps < 0.0 || *prob_S_exceeds_eps > 1.0)) {
    throw validation_error("uniform_fS_bound: probability outside [0,1]");
  }
  BoundReport r;
  r.constant_caveat = kCaveat;
  if (prob_S_exceeds_eps) {
    push(r, "P(||S||>eps)", *prob_S_exceeds_eps, "uniform-remainder");
  } else {
    const double s2 = in.profile.s(2.0).require_finite("s_2");
    push(r, "P(||S||>eps) chebyshev",
         in.D * in.D * s2 * s2 / (in.epsilon * in.epsilon),
         "chebyshev-fallback");
  }
  const double pw3 = std::min(in.p, 3.0);
  const double lam =
      lambda_alpha(in, pw3).require_finite("lambda_{p^3}");
  push(r, "lambda_{p^3}^{p^3}", std::pow(lam, pw3), "moment-ratio");
  const double gx = tail_at_sigma_over_L
                        ? *tail_at_sigma_over_L
                        : in.profile.tail_sum(in.sigma / in.norm_L);
  push(r, "G_X(sigma/||L||)", gx, "truncation-tail");
  const auto [gamma, gamma1] = gamma_terms(in);
  (void)gamma1;
  push(r, "Gamma", gamma, "gamma");
  return r;
}

BoundReport nonuniform_fS_bound(const BoundInputs& in, double z) {
  in.validate();
  if (!(in.p > 2.0)) throw validation_error("nonuniform_fS_bound: p must exceed 2");
  const double az = std::fabs(z);
  const double z_hi = 3.0 * in.C1() * in.epsilon * in.epsilon / in.sigma;
  if (az < 1.0 || az > z_hi) {
    std::ostringstream os;
    os << "nonuniform_fS_bound: |z| = " << az << " outside [1, " << z_hi << "]";
    throw range_violation(os.str());
  }
  BoundReport r;
  r.constant_caveat = kCaveat;
  r.z = z;
  r.valid_z_range = {1.0, z_hi};
  push(r, "G_X(sigma|z|/(6 p C1 eps))",
       in.profile.tail_sum(in.sigma * az / (6.0 * in.p * in.C1() * in.epsilon)),
       "summand-tail");
  const double s2 = in.profile.s(2.0).require_finite("s_2");
  const double lead = in.D * in.D * in.C1() * s2 * s2 / in.sigma;
  push(r, "(D^2 C1 s_2^2/sigma)^p/|z|^p", std::pow(lead / az, in.p),
       "polynomial-decay");
  const double gate_tail =
      in.profile.tail_sum(2.0 * in.sigma * az / (3.0 * in.p * in.norm_L));
  const bool gate_open = std::pow(az, in.p) * gate_tail < 1.0;
  if (gate_open) {
    push(r, "G_X(sigma/||L||)/|z|^p",
         in.profile.tail_sum(in.sigma / in.norm_L) / std::pow(az, in.p),
         "gated-tail");
    const auto [gamma, gamma1] = gamma_terms(in);
    (void)gamma;
    push(r, "Gamma_1 exp(-|z|/3)", gamma1 * std::exp(-az / 3.0),
         "gated-exponential");
  }
  return r;
}

long XiEtaFamily::size() const {
  long n = 0;
  for (const auto& [atoms, cnt] : groups) n += cnt;
  return n;
}

double XiEtaFamily::G_xi(double z) const {
  double s = 0.0;
  for (const auto& [atoms, cnt] : groups) {
    double p = 0.0;
    for (const auto& a : atoms) {
      if (std::fabs(a.xi) > z) p += a.prob;
    }
    s += static_cast<double>(cnt) * p;
  }
  return s;
}

double XiEtaFamily::G_eta(double z) const {
  double s = 0.0;
  for (const auto& [atoms, cnt] : groups) {
    double p = 0.0;
    for (const auto& a : atoms) {
      if (std::fabs(a.eta) > z) p += a.prob;
    }
    s += static_cast<double>(cnt) * p;
  }
  return s;
}

double XiEtaFamily::sigma_alpha(double alpha) const {
  double s = 0.0;
  for (const auto& [atoms, cnt] : groups) {
    double m = 0.0;
    for (const auto& a : atoms) m += a.prob * std::pow(std::fabs(a.xi), alpha);
    s += static_cast<double>(cnt) * m;
  }
  return std::pow(s, 1.0 / alpha);
}

XiEtaFamily XiEtaFamily::from_scalar(const ScalarFamily& fam) {
  XiEtaFamily out;
  for (const auto& [spec, cnt] : fam.groups) {
    if (!spec.has_atoms()) {
      throw validation_error("XiEtaFamily: components must be discrete");
    }
    std::vector<XiEtaAtom> atoms;
    const auto& pts = spec.atom_points();
    const auto& probs = spec.atom_probs();
    for (size_t i = 0; i < pts.size(); ++i) {
      atoms.push_back({pts[i][0], pts[i][0], probs[i]});
    }
    out.groups.emplace_back(std::move(atoms), cnt);
  }
  return out;
}

namespace {

double min_sq_cube(double a) {
  const double a2 = a * a;
  return std::min(a2, a2 * std::fabs(a));
}

}  // namespace

LinearBEBound linear_BE_bound(const XiEtaFamily& family, double z, double p) {
  if (!(p >= 2.0)) throw validation_error("linear_BE_bound: p must be >= 2");
  for (const auto& [atoms, cnt] : family.groups) {
    for (const auto& a : atoms) {
      if (std::fabs(a.xi) > std::fabs(a.eta) + 1e-12) {
        throw validation_error("linear_BE_bound: |xi| <= |eta| violated");
      }
    }
  }
  const double az = std::fabs(z);
  LinearBEBound out;
  double b1 = 0.0;
  for (const auto& [atoms, cnt] : family.groups) {
    double m = 0.0;
    for (const auto& a : atoms) {
      m += a.prob * min_sq_cube(std::fabs(a.xi) / (az + 1.0));
    }
    b1 += static_cast<double>(cnt) * m;
  }
  out.B1 = b1;
  const double arg = (az + 1.0) / (0.5 * p + 1.0);
  const double g_eta = family.G_eta(arg);
  double b2 = g_eta;
  if (std::pow(az + 1.0, p) * g_eta < 1.0) {
    const double s3 = family.sigma_alpha(3.0);
    b2 += family.G_xi(1.0) / std::pow(az + 1.0, p) +
          s3 * s3 * s3 * std::exp(-az / 2.0);
  }
  out.B2 = b2;
  out.B = std::min(out.B1, out.B2);
  return out;
}

LinearBEBound linear_BE_bound(const BoundInputs& in, double z) {
  in.validate();
  const double az = std::fabs(z);
  LinearBEBound out;
  const double c = in.norm_L / (in.sigma * (az + 1.0));
  out.B1 = in.profile.sum_expect_min_sq_cube(c);
  const double arg = in.sigma * (az + 1.0) / (in.norm_L * (0.5 * in.p + 1.0));
  const double g_eta = in.profile.tail_sum(arg);
  double b2 = g_eta;
  if (std::pow(az + 1.0, in.p) * g_eta < 1.0) {
    const double lam3 = lambda_alpha(in, 3.0).require_finite("lambda_3");
    b2 += in.profile.tail_sum(in.sigma / in.norm_L) / std::pow(az + 1.0, in.p) +
          lam3 * lam3 * lam3 * std::exp(-az / 2.0);
  }
  out.B2 = b2;
  out.B = std::min(out.B1, out.B2);
  return out;
}

IidP3Terms iid_p3_constants(double C1, double epsilon, double norm_L,
                            double sigma1, double V2, double V3, long n) {
  if (!(sigma1 > 0.0)) {
    throw degeneracy_error("iid_p3_constants: sigma1 = 0");
  }
  IidP3Terms t;
  const double s13 = sigma1 * sigma1 * sigma1;
  t.A1 = (std::pow(C1 * epsilon * V3, 3.0) +
          std::pow(C1, 3.0) * std::pow(V2, 6.0) / static_cast<double>(n)) /
         s13;
  t.A2 = (C1 * V3 * V3 / sigma1 + std::pow(norm_L * V3, 3.0) / s13) *
         (1.0 + norm_L * V3 / sigma1);
  return t;
}

BoundReport suboptimal_exp_bound(long n, double p, const SuboptimalNorms& norms,
                                 double M, double epsilon, double be_constant,
                                 double D) {
  if (!(p > 2.0)) throw validation_error("suboptimal_exp_bound: p must exceed 2");
  if (n < 3) throw validation_error("suboptimal_exp_bound: n must be >= 3");
  if (!(norms.sigma1 > 0.0)) {
    throw degeneracy_error("suboptimal_exp_bound: sigma1 = 0");
  }
  const double nn = static_cast<double>(n);
  const double ln_n = std::log(nn);
  double x, y;
  if (p >= 3.0) {
    x = 2.0 * M_E * norms.V2 * std::sqrt(nn * ln_n);
    y = M_E * norms.V2 * std::sqrt(nn / ln_n);
  } else {
    x = 2.0 * M_E * norms.V2 * std::pow(nn, (5.0 - p) / 4.0);
    y = M_E * norms.V2 * std::sqrt(nn);
  }
  BoundReport r;
  r.constant_caveat = kCaveat;
  // The truncated-mean check E||S_y|| <= x/2; when it fails the chain is
  // vacuous and the trivial bound 1 is reported.
  const double mean_bound =
      2.0 * D * std::sqrt(nn) * norms.V2 + nn * norms.V2 * norms.V2 / y;
  if (mean_bound > 0.5 * x) {
    push(r, "trivial (E||S_y|| > x/2 check failed)", 1.0, "trivial");
    return r;
  }
  const double pw3 = std::min(p, 3.0);
  // delta chosen so that x = sqrt(2 sigma1 / M) n^{3/4} delta^{1/2}.
  const double delta = M * x * x / (2.0 * norms.sigma1 * std::pow(nn, 1.5));
  push(r, "normal shift delta/sqrt(2pi)", delta / std::sqrt(2.0 * M_PI),
       "normal-shift");
  push(r, "linear BE",
       be_constant * std::pow(norms.LVp3, pw3) /
           (std::pow(nn, 0.5 * (pw3 - 2.0)) * std::pow(norms.sigma1, pw3)),
       "linear-be");
  push(r, "chebyshev ||Vbar||>eps", norms.V2 * norms.V2 / (nn * epsilon * epsilon),
       "chebyshev");
  push(r, "truncation n||V||_p^p/y^p", std::pow(norms.Vp, p) * nn / std::pow(y, p),
       "truncation");
  push(r, "exponential (2 e n ||V||_2^2/(x y))^{x/(2y)}",
       std::pow(2.0 * M_E * nn * norms.V2 * norms.V2 / (x * y), x / (2.0 * y)),
       "exponential");
  return r;
}

BoundInputs scale_inputs(const BoundInputs& in, double c, double d) {
  if (!(c > 0.0)) throw validation_error("scale_inputs: c must be positive");
  BoundInputs out = in;
  out.norm_L = in.norm_L * std::pow(c, d - 1.0);
  out.sigma = in.sigma * std::pow(c, d);
  out.epsilon = in.epsilon * c;
  out.M = in.M * std::pow(c, d - 2.0);
  out.profile = in.profile.scaled(c);
  return out;
}

BoundReport nonlinear_vs_linear_ub(double delta, double beta,
                                   double E_W_barDelta, double sum_E_xi_dd,
                                   double P_max_eta_gt_1,
                                   UniformVariant variant) {
  BoundReport r;
  r.constant_caveat = "absolute constants as stated; no suppressed factor";
  switch (variant) {
    case UniformVariant::DeltaForm:
      push(r, "4 delta", 4.0 * delta, "delta-form");
      break;
    case UniformVariant::BetaForm:
      push(r, "2 beta", 2.0 * beta, "beta-form");
      break;
    case UniformVariant::BetaVsNormal:
      push(r, "6.1 beta", 6.1 * beta, "beta-vs-normal");
      break;
  }
  push(r, "E|W barDelta|", E_W_barDelta, "coupling");
  push(r, "sum E|xi_i (barDelta - Delta_i)|", sum_E_xi_dd, "leave-one-out");
  push(r, "P(max|eta_i|>1)", P_max_eta_gt_1, "truncation-event");
  return r;
}

double chen_shao_tau(double barDelta_q, double delta, double sigma_p,
                     double sum_xi_p_dd_q) {
  return (barDelta_q + delta) * (1.0 + sigma_p) + sum_xi_p_dd_q;
}

BoundReport nonlinear_vs_linear_nub(double gamma_z, double tau, double z) {
  BoundReport r;
  r.constant_caveat = kCaveat;
  r.z = z;
  push(r, "gamma_z", gamma_z, "gamma-z");
  push(r, "tau exp(-|z|/3)", tau * std::exp(-std::fabs(z) / 3.0),
       "tau-exponential");
  return r;
}

json BoundReport::to_json() const {
  json j;
  json terms_j = json::array();
  for (const auto& t : terms) {
    terms_j.push_back(
        {{"label", t.label}, {"value", t.value}, {"equation_tag", t.equation_tag}});
  }
  j["terms"] = terms_j;
  j["total_modulo_constant"] = total_modulo_constant;
  j["user_constant"] = user_constant;
  j["scaled_total"] = scaled_total();
  if (z) j["z"] = *z;
  if (valid_z_range) {
    j["valid_z_range"] = {valid_z_range->first, valid_z_range->second};
  }
  j["constant_caveat"] = constant_caveat;
  return j;
}

std::string BoundReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "label,value,equation_tag\n";
  for (const auto& t : terms) {
    os << '"' << t.label << "\"," << t.value << ',' << t.equation_tag << '\n';
  }
  os << "\"total_modulo_constant\"," << total_modulo_constant << ",\n";
  return os.str();
}

}  // namespace nlbe
