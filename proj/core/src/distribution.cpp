#include "nlbe/distribution.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nlbe/integrate.hpp"
#include "nlbe/normal.hpp"

namespace nlbe {

using nlohmann::json;

std::string to_string(DistKind k) {
  switch (k) {
    case DistKind::DiscreteAtoms: return "discrete-atoms";
    case DistKind::Gaussian: return "gaussian";
    case DistKind::StandardizedExponential: return "standardized-exponential";
    case DistKind::TwoPointBernoulliShift: return "two-point-bernoulli-shift";
    case DistKind::HeavyTailLogCorrected: return "heavy-tail-logcorrected";
    case DistKind::ProductOfMarginals: return "product-of-marginals";
    case DistKind::UserSampler: return "user-sampler";
  }
  return "?";
}

namespace {

double norm_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// P(chi^2_k > x).
double chi_square_sf(int k, double x) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * k, 0.5 * x);
}

}  // namespace

void DistributionSpec::build_atom_cdf() {
  if (atom_probs_.empty()) return;
  double sum = 0.0;
  for (double p : atom_probs_) {
    if (p < -1e-15) throw validation_error("atom probability is negative");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-12) {
    throw validation_error("atom probabilities must sum to 1 within 1e-12");
  }
  atom_cdf_.resize(atom_probs_.size());
  double c = 0.0;
  for (size_t i = 0; i < atom_probs_.size(); ++i) {
    c += atom_probs_[i];
    atom_cdf_[i] = c;
  }
  atom_cdf_.back() = 1.0;
}

DistributionSpec DistributionSpec::discrete_atoms(
    std::vector<std::vector<double>> points, std::vector<double> probs) {
  if (points.empty() || points.size() != probs.size()) {
    throw validation_error("discrete-atoms: values/probabilities mismatch");
  }
  DistributionSpec d;
  d.kind_ = DistKind::DiscreteAtoms;
  d.dim_ = static_cast<int>(points.front().size());
  for (const auto& pt : points) {
    if (static_cast<int>(pt.size()) != d.dim_) {
      throw validation_error("discrete-atoms: inconsistent point dimension");
    }
  }
  d.atom_points_ = std::move(points);
  d.atom_probs_ = std::move(probs);
  d.build_atom_cdf();
  return d;
}

DistributionSpec DistributionSpec::discrete_atoms_1d(
    const std::vector<double>& values, const std::vector<double>& probs) {
  std::vector<std::vector<double>> pts;
  pts.reserve(values.size());
  for (double v : values) pts.push_back({v});
  return discrete_atoms(std::move(pts), probs);
}

DistributionSpec DistributionSpec::gaussian(std::vector<double> mean,
                                            double sd) {
  if (mean.empty()) throw validation_error("gaussian: empty mean");
  if (!(sd > 0.0)) throw validation_error("gaussian: sd must be positive");
  DistributionSpec d;
  d.kind_ = DistKind::Gaussian;
  d.dim_ = static_cast<int>(mean.size());
  d.mean_ = std::move(mean);
  d.sd_ = sd;
  return d;
}

DistributionSpec DistributionSpec::gaussian_1d(double mean, double sd) {
  return gaussian(std::vector<double>{mean}, sd);
}

DistributionSpec DistributionSpec::standardized_exponential(double shift) {
  DistributionSpec d;
  d.kind_ = DistKind::StandardizedExponential;
  d.dim_ = 1;
  d.shift_ = shift;
  return d;
}

DistributionSpec DistributionSpec::two_point_bernoulli_shift(double p) {
  if (!(p > 0.0 && p < 1.0) || p == 0.5) {
    throw validation_error("two-point-bernoulli-shift: need p in (0,1), p != 1/2");
  }
  DistributionSpec d;
  d.kind_ = DistKind::TwoPointBernoulliShift;
  d.dim_ = 1;
  d.bern_p_ = p;
  const double root = std::sqrt(p * (1.0 - p));
  const double c = 2.0 * root / (1.0 - 2.0 * p);
  d.atom_points_ = {{c + (1.0 - p) / root}, {c - p / root}};
  d.atom_probs_ = {p, 1.0 - p};
  d.build_atom_cdf();
  return d;
}

DistributionSpec DistributionSpec::heavy_tail_log_corrected(double p) {
  if (!(p > 2.0)) {
    throw validation_error(
        "heavy-tail-logcorrected: exponent p must exceed 2");
  }
  DistributionSpec d;
  d.kind_ = DistKind::HeavyTailLogCorrected;
  d.dim_ = 1;
  d.tail_p_ = p;
  d.tail_ = std::make_shared<LogPowerTail>(p);
  return d;
}

DistributionSpec DistributionSpec::product_of_marginals(
    std::vector<DistributionSpec> marginals) {
  if (marginals.size() < 2) {
    throw validation_error("product-of-marginals: need at least 2 marginals");
  }
  DistributionSpec d;
  d.kind_ = DistKind::ProductOfMarginals;
  int dim = 0;
  for (const auto& m : marginals) {
    if (!m.is_scalar()) {
      throw validation_error("product-of-marginals: marginals must be scalar");
    }
    dim += m.dim();
  }
  d.dim_ = dim;
  d.marginals_ = std::move(marginals);
  return d;
}

DistributionSpec DistributionSpec::user_sampler(
    int dim, std::function<void(Rng&, std::span<double>)> draw) {
  DistributionSpec d;
  d.kind_ = DistKind::UserSampler;
  d.dim_ = dim;
  d.user_draw_ = std::move(draw);
  return d;
}

bool DistributionSpec::supports_exact() const {
  switch (kind_) {
    case DistKind::UserSampler: return false;
    case DistKind::ProductOfMarginals:
      return std::all_of(marginals_.begin(), marginals_.end(),
                         [](const DistributionSpec& m) { return m.supports_exact(); });
    default: return true;
  }
}

bool DistributionSpec::has_atoms() const { return !atom_points_.empty(); }

const std::vector<std::vector<double>>& DistributionSpec::atom_points() const {
  if (!has_atoms()) throw validation_error("spec has no atoms");
  return atom_points_;
}

const std::vector<double>& DistributionSpec::atom_probs() const {
  if (!has_atoms()) throw validation_error("spec has no atoms");
  return atom_probs_;
}

const LogPowerTail& DistributionSpec::tail_model() const {
  if (!tail_) throw validation_error("spec is not heavy-tail");
  return *tail_;
}

void DistributionSpec::draw(Rng& rng, std::span<double> out) const {
  switch (kind_) {
    case DistKind::DiscreteAtoms:
    case DistKind::TwoPointBernoulliShift: {
      const double u = rng.u01();
      const auto it = std::lower_bound(atom_cdf_.begin(), atom_cdf_.end(), u);
      const auto idx = static_cast<size_t>(it - atom_cdf_.begin());
      const auto& pt = atom_points_[std::min(idx, atom_points_.size() - 1)];
      std::copy(pt.begin(), pt.end(), out.begin());
      return;
    }
    case DistKind::Gaussian:
      for (int i = 0; i < dim_; ++i) out[i] = mean_[i] + sd_ * rng.gauss();
      return;
    case DistKind::StandardizedExponential:
      out[0] = shift_ - 1.0 + rng.expo();
      return;
    case DistKind::HeavyTailLogCorrected:
      out[0] = tail_->sample(rng);
      return;
    case DistKind::ProductOfMarginals: {
      int at = 0;
      for (const auto& m : marginals_) {
        m.draw(rng, out.subspan(at, 1));
        ++at;
      }
      return;
    }
    case DistKind::UserSampler:
      user_draw_(rng, out);
      return;
  }
}

double DistributionSpec::draw1(Rng& rng) const {
  double v;
  draw(rng, {&v, 1});
  return v;
}

double DistributionSpec::norm_tail(double t) const {
  if (t < 0.0) throw validation_error("norm_tail: negative threshold");
  switch (kind_) {
    case DistKind::DiscreteAtoms:
    case DistKind::TwoPointBernoulliShift: {
      double p = 0.0;
      for (size_t i = 0; i < atom_points_.size(); ++i) {
        if (norm_of(atom_points_[i]) > t) p += atom_probs_[i];
      }
      return p;
    }
    case DistKind::Gaussian: {
      if (dim_ == 1) {
        const double m = mean_[0];
        return norm_sf((t - m) / sd_) + norm_sf((t + m) / sd_);
      }
      const double m = norm_of(mean_) / sd_;
      const double c = (t / sd_) * (t / sd_);
      const int rest = dim_ - 1;
      return expect_gaussian(
          [&](double z) {
            const double q = c - (m + z) * (m + z);
            return chi_square_sf(rest, q);
          },
          0.0, 1.0);
    }
    case DistKind::StandardizedExponential: {
      // X = shift - 1 + E, E ~ Exp(1).
      const double up = t + 1.0 - shift_;
      double p = up > 0.0 ? std::exp(-up) : 1.0;
      const double lo = 1.0 - shift_ - t;  // P(X < -t) = P(E < lo)
      if (lo > 0.0) p += 1.0 - std::exp(-lo);
      return p;
    }
    case DistKind::HeavyTailLogCorrected:
      return tail_->tail_two_sided(t);
    case DistKind::ProductOfMarginals: {
      if (marginals_.size() != 2) {
        throw validation_error("norm_tail: only bivariate products supported");
      }
      const auto& mx = marginals_[0];
      const auto& my = marginals_[1];
      return mx.expect_scalar([&](double x) {
        const double rem = t * t - x * x;
        if (rem <= 0.0) return 1.0;
        return my.norm_tail(std::sqrt(rem));
      });
    }
    case DistKind::UserSampler:
      throw validation_error("norm_tail: user-sampler has no exact path");
  }
  return 0.0;
}

MomentValue DistributionSpec::norm_moment(double alpha) const {
  if (alpha < 0.0) throw validation_error("norm_moment: alpha < 0");
  switch (kind_) {
    case DistKind::HeavyTailLogCorrected:
      if (!tail_->moment_finite(alpha)) return {0.0, false, {}};
      return {tail_->abs_moment(alpha), true, {}};
    default:
      return {expect_norm([alpha](double r) { return std::pow(r, alpha); }),
              true,
              {}};
  }
}

double DistributionSpec::expect_norm(const std::function<double(double)>& g) const {
  switch (kind_) {
    case DistKind::DiscreteAtoms:
    case DistKind::TwoPointBernoulliShift: {
      double s = 0.0;
      for (size_t i = 0; i < atom_points_.size(); ++i) {
        s += atom_probs_[i] * g(norm_of(atom_points_[i]));
      }
      return s;
    }
    case DistKind::Gaussian: {
      if (dim_ == 1) {
        const double m = mean_[0];
        return expect_gaussian(
            [&](double x) { return g(std::fabs(x)); }, m, sd_);
      }
      const double m = norm_of(mean_) / sd_;
      const int rest = dim_ - 1;
      // Inner integral in chi coordinates: the chi density is smooth at 0
      // for every dimension (the chi-square one is singular at rest = 1).
      return expect_gaussian(
          [&](double z) {
            const double a = (m + z) * (m + z);
            return expect_chi(
                [&](double r) { return g(sd_ * std::sqrt(a + r * r)); }, rest);
          },
          0.0, 1.0);
    }
    case DistKind::StandardizedExponential:
      return expect_std_exponential(
          [&](double x) { return g(std::fabs(x)); }, shift_);
    case DistKind::HeavyTailLogCorrected: {
      const auto& t = *tail_;
      const double center = 2.0 * t.height() *
                            adaptive_simpson([&](double v) { return g(v); },
                                             0.0, t.v0());
      const double L = std::log(t.v0());
      const double hi =
          L + std::max(60.0, 50.0 / std::max(t.p() - 2.0, 0.05));
      const double tails =
          2.0 * t.coeff() *
          adaptive_simpson(
              [&](double u) {
                return g(std::exp(u)) * std::exp(-t.p() * u) / (u * u);
              },
              L, hi);
      return center + tails;
    }
    case DistKind::ProductOfMarginals: {
      if (marginals_.size() != 2) {
        throw validation_error("expect_norm: only bivariate products supported");
      }
      const auto& mx = marginals_[0];
      const auto& my = marginals_[1];
      return mx.expect_scalar([&](double x) {
        return my.expect_scalar(
            [&](double y) { return g(std::sqrt(x * x + y * y)); });
      });
    }
    case DistKind::UserSampler:
      throw validation_error("expect_norm: user-sampler has no exact path");
  }
  return 0.0;
}

double DistributionSpec::expect_scalar(const std::function<double(double)>& g) const {
  if (!is_scalar()) throw validation_error("expect_scalar: spec is not scalar");
  switch (kind_) {
    case DistKind::DiscreteAtoms:
    case DistKind::TwoPointBernoulliShift: {
      double s = 0.0;
      for (size_t i = 0; i < atom_points_.size(); ++i) {
        s += atom_probs_[i] * g(atom_points_[i][0]);
      }
      return s;
    }
    case DistKind::Gaussian:
      return expect_gaussian(g, mean_[0], sd_);
    case DistKind::StandardizedExponential:
      return expect_std_exponential(g, shift_);
    case DistKind::HeavyTailLogCorrected:
      return expect_norm([&](double r) { return 0.5 * (g(r) + g(-r)); });
    default:
      throw validation_error("expect_scalar: no exact path for this kind");
  }
}

double DistributionSpec::mean_value(int coord) const {
  switch (kind_) {
    case DistKind::DiscreteAtoms:
    case DistKind::TwoPointBernoulliShift: {
      double s = 0.0;
      for (size_t i = 0; i < atom_points_.size(); ++i) {
        s += atom_probs_[i] * atom_points_[i][coord];
      }
      return s;
    }
    case DistKind::Gaussian: return mean_[coord];
    case DistKind::StandardizedExponential: return shift_;
    case DistKind::HeavyTailLogCorrected: return 0.0;
    case DistKind::ProductOfMarginals: return marginals_[coord].mean_value(0);
    case DistKind::UserSampler:
      throw validation_error("mean_value: user-sampler has no exact path");
  }
  return 0.0;
}

double DistributionSpec::second_moment(int coord) const {
  switch (kind_) {
    case DistKind::DiscreteAtoms:
    case DistKind::TwoPointBernoulliShift: {
      double s = 0.0;
      for (size_t i = 0; i < atom_points_.size(); ++i) {
        const double v = atom_points_[i][coord];
        s += atom_probs_[i] * v * v;
      }
      return s;
    }
    case DistKind::Gaussian:
      return sd_ * sd_ + mean_[coord] * mean_[coord];
    case DistKind::StandardizedExponential: return 1.0 + shift_ * shift_;
    case DistKind::HeavyTailLogCorrected: return 1.0;
    case DistKind::ProductOfMarginals:
      return marginals_[coord].second_moment(0);
    case DistKind::UserSampler:
      throw validation_error("second_moment: user-sampler has no exact path");
  }
  return 0.0;
}

json DistributionSpec::to_json() const {
  json j;
  j["kind"] = to_string(kind_);
  switch (kind_) {
    case DistKind::DiscreteAtoms: {
      j["dimension"] = dim_;
      if (dim_ == 1) {
        json vals = json::array();
        for (const auto& p : atom_points_) vals.push_back(p[0]);
        j["values"] = vals;
      } else {
        j["values"] = atom_points_;
      }
      j["probabilities"] = atom_probs_;
      break;
    }
    case DistKind::Gaussian:
      j["dimension"] = dim_;
      j["mean"] = mean_;
      j["sd"] = sd_;
      break;
    case DistKind::StandardizedExponential:
      j["shift"] = shift_;
      break;
    case DistKind::TwoPointBernoulliShift:
      j["p"] = bern_p_;
      break;
    case DistKind::HeavyTailLogCorrected:
      j["p"] = tail_p_;
      break;
    case DistKind::ProductOfMarginals: {
      json ms = json::array();
      for (const auto& m : marginals_) ms.push_back(m.to_json());
      j["marginals"] = ms;
      break;
    }
    case DistKind::UserSampler:
      throw validation_error("user-sampler specs are not serializable");
  }
  return j;
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) {
      if (it.key() == k) { ok = true; break; }
    }
    if (!ok) {
      std::ostringstream os;
      os << where << ": unknown key '" << it.key() << "'";
      throw validation_error(os.str());
    }
  }
}

}  // namespace

DistributionSpec DistributionSpec::from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) {
    throw validation_error("distribution: missing 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "discrete-atoms") {
    check_keys(j, {"kind", "dimension", "values", "probabilities"},
               "discrete-atoms");
    const auto probs = j.at("probabilities").get<std::vector<double>>();
    const auto& vals = j.at("values");
    std::vector<std::vector<double>> points;
    for (const auto& v : vals) {
      if (v.is_array()) {
        points.push_back(v.get<std::vector<double>>());
      } else {
        points.push_back({v.get<double>()});
      }
    }
    auto d = discrete_atoms(std::move(points), probs);
    if (j.contains("dimension") && j.at("dimension").get<int>() != d.dim()) {
      throw validation_error("discrete-atoms: stated dimension mismatch");
    }
    return d;
  }
  if (kind == "gaussian") {
    check_keys(j, {"kind", "dimension", "mean", "sd"}, "gaussian");
    std::vector<double> mean;
    if (j.contains("mean")) {
      if (j.at("mean").is_array()) {
        mean = j.at("mean").get<std::vector<double>>();
      } else {
        mean = {j.at("mean").get<double>()};
      }
    } else {
      mean = {0.0};
    }
    if (j.contains("dimension")) {
      const int k = j.at("dimension").get<int>();
      if (static_cast<int>(mean.size()) == 1 && k > 1) {
        mean.resize(static_cast<size_t>(k), mean[0]);
      } else if (static_cast<int>(mean.size()) != k) {
        throw validation_error("gaussian: stated dimension mismatch");
      }
    }
    return gaussian(std::move(mean), j.value("sd", 1.0));
  }
  if (kind == "standardized-exponential") {
    check_keys(j, {"kind", "shift"}, "standardized-exponential");
    return standardized_exponential(j.value("shift", 0.0));
  }
  if (kind == "two-point-bernoulli-shift") {
    check_keys(j, {"kind", "p"}, "two-point-bernoulli-shift");
    return two_point_bernoulli_shift(j.at("p").get<double>());
  }
  if (kind == "heavy-tail-logcorrected") {
    check_keys(j, {"kind", "p"}, "heavy-tail-logcorrected");
    return heavy_tail_log_corrected(j.at("p").get<double>());
  }
  if (kind == "product-of-marginals") {
    check_keys(j, {"kind", "marginals"}, "product-of-marginals");
    std::vector<DistributionSpec> ms;
    for (const auto& mj : j.at("marginals")) ms.push_back(from_json(mj));
    return product_of_marginals(std::move(ms));
  }
  throw validation_error("distribution: unknown kind '" + kind + "'");
}

SampleMatrix sample(const DistributionSpec& spec, long n, std::uint64_t seed) {
  if (n < 1) throw validation_error("sample: n must be at least 1");
  SampleMatrix m;
  m.rows = n;
  m.cols = spec.dim();
  m.data.resize(static_cast<size_t>(n) * m.cols);
  const Rng root(seed);
  for (long i = 0; i < n; ++i) {
    Rng r = root.stream(static_cast<std::uint64_t>(i));
    spec.draw(r, {m.data.data() + static_cast<size_t>(i) * m.cols,
                  static_cast<size_t>(m.cols)});
  }
  return m;
}

// ---------------------------------------------------------------------------
// MomentProfile

MomentProfile MomentProfile::iid_of(const DistributionSpec& v, long n,
                                    const std::vector<double>& alphas,
                                    MomentMode mode, long mc_draws,
                                    std::uint64_t seed) {
  if (n < 1) throw validation_error("MomentProfile: n must be positive");
  MomentProfile p;
  p.iid_ = true;
  p.n_ = n;
  p.mode_ = mode;
  p.source_ = std::make_shared<DistributionSpec>(v);
  if (mode == MomentMode::Exact) {
    if (!v.supports_exact()) {
      throw validation_error("moment_profile: exact mode needs a closed-form kind");
    }
    for (double a : alphas) {
      MomentValue raw = v.norm_moment(a);
      if (raw.finite) raw.value = std::pow(raw.value, 1.0 / a);
      p.v_alpha_[a] = raw;  // stored as the alpha-norm ||V||_alpha
    }
  } else {
    Rng root(seed);
    std::vector<double> norms(static_cast<size_t>(mc_draws));
    std::vector<double> buf(static_cast<size_t>(v.dim()));
    for (long i = 0; i < mc_draws; ++i) {
      Rng r = root.stream(static_cast<std::uint64_t>(i));
      v.draw(r, buf);
      double s = 0.0;
      for (double x : buf) s += x * x;
      norms[static_cast<size_t>(i)] = std::sqrt(s);
    }
    for (double a : alphas) {
      double mean = 0.0;
      for (double r : norms) mean += std::pow(r, a);
      mean /= static_cast<double>(mc_draws);
      double var = 0.0;
      for (double r : norms) {
        const double d = std::pow(r, a) - mean;
        var += d * d;
      }
      var /= static_cast<double>(mc_draws) * (mc_draws - 1);
      MomentValue mv;
      mv.value = std::pow(mean, 1.0 / a);
      mv.finite = true;
      mv.std_error = std::sqrt(var) * std::pow(mean, 1.0 / a - 1.0) / a;
      p.v_alpha_[a] = mv;
    }
    std::sort(norms.begin(), norms.end());
    p.mc_norms_ = std::make_shared<std::vector<double>>(std::move(norms));
  }
  return p;
}

MomentProfile MomentProfile::family(
    std::vector<std::pair<DistributionSpec, long>> groups,
    const std::vector<double>& alphas, MomentMode mode, long mc_draws,
    std::uint64_t seed) {
  MomentProfile p;
  p.iid_ = false;
  p.mode_ = mode;
  long n = 0;
  for (const auto& [spec, cnt] : groups) {
    if (cnt < 1) throw validation_error("MomentProfile: group count < 1");
    n += cnt;
  }
  p.n_ = n;
  p.groups_ = std::make_shared<std::vector<std::pair<DistributionSpec, long>>>(
      std::move(groups));
  if (mode != MomentMode::Exact) {
    throw validation_error("MomentProfile::family: only exact mode supported");
  }
  (void)mc_draws;
  (void)seed;
  for (double a : alphas) {
    double acc = 0.0;
    bool finite = true;
    for (const auto& [spec, cnt] : *p.groups_) {
      const MomentValue m = spec.norm_moment(a);
      if (!m.finite) { finite = false; break; }
      acc += static_cast<double>(cnt) * m.value;
    }
    MomentValue mv;
    mv.finite = finite;
    mv.value = finite ? std::pow(acc, 1.0 / a) : 0.0;
    p.s_alpha_[a] = mv;
  }
  return p;
}

MomentProfile MomentProfile::iid_custom(
    long n, std::function<MomentValue(double)> norm_moment,
    std::function<double(double)> norm_tail,
    std::function<double(const std::function<double(double)>&)> expect_norm,
    const std::vector<double>& alphas) {
  if (n < 1) throw validation_error("MomentProfile: n must be positive");
  MomentProfile p;
  p.iid_ = true;
  p.n_ = n;
  p.mode_ = MomentMode::Exact;
  p.custom_norm_moment_ = std::move(norm_moment);
  p.custom_norm_tail_ = std::move(norm_tail);
  p.custom_expect_norm_ = std::move(expect_norm);
  for (double a : alphas) {
    MomentValue raw = p.custom_norm_moment_(a);
    if (raw.finite) raw.value = std::pow(raw.value, 1.0 / a);
    p.v_alpha_[a] = raw;
  }
  return p;
}

MomentValue MomentProfile::v_norm(double alpha) const {
  if (!iid_) throw validation_error("v_norm: profile is not in i.i.d. mode");
  const auto it = v_alpha_.find(alpha);
  MomentValue mv;
  if (it != v_alpha_.end()) {
    mv = it->second;
  } else if (custom_norm_moment_) {
    mv = custom_norm_moment_(alpha);
    if (mv.finite) mv.value = std::pow(mv.value, 1.0 / alpha);
  } else if (mode_ == MomentMode::Exact && source_) {
    mv = source_->norm_moment(alpha);
    if (mv.finite) mv.value = std::pow(mv.value, 1.0 / alpha);
  } else {
    throw validation_error("v_norm: alpha not tracked by this profile");
  }
  mv.value *= scale_;
  if (mv.std_error) *mv.std_error *= scale_;
  return mv;
}

MomentValue MomentProfile::s(double alpha) const {
  if (iid_) {
    MomentValue mv = v_norm(alpha);
    if (!mv.finite) return mv;
    mv.value /= std::pow(static_cast<double>(n_), 1.0 - 1.0 / alpha);
    if (mv.std_error) {
      *mv.std_error /= std::pow(static_cast<double>(n_), 1.0 - 1.0 / alpha);
    }
    return mv;
  }
  const auto it = s_alpha_.find(alpha);
  MomentValue mv;
  if (it != s_alpha_.end()) {
    mv = it->second;
  } else if (groups_) {
    double acc = 0.0;
    bool finite = true;
    for (const auto& [spec, cnt] : *groups_) {
      const MomentValue m = spec.norm_moment(alpha);
      if (!m.finite) { finite = false; break; }
      acc += static_cast<double>(cnt) * m.value;
    }
    mv.finite = finite;
    mv.value = finite ? std::pow(acc, 1.0 / alpha) : 0.0;
  } else {
    throw validation_error("s: alpha not tracked by this profile");
  }
  mv.value *= scale_;
  return mv;
}

double MomentProfile::tail_sum(double z) const {
  if (z < 0.0) throw validation_error("tail_sum: negative threshold");
  const double zr = z / scale_;
  if (iid_) {
    if (custom_norm_tail_) {
      return static_cast<double>(n_) *
             custom_norm_tail_(zr * static_cast<double>(n_));
    }
    if (mode_ == MomentMode::Exact) {
      return static_cast<double>(n_) *
             source_->norm_tail(zr * static_cast<double>(n_));
    }
    const auto& norms = *mc_norms_;
    const double t = zr * static_cast<double>(n_);
    const auto it = std::upper_bound(norms.begin(), norms.end(), t);
    const double frac =
        static_cast<double>(norms.end() - it) / static_cast<double>(norms.size());
    return static_cast<double>(n_) * frac;
  }
  double acc = 0.0;
  for (const auto& [spec, cnt] : *groups_) {
    acc += static_cast<double>(cnt) * spec.norm_tail(zr);
  }
  return acc;
}

double MomentProfile::sum_expect_min_sq_cube(double c) const {
  const double ce = c * scale_;
  const auto g = [ce](double r) {
    const double a = ce * r;
    const double a2 = a * a;
    return std::min(a2, a2 * a);
  };
  if (iid_) {
    const double n = static_cast<double>(n_);
    if (custom_expect_norm_) {
      return n * custom_expect_norm_([&](double r) { return g(r / n); });
    }
    if (mode_ != MomentMode::Exact) {
      throw validation_error("sum_expect_min_sq_cube: exact mode required");
    }
    return n * source_->expect_norm([&](double r) { return g(r / n); });
  }
  double acc = 0.0;
  for (const auto& [spec, cnt] : *groups_) {
    acc += static_cast<double>(cnt) * spec.expect_norm(g);
  }
  return acc;
}

MomentProfile MomentProfile::scaled(double scale) const {
  if (!(scale > 0.0)) throw validation_error("scaled: scale must be positive");
  MomentProfile p = *this;
  p.scale_ *= scale;
  return p;
}

MomentProfile moment_profile(const DistributionSpec& spec,
                             const std::vector<double>& alphas, long n,
                             MomentMode mode, long mc_draws,
                             std::uint64_t seed) {
  return MomentProfile::iid_of(spec, n, alphas, mode, mc_draws, seed);
}

double tail_sum(const MomentProfile& profile, double z) {
  return profile.tail_sum(z);
}

}  // namespace nlbe
