#include "nlbe/statistics.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nlbe/integrate.hpp"
#include "nlbe/normal.hpp"

namespace nlbe {

using nlohmann::json;

namespace {

constexpr double kVarianceFloor = 1e-12;  // relative, undefined-statistic cut
constexpr double kConditionLimit = 1e12;

double chi_square_sf(int k, double x) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * k, 0.5 * x);
}

double sq(double x) { return x * x; }

}  // namespace

std::string to_string(StatKind k) {
  switch (k) {
    case StatKind::Student: return "student";
    case StatKind::Pearson: return "pearson";
    case StatKind::Hotelling: return "hotelling";
    case StatKind::User: return "user";
  }
  return "?";
}

StatValue student_T(std::span<const double> xs) {
  const auto n = static_cast<long>(xs.size());
  if (n < 2) throw validation_error("student_T: need at least 2 observations");
  double m = 0.0, m2 = 0.0;
  for (double x : xs) {
    m += x;
    m2 += x * x;
  }
  m /= static_cast<double>(n);
  m2 /= static_cast<double>(n);
  const double var = m2 - m * m;
  if (!(var > kVarianceFloor * std::max(m2, 1e-300))) return {0.0, false};
  return {std::sqrt(static_cast<double>(n)) * m / std::sqrt(var), true};
}

StatValue pearson_R(std::span<const double> xs, std::span<const double> ys) {
  const auto n = static_cast<long>(xs.size());
  if (n < 2 || ys.size() != xs.size()) {
    throw validation_error("pearson_R: need paired samples of size >= 2");
  }
  double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
  for (long i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
    mxx += xs[i] * xs[i];
    myy += ys[i] * ys[i];
    mxy += xs[i] * ys[i];
  }
  const double dn = static_cast<double>(n);
  mx /= dn; my /= dn; mxx /= dn; myy /= dn; mxy /= dn;
  const double vx = mxx - mx * mx;
  const double vy = myy - my * my;
  if (!(vx > kVarianceFloor * std::max(mxx, 1e-300)) ||
      !(vy > kVarianceFloor * std::max(myy, 1e-300))) {
    return {0.0, false};
  }
  return {(mxy - mx * my) / std::sqrt(vx * vy), true};
}

StatValue hotelling_T2(const SampleMatrix& sample) {
  const long n = sample.rows;
  const int k = sample.cols;
  if (n < k + 1) throw validation_error("hotelling_T2: need n >= k+1");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(k, k);
  for (long i = 0; i < n; ++i) {
    Eigen::Map<const Eigen::VectorXd> x(sample.row(i).data(), k);
    mean += x;
    second += x * x.transpose();
  }
  mean /= static_cast<double>(n);
  second /= static_cast<double>(n);
  const Eigen::MatrixXd cov = second - mean * mean.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const auto& ev = es.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0) || hi / lo > kConditionLimit) return {0.0, false};
  const Eigen::VectorXd sol = es.eigenvectors() *
                              (es.eigenvectors().transpose() * mean).cwiseQuotient(ev);
  return {static_cast<double>(n) * mean.dot(sol), true};
}

double SmoothStatisticModel::L_of(std::span<const double> v) const {
  double s = 0.0;
  for (size_t i = 0; i < L_coeffs.size(); ++i) s += L_coeffs[i] * v[i];
  return s;
}

double SmoothStatisticModel::center(long n) const {
  const double dn = static_cast<double>(n);
  switch (kind) {
    case StatKind::Student: return std::sqrt(dn) * params.mu[0];
    case StatKind::Pearson: return params.rho;
    case StatKind::Hotelling: {
      double mm = 0.0;
      for (double m : params.mu) mm += m * m;
      return dn * mm;
    }
    default: throw validation_error("center: user models have no default");
  }
}

double SmoothStatisticModel::scale(long n) const {
  const double dn = static_cast<double>(n);
  switch (kind) {
    case StatKind::Student: return sigma1;
    case StatKind::Pearson: return sigma1 / std::sqrt(dn);
    case StatKind::Hotelling: return std::sqrt(dn) * sigma1;
    default: throw validation_error("scale: user models have no default");
  }
}

StatValue SmoothStatisticModel::evaluate(const SampleMatrix& sample) const {
  switch (kind) {
    case StatKind::Student: {
      std::span<const double> col(sample.data.data(),
                                  static_cast<size_t>(sample.rows));
      return student_T(col);
    }
    case StatKind::Pearson: {
      std::vector<double> xs(static_cast<size_t>(sample.rows));
      std::vector<double> ys(static_cast<size_t>(sample.rows));
      for (long i = 0; i < sample.rows; ++i) {
        xs[static_cast<size_t>(i)] = sample.row(i)[0];
        ys[static_cast<size_t>(i)] = sample.row(i)[1];
      }
      return pearson_R(xs, ys);
    }
    case StatKind::Hotelling: return hotelling_T2(sample);
    default: throw validation_error("evaluate: user models not supported");
  }
}

BoundInputs SmoothStatisticModel::bound_inputs(
    long n, double p, const std::vector<double>& alphas) const {
  if (!sixth_moment_finite && p >= 3.0) {
    throw infinite_moment_error(
        "bound_inputs: sixth observation moment is infinite");
  }
  if (effectively_degenerate()) {
    throw degeneracy_error("bound_inputs: sigma1 = 0");
  }
  BoundInputs in;
  in.norm_L = norm_L;
  in.sigma = sigma1 / std::sqrt(static_cast<double>(n));
  in.M = M;
  in.epsilon = epsilon;
  in.D = 1.0;
  in.p = p;
  in.profile = MomentProfile::iid_custom(n, v_norm_moment_, v_norm_tail_,
                                         v_expect_norm_, alphas);
  return in;
}

namespace {

// ---- model construction helpers -----------------------------------------

struct CenteredScalar {
  // Exact central-moment machinery for a scalar observation law. Holds a
  // shared copy so the lambdas stored in the model stay valid.
  std::shared_ptr<const DistributionSpec> spec;
  double mu;

  double expect(const std::function<double(double)>& g) const {  // g(x - mu)
    return spec->expect_scalar([this, &g](double x) { return g(x - mu); });
  }
  // P(|X - mu| > s), exact per kind.
  double abs_tail(double s) const {
    switch (spec->kind()) {
      case DistKind::Gaussian:
        return norm_sf(s / spec->gaussian_sd()) +
               norm_sf(s / spec->gaussian_sd());
      case DistKind::StandardizedExponential: {
        // X - mu = E - 1.
        double p = std::exp(-(1.0 + s));
        if (s < 1.0) p += 1.0 - std::exp(-(1.0 - s));
        return p;
      }
      case DistKind::HeavyTailLogCorrected:
        return spec->tail_model().tail_two_sided(s);
      case DistKind::DiscreteAtoms:
      case DistKind::TwoPointBernoulliShift: {
        double p = 0.0;
        const auto& pts = spec->atom_points();
        const auto& probs = spec->atom_probs();
        for (size_t i = 0; i < pts.size(); ++i) {
          if (std::fabs(pts[i][0] - mu) > s) p += probs[i];
        }
        return p;
      }
      default:
        throw validation_error("abs_tail: no exact path for this kind");
    }
  }
};

void require(bool cond, const char* msg) {
  if (!cond) throw validation_error(msg);
}

int hotelling_v_dim(int k) { return k + k * (k + 1) / 2; }

// Flatten a symmetric matrix into (diag, sqrt(2) * upper off-diag) so the
// Euclidean norm of the coordinates equals the Frobenius norm.
void flatten_symmetric(const Eigen::MatrixXd& a, std::span<double> out,
                       int k, int offset) {
  int pos = offset;
  for (int i = 0; i < k; ++i) out[pos++] = a(i, i);
  const double r2 = std::sqrt(2.0);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) out[pos++] = r2 * a(i, j);
  }
}

Eigen::MatrixXd unflatten_symmetric(std::span<const double> v, int k,
                                    int offset) {
  Eigen::MatrixXd a(k, k);
  int pos = offset;
  for (int i = 0; i < k; ++i) a(i, i) = v[pos++];
  const double inv_r2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      a(i, j) = a(j, i) = v[pos++] * inv_r2;
    }
  }
  return a;
}

}  // namespace

SmoothStatisticModel build_model(StatKind kind, const StatParams& params,
                                 const DistributionSpec& obs_dist,
                                 const ModelOptions& opts) {
  SmoothStatisticModel m;
  m.kind = kind;
  m.params = params;
  m.obs_dist = obs_dist;
  m.epsilon = opts.epsilon;

  switch (kind) {
    case StatKind::Student: {
      require(obs_dist.is_scalar(), "student: observation must be scalar");
      require(!params.mu.empty(), "student: mu parameter required");
      const double mu = params.mu[0];
      require(std::fabs(obs_dist.mean_value() - mu) <= 1e-8,
              "student: mu must equal the observation mean");
      const double var = obs_dist.second_moment() - sq(obs_dist.mean_value());
      require(std::fabs(var - 1.0) <= 1e-8,
              "student: observation variance must be 1");
      m.obs_dim = 1;
      m.v_dim = 2;
      m.embed = [mu](std::span<const double> x, std::span<double> v) {
        const double z = x[0] - mu;
        v[0] = z;
        v[1] = z * z - 1.0;
      };
      m.f = [mu](std::span<const double> v) {
        return (v[0] + mu) / std::sqrt(v[1] + 1.0 - v[0] * v[0]) - mu;
      };
      m.L_coeffs = {1.0, -0.5 * mu};
      m.norm_L = std::sqrt(1.0 + 0.25 * mu * mu);
      m.norm_L_numeric = m.norm_L;
      const CenteredScalar cs{std::make_shared<DistributionSpec>(obs_dist), mu};
      const double a = 0.5 * mu;
      if (a == 0.0) {
        m.sigma1 = 1.0;
      } else {
        // Direct quadratic expectation; the moment expansion cancels
        // catastrophically near the degenerate two-point law.
        const double s2 = cs.expect([a](double z) {
          const double g = a * (z * z - 1.0) - z;
          return g * g;
        });
        m.sigma1 = std::sqrt(std::max(s2, 0.0));
      }
      const bool heavy = obs_dist.kind() == DistKind::HeavyTailLogCorrected;
      const double tail_p = heavy ? obs_dist.tail_model().p() : 0.0;
      const auto alpha_finite = [heavy, tail_p](double alpha) {
        return !heavy || 2.0 * alpha <= tail_p;
      };
      m.sixth_moment_finite = alpha_finite(3.0);
      m.v_norm_moment_ = [cs, alpha_finite](double alpha) -> MomentValue {
        if (!alpha_finite(alpha)) return {0.0, false, {}};
        return {cs.expect([alpha](double z) {
                  const double w = z * z + sq(z * z - 1.0);
                  return std::pow(w, 0.5 * alpha);
                }),
                true,
                {}};
      };
      m.v_norm_tail_ = [cs](double w) {
        // ||V||^2 = t^2 - t + 1 with t = (x-mu)^2.
        const double W = w * w;
        const double disc = 4.0 * W - 3.0;
        if (disc < 0.0) return 1.0;
        const double tp = 0.5 * (1.0 + std::sqrt(disc));
        double prob = cs.abs_tail(std::sqrt(tp));
        const double tm = 0.5 * (1.0 - std::sqrt(disc));
        if (tm > 0.0) prob += 1.0 - cs.abs_tail(std::sqrt(tm));
        return prob;
      };
      m.v_expect_norm_ = [cs](const std::function<double(double)>& g) {
        return cs.expect([&g](double z) {
          return g(std::sqrt(z * z + sq(z * z - 1.0)));
        });
      };
      break;
    }
    case StatKind::Pearson: {
      require(obs_dist.dim() == 2, "pearson: observation must be bivariate");
      const bool atoms = obs_dist.has_atoms();
      const bool product = obs_dist.kind() == DistKind::ProductOfMarginals;
      require(atoms || product,
              "pearson: need discrete atoms or product-of-marginals");
      require(std::fabs(obs_dist.mean_value(0)) <= 1e-8 &&
                  std::fabs(obs_dist.mean_value(1)) <= 1e-8,
              "pearson: marginals must be centered");
      require(std::fabs(obs_dist.second_moment(0) - 1.0) <= 1e-8 &&
                  std::fabs(obs_dist.second_moment(1) - 1.0) <= 1e-8,
              "pearson: marginals must have unit variance");
      double rho = 0.0;
      if (atoms) {
        const auto& pts = obs_dist.atom_points();
        const auto& probs = obs_dist.atom_probs();
        for (size_t i = 0; i < pts.size(); ++i) {
          rho += probs[i] * pts[i][0] * pts[i][1];
        }
      }
      require(std::fabs(rho - params.rho) <= 1e-8,
              "pearson: rho must equal E[XY] of the observation law");
      m.params.rho = rho;
      m.obs_dim = 2;
      m.v_dim = 5;
      m.embed = [rho](std::span<const double> xy, std::span<double> v) {
        const double x = xy[0], y = xy[1];
        v[0] = x;
        v[1] = y;
        v[2] = x * x - 1.0;
        v[3] = y * y - 1.0;
        v[4] = x * y - rho;
      };
      m.f = [rho](std::span<const double> v) {
        return (v[4] + rho - v[0] * v[1]) /
                   (std::sqrt(v[2] + 1.0 - v[0] * v[0]) *
                    std::sqrt(v[3] + 1.0 - v[1] * v[1])) -
               rho;
      };
      m.L_coeffs = {0.0, 0.0, -0.5 * rho, -0.5 * rho, 1.0};
      m.norm_L = std::sqrt(1.0 + 0.5 * rho * rho);
      m.norm_L_numeric = m.norm_L;

      const auto expect2 = [obs = obs_dist](
                               const std::function<double(double, double)>& g) {
        if (obs.has_atoms()) {
          const auto& pts = obs.atom_points();
          const auto& probs = obs.atom_probs();
          double s = 0.0;
          for (size_t i = 0; i < pts.size(); ++i) {
            s += probs[i] * g(pts[i][0], pts[i][1]);
          }
          return s;
        }
        const auto& mx = obs.marginals()[0];
        const auto& my = obs.marginals()[1];
        return mx.expect_scalar([&](double x) {
          return my.expect_scalar([&](double y) { return g(x, y); });
        });
      };
      m.sigma1 = std::sqrt(expect2([rho](double x, double y) {
        return sq(x * y - 0.5 * rho * (x * x + y * y));
      }));
      m.sixth_moment_finite = true;  // atoms/product of closed-form kinds
      const auto v_sq = [rho](double x, double y) {
        return x * x + y * y + sq(x * x - 1.0) + sq(y * y - 1.0) +
               sq(x * y - rho);
      };
      m.v_norm_moment_ = [expect2, v_sq](double alpha) -> MomentValue {
        return {expect2([&](double x, double y) {
                  return std::pow(v_sq(x, y), 0.5 * alpha);
                }),
                true,
                {}};
      };
      m.v_norm_tail_ = [expect2, v_sq](double w) {
        const double W = w * w;
        return expect2(
            [&](double x, double y) { return v_sq(x, y) > W ? 1.0 : 0.0; });
      };
      m.v_expect_norm_ = [expect2, v_sq](const std::function<double(double)>& g) {
        return expect2(
            [&](double x, double y) { return g(std::sqrt(v_sq(x, y))); });
      };
      break;
    }
    case StatKind::Hotelling: {
      const int k = obs_dist.dim();
      require(k >= 2, "hotelling: observation dimension must be >= 2");
      require(static_cast<int>(params.mu.size()) == k,
              "hotelling: mu must match the observation dimension");
      const bool atoms = obs_dist.has_atoms();
      const bool gauss = obs_dist.kind() == DistKind::Gaussian;
      require(atoms || gauss, "hotelling: need gaussian or discrete atoms");
      Eigen::VectorXd mu(k);
      for (int i = 0; i < k; ++i) {
        mu[i] = params.mu[static_cast<size_t>(i)];
        require(std::fabs(obs_dist.mean_value(i) - mu[i]) <= 1e-8,
                "hotelling: mu must equal the observation mean");
      }
      if (gauss) {
        require(std::fabs(obs_dist.gaussian_sd() - 1.0) <= 1e-12,
                "hotelling: gaussian observations must have identity covariance");
      } else {
        // cov = I check on atoms.
        const auto& pts = obs_dist.atom_points();
        const auto& probs = obs_dist.atom_probs();
        for (int i = 0; i < k; ++i) {
          for (int j = i; j < k; ++j) {
            double c = 0.0;
            for (size_t a = 0; a < pts.size(); ++a) {
              c += probs[a] * (pts[a][i] - mu[i]) * (pts[a][j] - mu[j]);
            }
            require(std::fabs(c - (i == j ? 1.0 : 0.0)) <= 1e-8,
                    "hotelling: observation covariance must be the identity");
          }
        }
      }
      m.obs_dim = k;
      m.v_dim = hotelling_v_dim(k);
      std::vector<double> muv = params.mu;
      m.embed = [muv, k](std::span<const double> x, std::span<double> v) {
        Eigen::VectorXd d(k);
        for (int i = 0; i < k; ++i) d[i] = x[i] - muv[static_cast<size_t>(i)];
        for (int i = 0; i < k; ++i) v[i] = d[i];
        Eigen::MatrixXd a = d * d.transpose();
        for (int i = 0; i < k; ++i) a(i, i) -= 1.0;
        flatten_symmetric(a, v, k, k);
      };
      m.f = [muv, k](std::span<const double> v) {
        Eigen::VectorXd x1(k);
        for (int i = 0; i < k; ++i) x1[i] = v[i];
        Eigen::MatrixXd b = unflatten_symmetric(v, k, k);
        b += Eigen::MatrixXd::Identity(k, k);
        b -= x1 * x1.transpose();
        Eigen::VectorXd mu_e(k);
        for (int i = 0; i < k; ++i) mu_e[i] = muv[static_cast<size_t>(i)];
        const Eigen::VectorXd w = b.ldlt().solve(x1 + mu_e);
        return (x1 + mu_e).dot(w) - mu_e.dot(mu_e);
      };
      m.L_coeffs.assign(static_cast<size_t>(m.v_dim), 0.0);
      for (int i = 0; i < k; ++i) m.L_coeffs[static_cast<size_t>(i)] = 2.0 * mu[i];
      {
        int pos = k;
        for (int i = 0; i < k; ++i) m.L_coeffs[static_cast<size_t>(pos++)] = -mu[i] * mu[i];
        const double r2 = std::sqrt(2.0);
        for (int i = 0; i < k; ++i) {
          for (int j = i + 1; j < k; ++j) {
            m.L_coeffs[static_cast<size_t>(pos++)] = -r2 * mu[i] * mu[j];
          }
        }
      }
      const double mu_norm = mu.norm();
      m.norm_L = mu_norm * std::sqrt(4.0 + mu_norm * mu_norm);
      {
        double s = 0.0;
        for (double c : m.L_coeffs) s += c * c;
        m.norm_L_numeric = std::sqrt(s);
      }
      // sigma1 = || U^2 - 2U - ||mu||^2 ||_2 with U = (X-mu)'mu.
      const double c2 = mu_norm * mu_norm;
      if (gauss) {
        m.sigma1 = std::sqrt(2.0 * c2 * c2 + 4.0 * c2);
      } else {
        const auto& pts = obs_dist.atom_points();
        const auto& probs = obs_dist.atom_probs();
        double s = 0.0;
        for (size_t a = 0; a < pts.size(); ++a) {
          double u = 0.0;
          for (int i = 0; i < k; ++i) u += (pts[a][i] - mu[i]) * mu[i];
          s += probs[a] * sq(u * u - 2.0 * u - c2);
        }
        m.sigma1 = std::sqrt(s);
      }
      m.sixth_moment_finite = true;
      // ||V||^2 = r^4 - r^2 + k with r = ||X - mu|| (chi_k for gaussian).
      const auto v_sq_of_r = [k](double r) {
        const double t = r * r;
        return t * t - t + static_cast<double>(k);
      };
      if (gauss) {
        m.v_norm_moment_ = [k, v_sq_of_r](double alpha) -> MomentValue {
          return {expect_chi([&](double r) {
                    return std::pow(v_sq_of_r(r), 0.5 * alpha);
                  }, k),
                  true,
                  {}};
        };
        m.v_norm_tail_ = [k](double w) {
          const double W = w * w;
          const double disc = 1.0 + 4.0 * (W - static_cast<double>(k));
          if (disc < 0.0) return 1.0;
          const double tp = 0.5 * (1.0 + std::sqrt(disc));
          double prob = chi_square_sf(k, tp);
          const double tm = 0.5 * (1.0 - std::sqrt(disc));
          if (tm > 0.0) prob += 1.0 - chi_square_sf(k, tm);
          return prob;
        };
        m.v_expect_norm_ = [k, v_sq_of_r](const std::function<double(double)>& g) {
          return expect_chi(
              [&](double r) { return g(std::sqrt(v_sq_of_r(r))); }, k);
        };
      } else {
        const auto& pts = obs_dist.atom_points();
        const auto& probs = obs_dist.atom_probs();
        std::vector<std::pair<double, double>> vnorms;  // (||V||, prob)
        for (size_t a = 0; a < pts.size(); ++a) {
          double r2 = 0.0;
          for (int i = 0; i < k; ++i) r2 += sq(pts[a][i] - mu[i]);
          vnorms.emplace_back(std::sqrt(v_sq_of_r(std::sqrt(r2))), probs[a]);
        }
        m.v_norm_moment_ = [vnorms](double alpha) -> MomentValue {
          double s = 0.0;
          for (const auto& [r, pr] : vnorms) s += pr * std::pow(r, alpha);
          return {s, true, {}};
        };
        m.v_norm_tail_ = [vnorms](double w) {
          double s = 0.0;
          for (const auto& [r, pr] : vnorms) {
            if (r > w) s += pr;
          }
          return s;
        };
        m.v_expect_norm_ = [vnorms](const std::function<double(double)>& g) {
          double s = 0.0;
          for (const auto& [r, pr] : vnorms) s += pr * g(r);
          return s;
        };
      }
      break;
    }
    case StatKind::User:
      throw validation_error("build_model: user kind needs explicit fields");
  }

  m.V2 = m.v_norm_moment_(2.0);
  m.V3 = m.v_norm_moment_(3.0);
  if (!m.V3.finite) m.sixth_moment_finite = false;
  if (m.V2.finite) m.V2.value = std::sqrt(m.V2.value);
  if (m.V3.finite) m.V3.value = std::cbrt(m.V3.value);
  // norm_moment returns E||V||^alpha; store the alpha-norms.

  // Certify the smoothness constant on the shipped ball, then freeze it
  // with a safety margin.
  const CertifyResult cert = smoothness_certify(
      m.f,
      [&m](std::span<const double> v) { return m.L_of(v); }, m.v_dim,
      m.epsilon, opts.certify_points, opts.certify_seed);
  m.M = cert.M_hat * opts.safety_inflation;
  return m;
}

DegeneracyReport degeneracy_check(StatKind kind, const StatParams& params,
                                  const DistributionSpec& obs_dist) {
  DegeneracyReport rep;
  // sigma1 and its natural scale, without requiring non-degeneracy.
  ModelOptions cheap;
  cheap.certify_points = 200;  // M is irrelevant here
  const SmoothStatisticModel probe = build_model(kind, params, obs_dist, cheap);
  rep.sigma1 = probe.sigma1;
  rep.degenerate = probe.effectively_degenerate();
  if (!rep.degenerate) {
    rep.witness = "not degenerate";
    return rep;
  }
  std::ostringstream os;
  os.precision(12);
  switch (kind) {
    case StatKind::Student: {
      const double mu = params.mu[0];
      os << "two-point support";
      if (obs_dist.has_atoms() && mu != 0.0) {
        const double root = std::sqrt(1.0 + mu * mu);
        const double hi = mu + (1.0 + root) / mu;
        const double lo = mu + (1.0 - root) / mu;
        bool on_support = true;
        for (const auto& pt : obs_dist.atom_points()) {
          if (std::fabs(pt[0] - hi) > 1e-8 && std::fabs(pt[0] - lo) > 1e-8) {
            on_support = false;
          }
        }
        os << " at mu + (1 +/- sqrt(1+mu^2))/mu = {" << hi << ", " << lo
           << "}" << (on_support ? " (support verified)" : " (MISMATCH)");
      }
      break;
    }
    case StatKind::Pearson: {
      // Support on two lines through the origin with reciprocal slopes.
      os << "support on two lines y = kappa x and y = x/kappa";
      if (obs_dist.has_atoms()) {
        const auto& pts = obs_dist.atom_points();
        double kappa = 0.0;
        bool have_kappa = false;
        for (const auto& p : pts) {
          if (std::fabs(p[0]) > 1e-12 && std::fabs(p[1] / p[0]) >= 1.0) {
            kappa = p[1] / p[0];
            have_kappa = true;
            break;
          }
        }
        if (have_kappa) {
          bool on_lines = true;
          for (const auto& p : pts) {
            const bool line1 = std::fabs(p[1] - kappa * p[0]) <= 1e-8;
            const bool line2 =
                std::fabs(kappa) > 1e-12 &&
                std::fabs(p[1] - p[0] / kappa) <= 1e-8;
            if (!line1 && !line2) on_lines = false;
          }
          os << "; kappa = " << kappa
             << (on_lines ? " (support verified)" : " (MISMATCH)");
        }
      }
      break;
    }
    case StatKind::Hotelling: {
      double mm = 0.0;
      for (double m : params.mu) mm += m * m;
      const double root = std::sqrt(1.0 + mm);
      const double x1 = 1.0 + mm + root;
      const double x2 = 1.0 + mm - root;
      os << "support in the hyperplanes X'mu = " << x1 << " or " << x2;
      if (obs_dist.has_atoms()) {
        bool on_planes = true;
        for (const auto& pt : obs_dist.atom_points()) {
          double dot = 0.0;
          for (size_t i = 0; i < params.mu.size(); ++i) {
            dot += pt[i] * params.mu[i];
          }
          if (std::fabs(dot - x1) > 1e-8 && std::fabs(dot - x2) > 1e-8) {
            on_planes = false;
          }
        }
        os << (on_planes ? " (support verified)" : " (MISMATCH)");
      }
      break;
    }
    default: os << "degenerate"; break;
  }
  rep.witness = os.str();
  return rep;
}

json DegeneracyReport::to_json() const {
  return json{{"sigma1", sigma1},
              {"degenerate", degenerate},
              {"witness", witness}};
}

CertifyResult smoothness_certify(
    const std::function<double(std::span<const double>)>& f,
    const std::function<double(std::span<const double>)>& L, int dim,
    double epsilon, long n_points, std::uint64_t seed) {
  if (n_points < 1) throw validation_error("smoothness_certify: n_points < 1");
  const double h = 1e-4 * epsilon;
  Rng root(seed);
  std::vector<double> x(static_cast<size_t>(dim));
  std::vector<double> xp(static_cast<size_t>(dim));
  Eigen::MatrixXd hess(dim, dim);
  std::vector<double> required(static_cast<size_t>(n_points));
  double m_hat = 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  for (long pt = 0; pt < n_points; ++pt) {
    Rng rng = root.stream(static_cast<std::uint64_t>(pt));
    // Uniform in the epsilon ball: gaussian direction, beta radius.
    double nrm = 0.0;
    for (auto& xi : x) {
      xi = rng.gauss();
      nrm += xi * xi;
    }
    nrm = std::sqrt(nrm);
    const double radius =
        epsilon * std::pow(rng.u01(), 1.0 / static_cast<double>(dim));
    for (auto& xi : x) xi *= radius / nrm;

    const double fx = f(x);
    // Central-difference Hessian.
    for (int i = 0; i < dim; ++i) {
      xp = x;
      xp[static_cast<size_t>(i)] += h;
      const double fp = f(xp);
      xp[static_cast<size_t>(i)] -= 2.0 * h;
      const double fm = f(xp);
      hess(i, i) = (fp - 2.0 * fx + fm) / (h * h);
      for (int j = i + 1; j < dim; ++j) {
        xp = x;
        xp[static_cast<size_t>(i)] += h;
        xp[static_cast<size_t>(j)] += h;
        const double fpp = f(xp);
        xp[static_cast<size_t>(j)] -= 2.0 * h;
        const double fpm = f(xp);
        xp[static_cast<size_t>(i)] -= 2.0 * h;
        const double fmm = f(xp);
        xp[static_cast<size_t>(j)] += 2.0 * h;
        const double fmp = f(xp);
        hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
      }
    }
    double op_norm;
    if (dim == 1) {
      op_norm = std::fabs(hess(0, 0));
    } else {
      es.compute(hess, Eigen::EigenvaluesOnly);
      op_norm = std::max(std::fabs(es.eigenvalues().minCoeff()),
                         std::fabs(es.eigenvalues().maxCoeff()));
    }
    m_hat = std::max(m_hat, op_norm);
    const double r2 = radius * radius;
    required[static_cast<size_t>(pt)] =
        r2 > 0.0 ? 2.0 * std::fabs(fx - L(x)) / r2 : 0.0;
  }
  CertifyResult out;
  out.M_hat = m_hat;
  for (double req : required) {
    if (req > m_hat * (1.0 + 1e-6)) ++out.violations;
  }
  return out;
}

CertifyResult smoothness_certify(const SmoothStatisticModel& model,
                                 double epsilon, long n_points,
                                 std::uint64_t seed) {
  return smoothness_certify(
      model.f, [&model](std::span<const double> v) { return model.L_of(v); },
      model.v_dim, epsilon, n_points, seed);
}

IdentityCheck linearization_identity_check(const SmoothStatisticModel& model,
                                           const SampleMatrix& sample) {
  std::vector<double> vbar(static_cast<size_t>(model.v_dim), 0.0);
  std::vector<double> v(static_cast<size_t>(model.v_dim));
  for (long i = 0; i < sample.rows; ++i) {
    model.embed(sample.row(i), v);
    for (int j = 0; j < model.v_dim; ++j) {
      vbar[static_cast<size_t>(j)] += v[static_cast<size_t>(j)];
    }
  }
  double nrm = 0.0;
  for (auto& c : vbar) {
    c /= static_cast<double>(sample.rows);
    nrm += c * c;
  }
  if (std::sqrt(nrm) > 0.5) return IdentityCheck::NotApplicable;
  const double lhs = model.f(vbar);
  const StatValue stat = model.evaluate(sample);
  if (!stat.defined) return IdentityCheck::Fails;
  double rhs = 0.0;
  const double n = static_cast<double>(sample.rows);
  switch (model.kind) {
    case StatKind::Student:
      rhs = stat.value / std::sqrt(n) - model.params.mu[0];
      break;
    case StatKind::Pearson:
      rhs = stat.value - model.params.rho;
      break;
    case StatKind::Hotelling: {
      double mm = 0.0;
      for (double m : model.params.mu) mm += m * m;
      rhs = stat.value / n - mm;
      break;
    }
    default:
      throw validation_error("identity check: unsupported kind");
  }
  const double tol = 1e-10 * std::max({1.0, std::fabs(lhs), std::fabs(rhs)});
  return std::fabs(lhs - rhs) <= tol ? IdentityCheck::Holds
                                     : IdentityCheck::Fails;
}

}  // namespace nlbe
