#include "nlbe/simulation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "nlbe/integrate.hpp"
#include "nlbe/normal.hpp"

namespace nlbe {

using nlohmann::json;

namespace {

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Run fn(first, last) over [0, total) split into contiguous chunks.
void parallel_chunks(long total, int workers,
                     const std::function<void(long, long)>& fn) {
  const int w = std::min<long>(resolve_workers(workers), std::max<long>(total, 1));
  if (w <= 1) {
    fn(0, total);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(w));
  const long chunk = (total + w - 1) / w;
  for (int t = 0; t < w; ++t) {
    const long first = t * chunk;
    const long last = std::min(total, first + chunk);
    if (first >= last) break;
    pool.emplace_back(fn, first, last);
  }
  for (auto& th : pool) th.join();
}

double weight_at(DistanceWeight w, double poly_p, double z) {
  switch (w) {
    case DistanceWeight::Uniform: return 1.0;
    case DistanceWeight::Polynomial: return std::pow(1.0 + std::fabs(z), poly_p);
    case DistanceWeight::Exponential: return std::exp(std::fabs(z) / 3.0);
  }
  return 1.0;
}

}  // namespace

double uniform_ks_distance(std::span<const double> sorted_values) {
  const auto n = static_cast<long>(sorted_values.size());
  if (n == 0) throw validation_error("uniform_ks_distance: empty sample");
  double d = 0.0;
  for (long i = 0; i < n; ++i) {
    const double phi = norm_cdf(sorted_values[static_cast<size_t>(i)]);
    const double lo = static_cast<double>(i) / static_cast<double>(n);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    d = std::max(d, std::max(std::fabs(hi - phi), std::fabs(phi - lo)));
  }
  return d;
}

double empirical_cdf(std::span<const double> sorted_values, double z) {
  const auto it =
      std::upper_bound(sorted_values.begin(), sorted_values.end(), z);
  return static_cast<double>(it - sorted_values.begin()) /
         static_cast<double>(sorted_values.size());
}

double weighted_distance(std::span<const double> sorted_values,
                         std::span<const double> z_grid, DistanceWeight weight,
                         double poly_p) {
  if (sorted_values.empty()) {
    throw validation_error("weighted_distance: empty sample");
  }
  double d = 0.0;
  for (double z : z_grid) {
    const double gap = std::fabs(empirical_cdf(sorted_values, z) - norm_cdf(z));
    d = std::max(d, weight_at(weight, poly_p, z) * gap);
  }
  return d;
}

RateEstimate rate_fit(const std::vector<std::pair<double, double>>& points,
                      double predicted_order) {
  if (points.size() < 3) {
    throw validation_error("rate_fit: need at least 3 points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [n, d] : points) {
    if (!(d > 0.0)) throw validation_error("rate_fit: distances must be positive");
    const double x = std::log(n);
    const double y = std::log(d);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(points.size());
  const double denom = m * sxx - sx * sx;
  RateEstimate est;
  est.slope = (m * sxy - sx * sy) / denom;
  est.intercept = (sy - est.slope * sx) / m;
  est.predicted_order = predicted_order;
  return est;
}

namespace {

// One standardized replicate of the model statistic; NaN marks an undefined
// statistic (zero variance / singular covariance).
double standardized_replicate(const SmoothStatisticModel& model, long n,
                              Rng& rng, std::vector<double>& buf) {
  const double dn = static_cast<double>(n);
  switch (model.kind) {
    case StatKind::Student: {
      double s1 = 0.0, s2 = 0.0;
      for (long i = 0; i < n; ++i) {
        const double x = model.obs_dist.draw1(rng);
        s1 += x;
        s2 += x * x;
      }
      const double m = s1 / dn;
      const double v = s2 / dn - m * m;
      if (!(v > 1e-12 * std::max(s2 / dn, 1e-300))) {
        return std::numeric_limits<double>::quiet_NaN();
      }
      const double t = std::sqrt(dn) * m / std::sqrt(v);
      return (t - model.center(n)) / model.scale(n);
    }
    case StatKind::Pearson: {
      double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
      double xy[2];
      for (long i = 0; i < n; ++i) {
        model.obs_dist.draw(rng, {xy, 2});
        mx += xy[0];
        my += xy[1];
        mxx += xy[0] * xy[0];
        myy += xy[1] * xy[1];
        mxy += xy[0] * xy[1];
      }
      mx /= dn; my /= dn; mxx /= dn; myy /= dn; mxy /= dn;
      const double vx = mxx - mx * mx;
      const double vy = myy - my * my;
      if (!(vx > 1e-12 * std::max(mxx, 1e-300)) ||
          !(vy > 1e-12 * std::max(myy, 1e-300))) {
        return std::numeric_limits<double>::quiet_NaN();
      }
      const double r = (mxy - mx * my) / std::sqrt(vx * vy);
      return (r - model.center(n)) / model.scale(n);
    }
    case StatKind::Hotelling: {
      const int k = model.obs_dim;
      buf.assign(static_cast<size_t>(k + k * k), 0.0);
      double* mean = buf.data();
      double* second = buf.data() + k;
      std::vector<double> x(static_cast<size_t>(k));
      for (long i = 0; i < n; ++i) {
        model.obs_dist.draw(rng, x);
        for (int a = 0; a < k; ++a) {
          mean[a] += x[static_cast<size_t>(a)];
          for (int b = a; b < k; ++b) {
            second[a * k + b] += x[static_cast<size_t>(a)] * x[static_cast<size_t>(b)];
          }
        }
      }
      Eigen::VectorXd mu(k);
      Eigen::MatrixXd cov(k, k);
      for (int a = 0; a < k; ++a) mu[a] = mean[a] / dn;
      for (int a = 0; a < k; ++a) {
        for (int b = a; b < k; ++b) {
          const double c = second[a * k + b] / dn - mu[a] * mu[b];
          cov(a, b) = c;
          cov(b, a) = c;
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
      const double lo = es.eigenvalues().minCoeff();
      const double hi = es.eigenvalues().maxCoeff();
      if (!(lo > 0.0) || hi / lo > 1e12) {
        return std::numeric_limits<double>::quiet_NaN();
      }
      const Eigen::VectorXd sol =
          es.eigenvectors() *
          (es.eigenvectors().transpose() * mu).cwiseQuotient(es.eigenvalues());
      const double t2 = dn * mu.dot(sol);
      return (t2 - model.center(n)) / model.scale(n);
    }
    default:
      throw validation_error("run_experiment: unsupported statistic kind");
  }
}

std::vector<double> default_z_grid() {
  // Integers -6..6 without the open interval (-1, 1).
  std::vector<double> g;
  for (int z = -6; z <= 6; ++z) {
    if (std::abs(z) >= 1) g.push_back(z);
  }
  return g;
}

// Poisson(1) weight for the multiplier bootstrap.
long poisson1(Rng& rng) {
  const double limit = std::exp(-1.0);
  long k = 0;
  double prod = rng.u01();
  while (prod > limit) {
    ++k;
    prod *= rng.u01();
  }
  return k;
}

double bootstrap_uniform_distance(const std::vector<double>& sorted, Rng& rng) {
  const auto n = static_cast<long>(sorted.size());
  double total = 0.0;
  std::vector<long> w(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) {
    w[static_cast<size_t>(i)] = poisson1(rng);
    total += static_cast<double>(w[static_cast<size_t>(i)]);
  }
  if (total <= 0.0) return -1.0;
  double d = 0.0;
  double cum = 0.0;
  for (long i = 0; i < n; ++i) {
    const double phi = norm_cdf(sorted[static_cast<size_t>(i)]);
    const double lo = cum / total;
    cum += static_cast<double>(w[static_cast<size_t>(i)]);
    const double hi = cum / total;
    d = std::max(d, std::max(std::fabs(hi - phi), std::fabs(phi - lo)));
  }
  return d;
}

}  // namespace

SimulationRun run_experiment(const ExperimentConfig& cfg) {
  if (cfg.model.effectively_degenerate()) {
    throw degeneracy_error("run_experiment: sigma1 = 0 for this model");
  }
  if (cfg.n_grid.empty()) throw validation_error("run_experiment: empty n grid");
  if (cfg.replicates < 2) {
    throw validation_error("run_experiment: need at least 2 replicates");
  }
  const auto t0 = std::chrono::steady_clock::now();
  SimulationRun run;
  run.kind = cfg.model.kind;
  run.seed = cfg.seed;
  const std::vector<double> z_grid =
      cfg.z_grid.empty() ? default_z_grid() : cfg.z_grid;
  const Rng root(cfg.seed);
  for (size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    const long n = cfg.n_grid[ni];
    std::vector<double> values(static_cast<size_t>(cfg.replicates));
    parallel_chunks(cfg.replicates, cfg.workers, [&](long first, long last) {
      std::vector<double> buf;
      for (long r = first; r < last; ++r) {
        Rng rng = root.stream(static_cast<std::uint64_t>(ni),
                              static_cast<std::uint64_t>(r));
        values[static_cast<size_t>(r)] =
            standardized_replicate(cfg.model, n, rng, buf);
      }
    });
    PerNResult res;
    res.n = n;
    std::vector<double> finite;
    finite.reserve(values.size());
    for (double v : values) {
      if (std::isnan(v)) {
        ++res.sentinel_count;
      } else {
        finite.push_back(v);
      }
    }
    if (finite.empty()) {
      throw validation_error("run_experiment: all replicates undefined");
    }
    std::sort(finite.begin(), finite.end());
    res.uniform_distance = uniform_ks_distance(finite);
    res.weighted_poly =
        weighted_distance(finite, z_grid, DistanceWeight::Polynomial, 3.0);
    res.weighted_exp =
        weighted_distance(finite, z_grid, DistanceWeight::Exponential);
    res.z_grid = z_grid;
    res.empirical_gap.reserve(z_grid.size());
    for (double z : z_grid) {
      res.empirical_gap.push_back(
          std::fabs(empirical_cdf(finite, z) - norm_cdf(z)));
    }
    if (cfg.keep_values) res.values = std::move(finite);
    run.per_n.push_back(std::move(res));
  }

  std::vector<std::pair<double, double>> pts;
  for (const auto& r : run.per_n) {
    if (r.uniform_distance > 0.0) {
      pts.emplace_back(static_cast<double>(r.n), r.uniform_distance);
    }
  }
  run.rate_valid = pts.size() >= 3 && pts.size() == run.per_n.size();
  run.rate.predicted_order = cfg.predicted_order;
  if (run.rate_valid) run.rate = rate_fit(pts, cfg.predicted_order);

  // Bootstrap band for the fitted slope (multiplier bootstrap over
  // replicates within each n).
  if (run.rate_valid && cfg.bootstrap > 0 && cfg.keep_values) {
    std::vector<double> slopes(static_cast<size_t>(cfg.bootstrap));
    const Rng boot_root = root.stream(0xb007, 0);
    parallel_chunks(cfg.bootstrap, cfg.workers, [&](long first, long last) {
      for (long b = first; b < last; ++b) {
        std::vector<std::pair<double, double>> bpts;
        bool ok = true;
        for (size_t ni = 0; ni < run.per_n.size(); ++ni) {
          Rng rng = boot_root.stream(static_cast<std::uint64_t>(b),
                                     static_cast<std::uint64_t>(ni));
          const double d = bootstrap_uniform_distance(run.per_n[ni].values, rng);
          if (!(d > 0.0)) { ok = false; break; }
          bpts.emplace_back(static_cast<double>(run.per_n[ni].n), d);
        }
        slopes[static_cast<size_t>(b)] =
            ok ? rate_fit(bpts, cfg.predicted_order).slope
               : std::numeric_limits<double>::quiet_NaN();
      }
    });
    double mean = 0.0;
    long cnt = 0;
    for (double s : slopes) {
      if (!std::isnan(s)) { mean += s; ++cnt; }
    }
    if (cnt > 1) {
      mean /= static_cast<double>(cnt);
      double var = 0.0;
      for (double s : slopes) {
        if (!std::isnan(s)) var += (s - mean) * (s - mean);
      }
      var /= static_cast<double>(cnt - 1);
      run.rate.ci_half_width = 1.96 * std::sqrt(var);
    }
  }
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

json SimulationRun::to_json() const {
  json j;
  j["digest"] = digest;
  j["seed"] = seed;
  j["statistic"] = to_string(kind);
  j["wall_seconds"] = wall_seconds;
  json per = json::array();
  for (const auto& r : per_n) {
    json e;
    e["n"] = r.n;
    e["uniform_distance"] = r.uniform_distance;
    e["weighted_poly"] = r.weighted_poly;
    e["weighted_exp"] = r.weighted_exp;
    e["sentinel_count"] = r.sentinel_count;
    e["z_grid"] = r.z_grid;
    e["empirical_gap"] = r.empirical_gap;
    per.push_back(e);
  }
  j["per_n"] = per;
  j["rate"] = {{"valid", rate_valid},
               {"slope", rate.slope},
               {"intercept", rate.intercept},
               {"ci_half_width", rate.ci_half_width},
               {"predicted_order", rate.predicted_order}};
  return j;
}

std::string SimulationRun::distances_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "n,uniform_distance,weighted_poly,weighted_exp,sentinel_count\n";
  for (const auto& r : per_n) {
    os << r.n << ',' << r.uniform_distance << ',' << r.weighted_poly << ','
       << r.weighted_exp << ',' << r.sentinel_count << '\n';
  }
  return os.str();
}

std::string SimulationRun::loglog_data() const {
  std::ostringstream os;
  os.precision(17);
  for (const auto& r : per_n) {
    os << std::log(static_cast<double>(r.n)) << ' '
       << std::log(r.uniform_distance) << '\n';
  }
  return os.str();
}

BoundVsTruthResult bound_vs_truth(const SmoothStatisticModel& model,
                                  const std::vector<long>& n_grid,
                                  const std::vector<double>& z_grid,
                                  long replicates, std::uint64_t seed,
                                  int workers) {
  if (!model.V3.finite) {
    throw infinite_moment_error("bound_vs_truth: ||V||_3 is infinite");
  }
  ExperimentConfig cfg;
  cfg.model = model;
  cfg.n_grid = n_grid;
  cfg.replicates = replicates;
  cfg.z_grid = z_grid;
  cfg.seed = seed;
  cfg.workers = workers;
  cfg.bootstrap = 0;
  const SimulationRun run = run_experiment(cfg);

  BoundVsTruthResult out;
  for (const auto& per : run.per_n) {
    const auto c = iid_p3_constants(model.C1(), model.epsilon, model.norm_L,
                                    model.sigma1, model.V2.value,
                                    model.V3.value, per.n);
    out.constants.emplace_back(per.n, c);
    const double sqn = std::sqrt(static_cast<double>(per.n));
    const double z_hi =
        3.0 * model.C1() * model.epsilon * model.epsilon * sqn / model.sigma1;
    double sup = 0.0;
    for (size_t i = 0; i < per.z_grid.size(); ++i) {
      BoundVsTruthRow row;
      row.n = per.n;
      row.z = per.z_grid[i];
      row.empirical = per.empirical_gap[i];
      const double az = std::fabs(row.z);
      row.shape = (c.A1 / (az * az * az) + c.A2 * std::exp(-az / 3.0)) / sqn;
      row.implied_constant = row.empirical / row.shape;
      row.in_range = az >= 1.0 && az <= z_hi;
      if (row.in_range) sup = std::max(sup, row.implied_constant);
      out.rows.push_back(row);
    }
    out.sup_implied.emplace_back(per.n, sup);
  }
  return out;
}

std::string BoundVsTruthResult::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "n,z,empirical,shape,implied_constant,in_range\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.z << ',' << r.empirical << ',' << r.shape << ','
       << r.implied_constant << ',' << (r.in_range ? 1 : 0) << '\n';
  }
  return os.str();
}

double gamma_z_estimate(const std::vector<std::vector<XiEtaAtom>>& comps,
                        double z, double prob_delta_exceeds) {
  const double az = std::fabs(z);
  double total = prob_delta_exceeds;
  // G_xi((|z|+1)/3)
  const double cut = (az + 1.0) / 3.0;
  for (const auto& comp : comps) {
    for (const auto& a : comp) {
      if (std::fabs(a.xi) > cut) total += a.prob;
    }
  }
  // sum_i P(|W - xi_i| > (|z|-2)/3) P(|eta_i| > 1) by enumeration.
  const double cut2 = (az - 2.0) / 3.0;
  for (size_t i = 0; i < comps.size(); ++i) {
    double p_eta = 0.0;
    for (const auto& a : comps[i]) {
      if (std::fabs(a.eta) > 1.0) p_eta += a.prob;
    }
    if (p_eta == 0.0) continue;
    double p_w = 0.0;
    const std::function<void(size_t, double, double)> walk =
        [&](size_t j, double sum, double prob) {
          if (j == comps.size()) {
            if (std::fabs(sum) > cut2) p_w += prob;
            return;
          }
          if (j == i) {
            walk(j + 1, sum, prob);
            return;
          }
          for (const auto& a : comps[j]) walk(j + 1, sum + a.xi, prob * a.prob);
        };
    walk(0, 0.0, 1.0);
    total += p_w * p_eta;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Optimality demo

namespace {

struct Ray {
  double above = std::numeric_limits<double>::infinity();  // P(sum > above)
  double below = -std::numeric_limits<double>::infinity(); // or P(sum < below)
  bool has_below = false;
};

// P(V > a, |V| > b) for the symmetric heavy-tail law.
double prob_ray_above(const LogPowerTail& v, double a, double b) {
  if (a >= b) return v.tail_one_sided(a);
  if (a >= -b) return v.tail_one_sided(b);
  // (a, -b) lies left of -b: P(a < V < -b) = P(b < V < -a).
  return v.tail_one_sided(b) +
         (v.tail_one_sided(b) - v.tail_one_sided(-a));
}

double event_prob_given_rest(const LogPowerTail& v, const Ray& ray, double s,
                             double b) {
  double p = prob_ray_above(v, ray.above - s, b);
  if (ray.has_below) p += prob_ray_above(v, -(ray.below - s), b);
  return p;
}

// Chernoff bound on P(sum of n iid truncated V > x) with V truncated to
// [-b, b] (zero outside), minimized over a grid of tilts. Rigorous upper
// bound: exp(-t x) * m(t)^n with m the exact truncated mgf by quadrature.
double chernoff_truncated_sum(const LogPowerTail& v, long n, double b,
                              double x) {
  if (!(x > 0.0)) return 1.0;
  const double v0 = v.v0();
  const auto mgf = [&](double t) {
    // mass outside truncation contributes exp(0) = 1 times its probability
    double m = v.tail_two_sided(b);
    m += 2.0 * v.height() * (t == 0.0 ? v0 : std::sinh(t * v0) / t);
    const double L = std::log(v0);
    const double hiL = std::log(b);
    if (hiL > L) {
      m += v.coeff() *
           adaptive_simpson(
               [&](double u) {
                 const double val = std::exp(u);
                 return 2.0 * std::cosh(t * val) * std::exp(-v.p() * u) /
                        (u * u);
               },
               L, hiL, 1e-14, 1e-12);
    }
    return m;
  };
  double best = 1.0;
  for (int i = 1; i <= 60; ++i) {
    const double t = (30.0 / b) * static_cast<double>(i) / 60.0;
    const double lnb = -t * x + static_cast<double>(n) * std::log(mgf(t));
    best = std::min(best, std::exp(lnb));
  }
  return best;
}

}  // namespace

OptimalityReport optimality_demo(double p, const std::vector<double>& kappa_grid,
                                 long n, long replicates, std::uint64_t seed,
                                 int workers, bool linear_f) {
  if (!(p > 2.0)) throw validation_error("optimality_demo: p must exceed 2");
  if (n < 100) throw validation_error("optimality_demo: n too small");
  const DistributionSpec vspec = DistributionSpec::heavy_tail_log_corrected(p);
  const LogPowerTail& vt = vspec.tail_model();
  OptimalityReport rep;
  rep.p = p;
  rep.n = n;
  rep.replicates = replicates;
  rep.linear_f = linear_f;

  const double dn = static_cast<double>(n);
  const Rng root(seed);
  for (size_t ki = 0; ki < kappa_grid.size(); ++ki) {
    const double kappa = kappa_grid[ki];
    if (!(kappa * std::sqrt(dn) >= 1.0)) {
      throw validation_error("optimality_demo: need z = kappa sqrt(n) >= 1");
    }
    OptimalityPoint pt;
    pt.n = n;
    pt.kappa = kappa;
    pt.z = kappa * std::sqrt(dn);
    pt.w = std::pow(dn, 0.75) * std::sqrt(pt.z);

    // Event thresholds in terms of the raw sum.
    const double root_disc = std::sqrt(1.0 + 4.0 * kappa);
    Ray rayT;
    if (linear_f) {
      rayT.above = kappa * dn;
    } else {
      rayT.above = dn * 0.5 * (-1.0 + root_disc);
      rayT.below = -dn * 0.5 * (1.0 + root_disc);
      rayT.has_below = true;
    }
    Ray rayW;
    rayW.above = kappa * dn;
    Ray rayD;  // Delta > 2z <=> |sum| > sqrt(2) w
    rayD.above = std::sqrt(2.0) * pt.w;
    rayD.below = -rayD.above;
    rayD.has_below = true;

    const double x_min = linear_f ? rayW.above : rayT.above;
    const double b = x_min / 3.0;
    const double p_b = vt.tail_two_sided(b);

    std::vector<double> dT(static_cast<size_t>(replicates));
    std::vector<double> dW(static_cast<size_t>(replicates));
    std::vector<double> dD(static_cast<size_t>(replicates));
    parallel_chunks(replicates, workers, [&](long first, long last) {
      for (long r = first; r < last; ++r) {
        Rng rng = root.stream(static_cast<std::uint64_t>(ki),
                              static_cast<std::uint64_t>(r));
        double sum_rest = 0.0;     // all n-1 unconditioned draws
        double sum_rest2 = 0.0;    // first n-2 of them
        bool gate1 = true;         // max over n-1
        bool gate2 = true;         // max over n-2
        for (long i = 0; i + 1 < n; ++i) {
          const double x = vt.sample(rng);
          sum_rest += x;
          const bool small = std::fabs(x) <= b;
          gate1 = gate1 && small;
          if (i + 2 < n) {
            sum_rest2 += x;
            gate2 = gate2 && small;
          }
        }
        // One-jump term (Rao-Blackwellized over the jump magnitude).
        double t1 = 0.0, w1 = 0.0, d1 = 0.0;
        if (gate1) {
          t1 = dn * event_prob_given_rest(vt, rayT, sum_rest, b);
          w1 = dn * event_prob_given_rest(vt, rayW, sum_rest, b);
          d1 = dn * event_prob_given_rest(vt, rayD, sum_rest, b);
        }
        // Two-jump term: one sampled conditional jump, second integrated.
        double t2 = 0.0, w2 = 0.0, d2 = 0.0;
        if (gate2) {
          const double mag = vt.sample_tail_above(b, rng);
          const double jump = rng.u01() < 0.5 ? mag : -mag;
          const double scale = 0.5 * dn * (dn - 1.0) * p_b;
          t2 = scale * event_prob_given_rest(vt, rayT, sum_rest2 + jump, b);
          w2 = scale * event_prob_given_rest(vt, rayW, sum_rest2 + jump, b);
          d2 = scale * event_prob_given_rest(vt, rayD, sum_rest2 + jump, b);
        }
        dT[static_cast<size_t>(r)] = t1 + t2;
        dW[static_cast<size_t>(r)] = w1 + w2;
        dD[static_cast<size_t>(r)] = d1 + d2;
      }
    });
    const auto mean_se = [&](const std::vector<double>& xs) {
      double m = 0.0;
      for (double x : xs) m += x;
      m /= static_cast<double>(xs.size());
      double var = 0.0;
      for (double x : xs) var += (x - m) * (x - m);
      var /= static_cast<double>(xs.size()) *
             static_cast<double>(xs.size() - 1);
      return std::pair<double, double>(m, std::sqrt(var));
    };
    const auto [pT, seT] = mean_se(dT);
    const auto [pW, seW] = mean_se(dW);
    const auto [pD, seD] = mean_se(dD);
    (void)seD;
    pt.prob_T = pT;
    pt.prob_W = pW;
    pt.prob_delta = pD;
    pt.defect = pT - pW;
    {
      std::vector<double> diff(dT.size());
      for (size_t i = 0; i < dT.size(); ++i) diff[i] = dT[i] - dW[i];
      pt.defect_se = mean_se(diff).second;
    }
    pt.tail_delta = dn * vt.tail_one_sided(std::sqrt(2.0) * pt.w);

    // Certified remainders: three or more jumps (both events), and the
    // no-jump mass for each ray (Chernoff with the exact truncated mgf).
    double remainder = 2.0 * std::pow(dn * p_b, 3.0) / 6.0;
    const auto ray_remainder = [&](const Ray& ray) {
      double s = chernoff_truncated_sum(vt, n, b, ray.above);
      if (ray.has_below) s += chernoff_truncated_sum(vt, n, b, -ray.below);
      return s;
    };
    remainder += ray_remainder(rayT) + ray_remainder(rayW);
    pt.remainder_ratio = remainder / pt.tail_delta;
    pt.ratio = pt.defect / pt.tail_delta;
    pt.ratio_se = pt.defect_se / pt.tail_delta;
    rep.points.push_back(pt);
  }
  return rep;
}

json OptimalityReport::to_json() const {
  json j;
  j["p"] = p;
  j["n"] = n;
  j["replicates"] = replicates;
  j["linear_f"] = linear_f;
  json pts = json::array();
  for (const auto& pt : points) {
    pts.push_back({{"n", pt.n},
                   {"kappa", pt.kappa},
                   {"z", pt.z},
                   {"w", pt.w},
                   {"prob_T", pt.prob_T},
                   {"prob_W", pt.prob_W},
                   {"prob_delta", pt.prob_delta},
                   {"defect", pt.defect},
                   {"defect_se", pt.defect_se},
                   {"tail_delta", pt.tail_delta},
                   {"ratio", pt.ratio},
                   {"ratio_se", pt.ratio_se},
                   {"remainder_ratio", pt.remainder_ratio}});
  }
  j["points"] = pts;
  return j;
}

std::string OptimalityReport::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "n,kappa,z,defect,defect_se,tail_delta,ratio,ratio_se,remainder_ratio\n";
  for (const auto& pt : points) {
    os << pt.n << ',' << pt.kappa << ',' << pt.z << ',' << pt.defect << ','
       << pt.defect_se << ',' << pt.tail_delta << ',' << pt.ratio << ','
       << pt.ratio_se << ',' << pt.remainder_ratio << '\n';
  }
  return os.str();
}

std::vector<double> self_standardized(std::span<const double> values) {
  if (values.size() < 2) {
    throw validation_error("self_standardized: need at least 2 values");
  }
  double m = 0.0;
  for (double v : values) m += v;
  m /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - m) * (v - m);
  var /= static_cast<double>(values.size() - 1);
  const double sd = std::sqrt(var);
  std::vector<double> out(values.size());
  for (size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - m) / sd;
  return out;
}

}  // namespace nlbe
