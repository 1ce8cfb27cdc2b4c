#include "nlbe/config.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nlbe/bounds.hpp"
#include "nlbe/simulation.hpp"
#include "nlbe/verify.hpp"

namespace nlbe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::ostringstream os;
  os << "configuration invalid (" << errors.size() << " error(s)):";
  for (const auto& e : errors) os << "\n  - " << e;
  return os.str();
}

struct Collector {
  std::vector<std::string> errors;
  void add(const std::string& e) { errors.push_back(e); }
  void check_keys(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& where) {
    if (!j.is_object()) {
      add(where + ": expected an object");
      return;
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool ok = false;
      for (const char* k : allowed) {
        if (it.key() == k) { ok = true; break; }
      }
      if (!ok) add(where + ": unknown key '" + it.key() + "'");
    }
  }
};

template <typename T>
T get_or(const json& j, const char* key, T fallback, Collector& errs,
         const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const std::exception&) {
    errs.add(where + ": key '" + std::string(key) + "' has the wrong type");
    return fallback;
  }
}

}  // namespace

config_error::config_error(const std::vector<std::string>& e)
    : std::runtime_error(join_errors(e)), errors(e) {}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw config_error({"cannot open config file: " + path});
  }
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw config_error({std::string("config is not valid JSON: ") + e.what()});
  }
  return parse_config_json(j);
}

RunConfig parse_config_json(const json& j) {
  Collector errs;
  RunConfig cfg;
  errs.check_keys(j,
                  {"command", "statistic", "distribution", "bound",
                   "simulation", "demo", "output"},
                  "config");

  const std::string cmd = get_or<std::string>(j, "command", "", errs, "config");
  if (cmd == "bound") {
    cfg.command = Command::Bound;
  } else if (cmd == "simulate") {
    cfg.command = Command::Simulate;
  } else if (cmd == "verify") {
    cfg.command = Command::Verify;
  } else if (cmd == "demo") {
    cfg.command = Command::Demo;
  } else {
    errs.add("config: 'command' must be one of bound|simulate|verify|demo");
  }

  if (j.contains("statistic")) {
    const json& s = j.at("statistic");
    errs.check_keys(s, {"kind", "mu", "rho"}, "statistic");
    const std::string kind = get_or<std::string>(s, "kind", "", errs, "statistic");
    if (kind == "student") {
      cfg.stat_kind = StatKind::Student;
    } else if (kind == "pearson") {
      cfg.stat_kind = StatKind::Pearson;
    } else if (kind == "hotelling") {
      cfg.stat_kind = StatKind::Hotelling;
    } else {
      errs.add("statistic: 'kind' must be student|pearson|hotelling");
    }
    if (s.contains("mu")) {
      if (s.at("mu").is_array()) {
        cfg.stat_params.mu = s.at("mu").get<std::vector<double>>();
      } else if (s.at("mu").is_number()) {
        cfg.stat_params.mu = {s.at("mu").get<double>()};
      } else {
        errs.add("statistic: 'mu' must be a number or an array");
      }
    }
    cfg.stat_params.rho = get_or<double>(s, "rho", 0.0, errs, "statistic");
  }

  if (j.contains("distribution")) {
    try {
      cfg.distribution = DistributionSpec::from_json(j.at("distribution"));
    } catch (const std::exception& e) {
      errs.add(std::string("distribution: ") + e.what());
    }
  }

  if (j.contains("bound")) {
    const json& b = j.at("bound");
    errs.check_keys(b,
                    {"p", "epsilon", "user_constant", "be_constant", "D", "n",
                     "z_grid"},
                    "bound");
    cfg.p = get_or<double>(b, "p", cfg.p, errs, "bound");
    cfg.epsilon = get_or<double>(b, "epsilon", cfg.epsilon, errs, "bound");
    cfg.user_constant =
        get_or<double>(b, "user_constant", cfg.user_constant, errs, "bound");
    cfg.be_constant =
        get_or<double>(b, "be_constant", cfg.be_constant, errs, "bound");
    cfg.D = get_or<double>(b, "D", cfg.D, errs, "bound");
    cfg.bound_n = get_or<long>(b, "n", cfg.bound_n, errs, "bound");
    cfg.bound_z_grid = get_or<std::vector<double>>(b, "z_grid", {}, errs, "bound");
    if (cfg.p <= 2.0) errs.add("bound: 'p' must exceed 2");
    if (cfg.epsilon <= 0.0) errs.add("bound: 'epsilon' must be positive");
    if (cfg.bound_n < 1) errs.add("bound: 'n' must be at least 1");
  }

  if (j.contains("simulation")) {
    const json& s = j.at("simulation");
    errs.check_keys(
        s, {"n_grid", "replicates", "z_grid", "seed", "workers", "bootstrap"},
        "simulation");
    cfg.n_grid = get_or<std::vector<long>>(s, "n_grid", {}, errs, "simulation");
    cfg.replicates =
        get_or<long>(s, "replicates", cfg.replicates, errs, "simulation");
    cfg.z_grid = get_or<std::vector<double>>(s, "z_grid", {}, errs, "simulation");
    cfg.seed = get_or<std::uint64_t>(s, "seed", cfg.seed, errs, "simulation");
    cfg.workers = get_or<int>(s, "workers", cfg.workers, errs, "simulation");
    cfg.bootstrap = get_or<int>(s, "bootstrap", cfg.bootstrap, errs, "simulation");
    if (cfg.replicates < 2) errs.add("simulation: 'replicates' must be >= 2");
    if (cfg.workers < 0) errs.add("simulation: 'workers' must be >= 0");
    if (cfg.bootstrap < 0) errs.add("simulation: 'bootstrap' must be >= 0");
    for (long n : cfg.n_grid) {
      if (n < 2) errs.add("simulation: every n in 'n_grid' must be >= 2");
    }
  }

  if (j.contains("demo")) {
    const json& d = j.at("demo");
    errs.check_keys(d, {"p", "kappa_grid", "n_grid", "replicates", "linear_f"},
                    "demo");
    cfg.demo_p = get_or<double>(d, "p", cfg.demo_p, errs, "demo");
    cfg.kappa_grid =
        get_or<std::vector<double>>(d, "kappa_grid", {}, errs, "demo");
    cfg.demo_n_grid = get_or<std::vector<long>>(d, "n_grid", {}, errs, "demo");
    cfg.demo_replicates =
        get_or<long>(d, "replicates", cfg.demo_replicates, errs, "demo");
    cfg.demo_linear_f =
        get_or<bool>(d, "linear_f", cfg.demo_linear_f, errs, "demo");
    if (cfg.demo_p <= 2.0) errs.add("demo: 'p' must exceed 2");
    if (cfg.demo_replicates < 2) errs.add("demo: 'replicates' must be >= 2");
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    errs.check_keys(o, {"directory", "formats"}, "output");
    cfg.out_dir = get_or<std::string>(o, "directory", cfg.out_dir, errs, "output");
    cfg.formats = get_or<std::vector<std::string>>(o, "formats", cfg.formats,
                                                   errs, "output");
    for (const auto& f : cfg.formats) {
      if (f != "json" && f != "csv" && f != "plot") {
        errs.add("output: unknown format '" + f + "'");
      }
    }
  }

  // Cross-section requirements.
  const bool needs_model =
      cfg.command == Command::Bound || cfg.command == Command::Simulate;
  if (needs_model) {
    if (!cfg.stat_kind) errs.add("config: 'statistic' section required");
    if (!cfg.distribution) errs.add("config: 'distribution' section required");
  }
  if (cfg.command == Command::Simulate && cfg.n_grid.empty()) {
    errs.add("simulation: 'n_grid' must be non-empty");
  }
  if (cfg.command == Command::Demo && cfg.demo_n_grid.empty() &&
      cfg.kappa_grid.empty()) {
    errs.add("demo: provide 'n_grid' (kappa = n^{1/4}) or 'kappa_grid'");
  }

  if (!errs.errors.empty()) throw config_error(errs.errors);
  return cfg;
}

json RunConfig::normalized_json() const {
  json j;
  switch (command) {
    case Command::Bound: j["command"] = "bound"; break;
    case Command::Simulate: j["command"] = "simulate"; break;
    case Command::Verify: j["command"] = "verify"; break;
    case Command::Demo: j["command"] = "demo"; break;
  }
  if (stat_kind) {
    json s;
    s["kind"] = to_string(*stat_kind);
    if (!stat_params.mu.empty()) s["mu"] = stat_params.mu;
    s["rho"] = stat_params.rho;
    j["statistic"] = s;
  }
  if (distribution) j["distribution"] = distribution->to_json();
  j["bound"] = {{"p", p},
                {"epsilon", epsilon},
                {"user_constant", user_constant},
                {"be_constant", be_constant},
                {"D", D},
                {"n", bound_n},
                {"z_grid", bound_z_grid}};
  j["simulation"] = {{"n_grid", n_grid},       {"replicates", replicates},
                     {"z_grid", z_grid},       {"seed", seed},
                     {"workers", workers},     {"bootstrap", bootstrap}};
  j["demo"] = {{"p", demo_p},
               {"kappa_grid", kappa_grid},
               {"n_grid", demo_n_grid},
               {"replicates", demo_replicates},
               {"linear_f", demo_linear_f}};
  j["output"] = {{"directory", out_dir}, {"formats", formats}};
  return j;
}

std::string RunConfig::digest() const {
  // The digest identifies the experiment: everything except where the
  // artifacts land.
  json j = normalized_json();
  j.erase("output");
  const std::string canonical = j.dump();
  std::ostringstream os;
  os << std::hex << fnv1a64(canonical);
  return os.str();
}

namespace {

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[64];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_text(const fs::path& path, const std::string& header,
                const std::string& body) {
  std::ofstream out(path);
  out << header << body;
}

std::string csv_header(const RunConfig& cfg) {
  std::ostringstream os;
  os << "# digest=" << cfg.digest() << " seed=" << cfg.seed
     << " generated=" << timestamp() << "\n";
  return os.str();
}

bool wants(const RunConfig& cfg, const char* fmt) {
  for (const auto& f : cfg.formats) {
    if (f == fmt) return true;
  }
  return false;
}

int run_bound(const RunConfig& cfg) {
  const SmoothStatisticModel model = build_model(
      *cfg.stat_kind, cfg.stat_params, *cfg.distribution,
      ModelOptions{.epsilon = cfg.epsilon});
  if (model.effectively_degenerate()) {
    throw degeneracy_error("bound: model is degenerate (sigma1 = 0)");
  }
  const BoundInputs inputs = model.bound_inputs(cfg.bound_n, cfg.p);
  if (inputs.profile.mode() != MomentMode::Exact) {
    throw std::logic_error("bound: expected an exact moment path");
  }
  const auto constants =
      iid_p3_constants(model.C1(), model.epsilon, model.norm_L, model.sigma1,
                       model.V2.value, model.V3.value, cfg.bound_n);
  json out;
  out["digest"] = cfg.digest();
  out["seed"] = cfg.seed;
  out["model"] = {{"kind", to_string(model.kind)},
                  {"sigma1", model.sigma1},
                  {"norm_L", model.norm_L},
                  {"norm_L_numeric", model.norm_L_numeric},
                  {"M", model.M},
                  {"C1", model.C1()},
                  {"epsilon", model.epsilon},
                  {"V2", model.V2.value},
                  {"V3", model.V3.value},
                  {"moment_mode", "exact"}};
  out["n"] = cfg.bound_n;
  out["A1"] = constants.A1;
  out["A2"] = constants.A2;
  BoundReport uniform = uniform_fS_bound(inputs);
  uniform.user_constant = cfg.user_constant;
  out["uniform"] = uniform.to_json();
  json nonuni = json::array();
  std::vector<double> zs = cfg.bound_z_grid;
  if (zs.empty()) zs = {1.0, 2.0, 3.0, 4.0};
  std::ostringstream csv;
  csv << "label,value,equation_tag,z\n";
  for (const auto& t : uniform.terms) {
    csv << '"' << t.label << "\"," << t.value << ',' << t.equation_tag << ",\n";
  }
  for (double z : zs) {
    try {
      BoundReport rep = nonuniform_fS_bound(inputs, z);
      rep.user_constant = cfg.user_constant;
      nonuni.push_back(rep.to_json());
      for (const auto& t : rep.terms) {
        csv << '"' << t.label << "\"," << t.value << ',' << t.equation_tag
            << ',' << z << "\n";
      }
    } catch (const range_violation&) {
      nonuni.push_back(json{{"z", z}, {"error", "z outside the valid range"}});
    }
  }
  out["nonuniform"] = nonuni;

  fs::create_directories(cfg.out_dir);
  if (wants(cfg, "json")) {
    write_text(fs::path(cfg.out_dir) / "bound_report.json", "",
               out.dump(2) + "\n");
  }
  if (wants(cfg, "csv")) {
    write_text(fs::path(cfg.out_dir) / "bound_terms.csv", csv_header(cfg),
               csv.str());
  }
  std::cout << "bound: wrote report to " << cfg.out_dir << " (digest "
            << cfg.digest() << ")\n";
  return 0;
}

int run_simulate(const RunConfig& cfg) {
  const DegeneracyReport deg =
      degeneracy_check(*cfg.stat_kind, cfg.stat_params, *cfg.distribution);
  if (deg.degenerate) {
    fs::create_directories(cfg.out_dir);
    json dj = deg.to_json();
    dj["digest"] = cfg.digest();
    dj["seed"] = cfg.seed;
    write_text(fs::path(cfg.out_dir) / "degeneracy.json", "",
               dj.dump(2) + "\n");
    std::cerr << "simulate: refused, degenerate model: " << deg.witness << "\n";
    return 2;
  }
  const SmoothStatisticModel model = build_model(
      *cfg.stat_kind, cfg.stat_params, *cfg.distribution,
      ModelOptions{.epsilon = cfg.epsilon});
  ExperimentConfig ec;
  ec.model = model;
  ec.n_grid = cfg.n_grid;
  ec.replicates = cfg.replicates;
  ec.z_grid = cfg.z_grid;
  ec.seed = cfg.seed;
  ec.workers = cfg.workers;
  ec.bootstrap = cfg.bootstrap;
  SimulationRun run = run_experiment(ec);
  run.digest = cfg.digest();

  const BoundVsTruthResult bvt = bound_vs_truth(
      model, cfg.n_grid, run.per_n.front().z_grid, cfg.replicates, cfg.seed,
      cfg.workers);

  fs::create_directories(cfg.out_dir);
  if (wants(cfg, "json")) {
    json manifest = run.to_json();
    manifest["generated"] = timestamp();
    json sup = json::array();
    for (const auto& [n, s] : bvt.sup_implied) {
      sup.push_back({{"n", n}, {"sup_implied_constant", s}});
    }
    manifest["bound_vs_truth_sup"] = sup;
    write_text(fs::path(cfg.out_dir) / "run.json", "", manifest.dump(2) + "\n");
  }
  if (wants(cfg, "csv")) {
    write_text(fs::path(cfg.out_dir) / "distances.csv", csv_header(cfg),
               run.distances_csv());
    write_text(fs::path(cfg.out_dir) / "bound_vs_truth.csv", csv_header(cfg),
               bvt.csv());
  }
  {
    std::ostringstream head;  // deterministic comment line, gnuplot-safe
    head << "# digest=" << cfg.digest() << " seed=" << cfg.seed << "\n";
    write_text(fs::path(cfg.out_dir) / "loglog.dat", head.str(),
               run.loglog_data());
  }
  std::cout << "simulate: slope " << run.rate.slope << " (+/- "
            << run.rate.ci_half_width << "), artifacts in " << cfg.out_dir
            << "\n";
  return 0;
}

int run_verify(const RunConfig& cfg) {
  VerifyOptions opts;
  opts.seed = cfg.seed;
  const auto results = run_verification_suite(opts);
  json manifest;
  manifest["digest"] = cfg.digest();
  manifest["seed"] = cfg.seed;
  manifest["generated"] = timestamp();
  json checks = json::array();
  bool all = true;
  for (const auto& r : results) {
    checks.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    all = all && r.pass;
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail
              << "\n";
  }
  manifest["checks"] = checks;
  manifest["all_pass"] = all;
  fs::create_directories(cfg.out_dir);
  write_text(fs::path(cfg.out_dir) / "verify.json", "", manifest.dump(2) + "\n");
  return all ? 0 : 3;
}

int run_demo(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  json manifest;
  manifest["digest"] = cfg.digest();
  manifest["seed"] = cfg.seed;
  manifest["generated"] = timestamp();
  json reports = json::array();
  std::ostringstream csv;
  csv << "n,kappa,z,defect,defect_se,tail_delta,ratio,ratio_se,remainder_ratio\n";
  const auto emit = [&](const OptimalityReport& rep) {
    reports.push_back(rep.to_json());
    for (const auto& pt : rep.points) {
      csv << pt.n << ',' << pt.kappa << ',' << pt.z << ',' << pt.defect << ','
          << pt.defect_se << ',' << pt.tail_delta << ',' << pt.ratio << ','
          << pt.ratio_se << ',' << pt.remainder_ratio << '\n';
      std::cout << "demo: n=" << pt.n << " kappa=" << pt.kappa << " ratio="
                << pt.ratio << " (se " << pt.ratio_se << ", remainder "
                << pt.remainder_ratio << ")\n";
    }
  };
  if (!cfg.demo_n_grid.empty()) {
    for (long n : cfg.demo_n_grid) {
      std::vector<double> kappas = cfg.kappa_grid;
      if (kappas.empty()) {
        kappas = {std::pow(static_cast<double>(n), 0.25)};
      }
      emit(optimality_demo(cfg.demo_p, kappas, n, cfg.demo_replicates,
                           cfg.seed, cfg.workers, cfg.demo_linear_f));
    }
  } else {
    emit(optimality_demo(cfg.demo_p, cfg.kappa_grid, 1000, cfg.demo_replicates,
                         cfg.seed, cfg.workers, cfg.demo_linear_f));
  }
  manifest["reports"] = reports;
  if (wants(cfg, "json")) {
    write_text(fs::path(cfg.out_dir) / "demo.json", "", manifest.dump(2) + "\n");
  }
  if (wants(cfg, "csv")) {
    write_text(fs::path(cfg.out_dir) / "demo.csv", csv_header(cfg), csv.str());
  }
  return 0;
}

}  // namespace

int dispatch(RunConfig cfg, const CliOverrides& overrides) {
  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.workers) cfg.workers = *overrides.workers;
  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
  try {
    switch (cfg.command) {
      case Command::Bound: return run_bound(cfg);
      case Command::Simulate: return run_simulate(cfg);
      case Command::Verify: return run_verify(cfg);
      case Command::Demo: return run_demo(cfg);
    }
    return 3;
  } catch (const config_error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const degeneracy_error& e) {
    std::cerr << "degeneracy: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace nlbe
