#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "nlbe/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Berry-Esseen bound evaluation and Monte Carlo verification for "
      "smooth nonlinear statistics"};

  std::string config_path;
  app.add_option("--config", config_path, "path to the JSON run configuration")
      ->required();
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  int workers = 0;
  auto* workers_opt =
      app.add_option("--workers", workers, "override the worker count");
  std::string out_dir;
  auto* out_opt =
      app.add_option("--out", out_dir, "override the output directory");

  CLI11_PARSE(app, argc, argv);

  nlbe::RunConfig cfg;
  try {
    cfg = nlbe::parse_config(config_path);
  } catch (const nlbe::config_error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  nlbe::CliOverrides overrides;
  if (seed_opt->count() > 0) overrides.seed = seed;
  if (workers_opt->count() > 0) overrides.workers = workers;
  if (out_opt->count() > 0) overrides.out_dir = out_dir;
  return nlbe::dispatch(std::move(cfg), overrides);
}
