#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nlbe/distribution.hpp"
#include "nlbe/statistics.hpp"

namespace nlbe {

// Raised by parse_config with every validation message joined (not just the
// first).
struct config_error : std::runtime_error {
  explicit config_error(const std::vector<std::string>& errors);
  std::vector<std::string> errors;
};

enum class Command { Bound, Simulate, Verify, Demo };

struct RunConfig {
  Command command = Command::Verify;

  // statistic section
  std::optional<StatKind> stat_kind;
  StatParams stat_params;

  // distribution section (observation law)
  std::optional<DistributionSpec> distribution;

  // bound section
  double p = 3.0;
  double epsilon = 0.5;
  double user_constant = 1.0;
  double be_constant = 0.56;
  double D = 1.0;
  long bound_n = 100;
  std::vector<double> bound_z_grid;

  // simulation section
  std::vector<long> n_grid;
  long replicates = 200000;
  std::vector<double> z_grid;
  std::uint64_t seed = 1;
  int workers = 0;
  int bootstrap = 500;

  // demo section
  double demo_p = 2.5;
  std::vector<double> kappa_grid;
  std::vector<long> demo_n_grid;
  long demo_replicates = 20000;
  bool demo_linear_f = false;

  // output section
  std::string out_dir = "out";
  std::vector<std::string> formats = {"json", "csv"};

  nlohmann::json normalized_json() const;
  std::string digest() const;  // FNV-1a over the canonical serialization
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_json(const nlohmann::json& j);

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
};

// Exit codes: 0 ok, 1 validation, 2 degeneracy, 3 runtime failure.
int dispatch(RunConfig config, const CliOverrides& overrides = {});

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace nlbe
