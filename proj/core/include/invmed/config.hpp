#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "invmed/evolution.hpp"
#include "invmed/forward.hpp"
#include "invmed/saddle.hpp"

namespace invmed {

/// Flat key = value run configuration.  Precedence: flag overrides > file >
/// defaults.  Unknown keys are rejected; every numeric field is
/// range-checked at parse time.
struct RunConfig {
  std::string command;

  int nx = 33;
  int ny = 33;
  double mu_bar = 1.0;
  double g_const = 1.0;
  std::string inclusions = "disk 0.3 0.7 0.15 5.0";
  double noise = 0.0;
  std::uint64_t seed = 1;

  double epsilon = 1e-2;
  int s = 1;
  double t = 1.0;
  std::string probe_method = "green";  // green | adjoint
  bool normalize = true;

  int max_iter = 500;
  double tol = 1e-10;
  double theta = 0.5;
  double tau = 1e-6;
  std::string mode = "neumann";   // neumann | dirichlet
  std::string engine = "coupled"; // coupled | adi
  std::string epsilons = "1e-1,1e-2,1e-3,1e-4";

  double T = 0.1;
  int nt = 20;
  double alpha = 1.0;
  std::string y0_spec = "mode 1 1";  // "mode kx ky" or "disk cx cy r amp"
  std::string drift = "0.3 0.5 0.4 0.0";
  double move_radius = 0.15;
  double move_amp = 5.0;

  std::string solver = "direct";  // direct | cg
  double cg_tol = 1e-10;
  int cg_max_iter = 0;

  std::string out = "invmed_out";
};

/// All recognized config keys, in echo order.
const std::vector<std::string>& config_keys();

/// Applies one key = value assignment; throws ConfigError naming the key
/// on unknown keys or out-of-range values.
void apply_key(RunConfig& cfg, const std::string& key, const std::string& value);

/// Loads `key = value` lines (# comments, blank lines allowed) and applies
/// flag overrides on top, then re-validates cross-field constraints.
RunConfig parse_config(const std::optional<std::string>& config_path,
                       const std::vector<std::pair<std::string, std::string>>& overrides);

/// Fully-resolved `key = value` echo, one line per key in fixed order.
std::string echo_config(const RunConfig& cfg);

/// Derived objects.
Medium medium_from_config(const RunConfig& cfg);
std::vector<double> epsilons_from_config(const RunConfig& cfg);
LinearDrift drift_from_config(const RunConfig& cfg);
SaddleConfig saddle_from_config(const RunConfig& cfg);
SolverConfig solver_from_config(const RunConfig& cfg);

}  // namespace invmed
