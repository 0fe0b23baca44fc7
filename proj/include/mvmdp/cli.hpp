#pragma once

// Command dispatch behind the mvmdp executable, plus the two batch
// experiments it exposes: beta sweeps and simulation cross-checks.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mvmdp/mdp.hpp"
#include "mvmdp/simulation.hpp"

namespace mvmdp::cli {

enum class Command { evaluate, solve_pi, solve_gd, multi_start, sweep_beta, simulate, check, wind_build };

/// Exit statuses of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitIo = 4;

const char* to_string(Command command) noexcept;
Command parse_command(const std::string& name);

struct RunConfig {
  Command command = Command::evaluate;
  std::string model_path;
  std::optional<std::string> policy_path;
  std::vector<double> beta_grid;
  std::uint64_t seed = 0;
  std::string output_path = ".";

  // solve-pi
  std::string exploration = "none";  // none | epsilon | ucb
  double epsilon = 0.05;
  double gamma = 1.0;
  double gamma_decay = 1.0;
  int budget = 100;
  int max_iterations = 0;
  // solve-gd
  double stop_ratio = 1e-3;
  // multi-start, sweep-beta
  int starts = 10;
  // simulate
  std::uint64_t horizon = 1'000'000;
  std::uint64_t burn_in = 1000;
  int batches = kDefaultBatches;
  bool dump_path = false;
  // check
  bool strict = false;
  // wind-build
  std::string scenario = "no-abandon";
  double beta = 0.1;
  std::optional<std::string> kernel_path;
};

/// Default seed: $MVMDP_SEED when set and numeric, else 0.
std::uint64_t default_seed();

/// Throws ValidationError (or IoError for missing files) when the config is unusable.
void validate(const RunConfig& config);

/// Executes one command, writing artifacts under output_path and a summary to `log`.
/// Errors are reported on `err` and mapped to the exit statuses above.
int run(const RunConfig& config, std::ostream& log, std::ostream& err);

struct ParetoPoint {
  double beta = 0.0;
  double j_mean = 0.0;
  double j_var = 0.0;
  double j_combined = 0.0;
  std::string policy_id;
};

struct LocalOptimum {
  double beta;
  std::string policy_id;
  double j_mean;
  double j_var;
  double j_combined;
};

struct SweepResult {
  std::vector<ParetoPoint> points;        // ascending beta
  std::vector<LocalOptimum> optima;       // distinct final policies per beta
  std::vector<std::pair<double, std::string>> failures;
  std::string pareto_csv() const;         // beta,j_mean,j_var,j_combined
  std::string optima_csv() const;         // beta,policy_id,j_mean,j_var,j_combined
};

/// Runs multi_start on model.with_beta(b) for every b of the grid. A failing
/// beta is recorded in `failures` and skipped.
SweepResult sweep_beta(const MdpModel& model_family, const std::vector<double>& beta_grid,
                       int starts_per_beta, std::uint64_t seed);

struct MetricAgreement {
  std::string metric;
  double analytic;
  double estimate;
  double half_width;
  bool pass;  // |analytic - estimate| <= 3 half_width
};

struct CrossCheckReport {
  std::vector<MetricAgreement> metrics;  // j_mean, j_var, j_combined
  SimulationEstimate estimate;

  bool all_pass() const;
  std::string to_json() const;
};

CrossCheckReport cross_check(const MdpModel& model, const AnyPolicy& policy, std::uint64_t horizon,
                             std::uint64_t seed, std::uint64_t burn_in = 1000,
                             int batches = kDefaultBatches);

}  // namespace mvmdp::cli
