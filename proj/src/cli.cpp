#include "mvmdp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>

#include <json.hpp>

#include "mvmdp/error.hpp"
#include "mvmdp/evaluation.hpp"
#include "mvmdp/io.hpp"
#include "mvmdp/sensitivity.hpp"
#include "mvmdp/solvers.hpp"
#include "mvmdp/wind_storage.hpp"

namespace mvmdp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::pair<Command, const char*> kCommandNames[] = {
    {Command::evaluate, "evaluate"},       {Command::solve_pi, "solve-pi"},
    {Command::solve_gd, "solve-gd"},       {Command::multi_start, "multi-start"},
    {Command::sweep_beta, "sweep-beta"},   {Command::simulate, "simulate"},
    {Command::check, "check"},             {Command::wind_build, "wind-build"},
};

}  // namespace

const char* to_string(Command command) noexcept {
  for (const auto& [c, name] : kCommandNames)
    if (c == command) return name;
  return "unknown";
}

Command parse_command(const std::string& name) {
  for (const auto& [c, n] : kCommandNames)
    if (name == n) return c;
  throw ValidationError("unknown command \"" + name + "\"");
}

std::uint64_t default_seed() {
  const char* env = std::getenv("MVMDP_SEED");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(env, &end, 10);
  return *end == '\0' ? value : 0;
}

void validate(const RunConfig& config) {
  const bool needs_model = config.command != Command::wind_build;
  if (needs_model) {
    if (config.model_path.empty())
      throw ValidationError(std::string(to_string(config.command)) + " needs a model file");
    if (!fs::exists(config.model_path)) throw IoError("model file " + config.model_path + " not found");
  }
  if (config.policy_path && !fs::exists(*config.policy_path))
    throw IoError("policy file " + *config.policy_path + " not found");
  if (config.kernel_path && !fs::exists(*config.kernel_path))
    throw IoError("kernel file " + *config.kernel_path + " not found");
  if ((config.command == Command::evaluate || config.command == Command::simulate) &&
      !config.policy_path)
    throw ValidationError(std::string(to_string(config.command)) + " needs a policy file");
  if (config.command == Command::sweep_beta && config.beta_grid.empty())
    throw ValidationError("sweep-beta needs a nonempty beta grid");
  for (std::size_t k = 0; k < config.beta_grid.size(); ++k) {
    if (!(config.beta_grid[k] > 0.0)) throw ValidationError("beta grid values must be positive");
    if (k > 0 && !(config.beta_grid[k] > config.beta_grid[k - 1]))
      throw ValidationError("beta grid must be strictly increasing");
  }
  if (config.exploration != "none" && config.exploration != "epsilon" && config.exploration != "ucb")
    throw ValidationError("exploration must be none, epsilon or ucb");
  if (config.scenario != "no-abandon" && config.scenario != "abandon")
    throw ValidationError("scenario must be no-abandon or abandon");
  if (config.starts < 1) throw ValidationError("starts must be at least 1");
  if (config.horizon < 2) throw ValidationError("horizon must be at least 2");
  if (config.batches < 2) throw ValidationError("batches must be at least 2");
}

std::string SweepResult::pareto_csv() const {
  io::CsvTable csv({"beta", "j_mean", "j_var", "j_combined"});
  for (const auto& p : points) csv.cell(p.beta).cell(p.j_mean).cell(p.j_var).cell(p.j_combined).end_row();
  return csv.str();
}

std::string SweepResult::optima_csv() const {
  io::CsvTable csv({"beta", "policy_id", "j_mean", "j_var", "j_combined"});
  for (const auto& o : optima)
    csv.cell(o.beta).cell(o.policy_id).cell(o.j_mean).cell(o.j_var).cell(o.j_combined).end_row();
  return csv.str();
}

SweepResult sweep_beta(const MdpModel& model_family, const std::vector<double>& beta_grid,
                       int starts_per_beta, std::uint64_t seed) {
  if (beta_grid.empty()) throw ValidationError("beta grid is empty");
  std::vector<double> grid = beta_grid;
  std::sort(grid.begin(), grid.end());

  SweepResult result;
  for (double beta : grid) {
    try {
      const MdpModel model = model_family.with_beta(beta);
      const MultiStartResult ms = multi_start(model, starts_per_beta, seed);
      const auto& best = ms.best_report;
      result.points.push_back(
          {beta, best.j_mean, best.j_var, best.j_combined, io::policy_id(ms.best_policy)});

      std::map<std::string, const PolicyIterationResult*> seen;
      for (const auto& run : ms.runs) seen.emplace(io::policy_id(run.policy), &run);
      std::vector<LocalOptimum> local;
      for (const auto& [id, run] : seen)
        local.push_back({beta, id, run->report.j_mean, run->report.j_var, run->report.j_combined});
      std::stable_sort(local.begin(), local.end(), [](const auto& a, const auto& b) {
        return a.j_combined > b.j_combined;
      });
      result.optima.insert(result.optima.end(), local.begin(), local.end());
    } catch (const Error& e) {
      result.failures.emplace_back(beta, e.what());
    }
  }
  return result;
}

bool CrossCheckReport::all_pass() const {
  return std::all_of(metrics.begin(), metrics.end(), [](const auto& m) { return m.pass; });
}

std::string CrossCheckReport::to_json() const {
  json doc;
  json list = json::array();
  for (const auto& m : metrics)
    list.push_back({{"metric", m.metric},
                    {"analytic", m.analytic},
                    {"estimate", m.estimate},
                    {"half_width", m.half_width},
                    {"pass", m.pass}});
  doc["metrics"] = std::move(list);
  doc["estimate"] = json::parse(io::estimate_to_json(estimate));
  doc["all_pass"] = all_pass();
  return doc.dump(1) + "\n";
}

CrossCheckReport cross_check(const MdpModel& model, const AnyPolicy& policy, std::uint64_t horizon,
                             std::uint64_t seed, std::uint64_t burn_in, int batches) {
  const EvaluationReport analytic =
      std::visit([&](const auto& p) { return evaluate(model, p); }, policy);
  SimulationOptions options;
  options.burn_in = burn_in;
  const SamplePath path = simulate_path(model, policy, horizon, seed, 0, options);
  CrossCheckReport report;
  report.estimate = estimate_metrics(path, model.beta(), batches);
  report.estimate.seed = seed;
  const auto add = [&](const char* name, double a, double e, double hw) {
    report.metrics.push_back({name, a, e, hw, std::abs(a - e) <= 3.0 * hw});
  };
  add("j_mean", analytic.j_mean, report.estimate.j_mean_hat, report.estimate.mean_half_width);
  add("j_var", analytic.j_var, report.estimate.j_var_hat, report.estimate.var_half_width);
  add("j_combined", analytic.j_combined, report.estimate.j_combined_hat,
      report.estimate.combined_half_width);
  return report;
}

namespace {

class Artifacts {
 public:
  explicit Artifacts(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& text) {
    io::write_text(dir_ / name, text);
    written_.push_back((dir_ / name).string());
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
};

void log_metrics(std::ostream& log, const EvaluationReport& r) {
  log << "j_mean=" << io::format_number(r.j_mean) << " j_var=" << io::format_number(r.j_var)
      << " j_combined=" << io::format_number(r.j_combined) << "\n";
}

DeterministicPolicy initial_deterministic(const RunConfig& config, const MdpModel& model) {
  if (!config.policy_path) return sample_initial_policy(model, config.seed, 0);
  AnyPolicy p = io::read_policy(*config.policy_path, model);
  if (const auto* d = std::get_if<DeterministicPolicy>(&p)) return *d;
  throw ValidationError("solve-pi needs a deterministic initial policy");
}

int cmd_evaluate(const RunConfig& config, Artifacts& out, std::ostream& log) {
  const MdpModel model = io::read_model(config.model_path);
  const AnyPolicy policy = io::read_policy(*config.policy_path, model);
  if (const auto* d = std::get_if<DeterministicPolicy>(&policy)) {
    const EvaluationReport report = evaluate(model, *d);
    out.write("report.json", io::report_to_json(report));
    out.write("scores.csv", io::table_csv(improvement_vector(model, report, *d).score));
    log_metrics(log, report);
  } else {
    const auto& theta = std::get<RandomizedPolicy>(policy);
    const EvaluationReport report = evaluate(model, theta);
    out.write("report.json", io::report_to_json(report));
    out.write("gradient.csv", io::table_csv(derivative_randomized(model, theta, report)));
    log_metrics(log, report);
  }
  return kExitOk;
}

int cmd_solve_pi(const RunConfig& config, Artifacts& out, std::ostream& log) {
  const MdpModel model = io::read_model(config.model_path);
  const DeterministicPolicy initial = initial_deterministic(config, model);
  if (config.exploration == "none") {
    PolicyIterationOptions options;
    options.max_iterations = config.max_iterations;
    const PolicyIterationResult result = policy_iteration(model, initial, options);
    out.write("trace.csv", io::trace_csv(result.trace));
    out.write("policy.json", io::policy_to_json(result.policy));
    out.write("report.json", io::report_to_json(result.report));
    log << "improvement steps: " << result.improvement_steps() << " ("
        << to_string(result.trace.stop_reason) << ")\n";
    log_metrics(log, result.report);
    return result.trace.converged ? kExitOk : kExitSolver;
  }
  ExplorationConfig ex;
  ex.mode = config.exploration == "ucb" ? ExplorationMode::ucb : ExplorationMode::epsilon_greedy;
  ex.epsilon = config.epsilon;
  ex.gamma = config.gamma;
  ex.gamma_decay = config.gamma_decay;
  ex.seed = config.seed;
  ex.budget = config.budget;
  const ExplorationResult result = ex.mode == ExplorationMode::ucb
                                       ? ucb_iteration(model, initial, ex)
                                       : epsilon_greedy_iteration(model, initial, ex);
  out.write("trace.csv", io::trace_csv(result.trace));
  out.write("policy.json", io::policy_to_json(result.best_policy));
  out.write("report.json", io::report_to_json(result.best_report));
  log << "evaluations: " << result.evaluations << "\n";
  log_metrics(log, result.best_report);
  return kExitOk;
}

int cmd_solve_gd(const RunConfig& config, Artifacts& out, std::ostream& log) {
  const MdpModel model = io::read_model(config.model_path);
  RandomizedPolicy initial = RandomizedPolicy::uniform(model);
  if (config.policy_path) {
    AnyPolicy p = io::read_policy(*config.policy_path, model);
    if (const auto* d = std::get_if<DeterministicPolicy>(&p))
      initial = RandomizedPolicy::one_hot(*d, model.num_actions());
    else
      initial = std::get<RandomizedPolicy>(p);
  }
  GradientConfig gd;
  gd.stop_ratio = config.stop_ratio;
  if (config.max_iterations > 0) gd.max_iterations = config.max_iterations;
  const GradientResult result = gradient_solver(model, initial, gd);
  out.write("trace.csv", io::trace_csv(result.trace));
  out.write("theta.json", io::policy_to_json(result.theta));
  out.write("report.json", io::report_to_json(result.report));
  log << "iterations: " << result.iterations << " (" << to_string(result.trace.stop_reason)
      << ")\n";
  log_metrics(log, result.report);
  return result.trace.converged ? kExitOk : kExitSolver;
}

int cmd_multi_start(const RunConfig& config, Artifacts& out, std::ostream& log) {
  const MdpModel model = io::read_model(config.model_path);
  MultiStartOptions options;
  options.num_starts = config.starts;
  options.seed = config.seed;
  options.iteration.max_iterations = config.max_iterations;
  const MultiStartResult result = multi_start(model, options);
  std::vector<DeterministicPolicy> finals;
  std::vector<EvaluationReport> reports;
  bool converged = true;
  for (const auto& run : result.runs) {
    finals.push_back(run.policy);
    reports.push_back(run.report);
    converged = converged && run.trace.converged;
  }
  out.write("runs.csv", io::metrics_csv(finals, reports));
  io::CsvTable optima({"j_combined"});
  for (double v : result.distinct_optima) optima.cell(v).end_row();
  out.write("optima.csv", optima.str());
  out.write("policy.json", io::policy_to_json(result.best_policy));
  out.write("report.json", io::report_to_json(result.best_report));
  log << "starts: " << config.starts << ", distinct optima: " << result.distinct_optima.size()
      << ", initial diversity: " << result.initial_diversity << "\n";
  log_metrics(log, result.best_report);
  return converged ? kExitOk : kExitSolver;
}

int cmd_sweep_beta(const RunConfig& config, Artifacts& out, std::ostream& log, std::ostream& err) {
  const MdpModel model = io::read_model(config.model_path);
  const SweepResult sweep = sweep_beta(model, config.beta_grid, config.starts, config.seed);
  out.write("pareto.csv", sweep.pareto_csv());
  out.write("optima.csv", sweep.optima_csv());
  for (const auto& [beta, what] : sweep.failures)
    err << "beta " << io::format_number(beta) << " skipped: " << what << "\n";
  log << "points: " << sweep.points.size() << ", failed betas: " << sweep.failures.size() << "\n";
  return sweep.points.empty() ? kExitSolver : kExitOk;
}

int cmd_simulate(const RunConfig& config, Artifacts& out, std::ostream& log) {
  const MdpModel model = io::read_model(config.model_path);
  const AnyPolicy policy = io::read_policy(*config.policy_path, model);
  const CrossCheckReport report =
      cross_check(model, policy, config.horizon, config.seed, config.burn_in, config.batches);
  out.write("estimate.json", report.to_json());
  if (config.dump_path) {
    SimulationOptions options;
    options.burn_in = config.burn_in;
    out.write("path.csv",
              io::path_csv(simulate_path(model, policy, config.horizon, config.seed, 0, options)));
  }
  for (const auto& m : report.metrics)
    log << m.metric << ": analytic=" << io::format_number(m.analytic)
        << " estimate=" << io::format_number(m.estimate)
        << " half_width=" << io::format_number(m.half_width) << (m.pass ? " pass" : " FAIL")
        << "\n";
  return kExitOk;
}

int cmd_check(const RunConfig& config, Artifacts& out, std::ostream& log) {
  const MdpModel model = io::read_model(config.model_path);
  ErgodicityOptions options;
  options.seed = config.seed;
  const ErgodicityReport report = check_ergodicity(model, options);
  out.write("ergodicity.json", io::ergodicity_to_json(report));
  log << "mode: " << to_string(report.mode) << ", policies checked: " << report.policies_checked
      << ", union irreducible: " << (report.union_irreducible ? "yes" : "no")
      << ", not irreducible: " << report.violation_count
      << ", multichain: " << report.multichain_count << "\n";
  return config.strict && !report.ok() ? kExitValidation : kExitOk;
}

std::vector<std::vector<double>> read_kernel(const std::string& path) {
  json doc;
  try {
    doc = json::parse(io::read_text(path));
  } catch (const json::parse_error&) {
    throw ParseError(path + ": malformed JSON");
  }
  if (doc.is_object() && doc.contains("wind_kernel")) doc = doc["wind_kernel"];
  if (!doc.is_array()) throw ParseError(path + ": expected a matrix or a \"wind_kernel\" field");
  std::vector<std::vector<double>> kernel;
  for (const auto& row : doc) {
    if (!row.is_array()) throw ParseError(path + ": kernel rows must be arrays");
    std::vector<double> values;
    for (const auto& v : row) {
      if (!v.is_number()) throw ParseError(path + ": kernel entries must be numbers");
      values.push_back(v.get<double>());
    }
    kernel.push_back(std::move(values));
  }
  return kernel;
}

int cmd_wind_build(const RunConfig& config, Artifacts& out, std::ostream& log) {
  wind::WindStorageSpec spec = wind::WindStorageSpec::defaults(config.beta, config.scenario == "abandon");
  if (config.kernel_path) spec.wind_kernel = read_kernel(*config.kernel_path);
  const MdpModel model = wind::build(spec);
  out.write("model.json", io::model_to_json(model));
  log << "scenario " << config.scenario << ": " << model.num_states() << " states, "
      << model.num_actions() << " action indices\n";
  return kExitOk;
}

}  // namespace

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    validate(config);
    Artifacts out(config.output_path);
    int status = kExitOk;
    switch (config.command) {
      case Command::evaluate: status = cmd_evaluate(config, out, log); break;
      case Command::solve_pi: status = cmd_solve_pi(config, out, log); break;
      case Command::solve_gd: status = cmd_solve_gd(config, out, log); break;
      case Command::multi_start: status = cmd_multi_start(config, out, log); break;
      case Command::sweep_beta: status = cmd_sweep_beta(config, out, log, err); break;
      case Command::simulate: status = cmd_simulate(config, out, log); break;
      case Command::check: status = cmd_check(config, out, log); break;
      case Command::wind_build: status = cmd_wind_build(config, out, log); break;
    }
    for (const auto& file : out.written()) log << "wrote " << file << "\n";
    if (status == kExitSolver) err << "error: solver did not converge\n";
    return status;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace mvmdp::cli
