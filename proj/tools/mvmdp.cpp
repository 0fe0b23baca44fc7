// mvmdp: mean-variance optimization of finite MDPs from the command line.

#include <iostream>

#include <CLI11.hpp>

#include "mvmdp/cli.hpp"

namespace {

using mvmdp::cli::Command;
using mvmdp::cli::RunConfig;

void common(CLI::App* sub, RunConfig& cfg, bool model = true) {
  if (model) sub->add_option("-m,--model", cfg.model_path, "model file (JSON)")->required();
  sub->add_option("-o,--output", cfg.output_path, "directory for reports and CSV files");
  sub->add_option("-s,--seed", cfg.seed, "random seed (default $MVMDP_SEED or 0)");
}

void add_policy(CLI::App* sub, RunConfig& cfg, bool required) {
  auto* opt = sub->add_option_function<std::string>(
      "-p,--policy", [&cfg](const std::string& p) { cfg.policy_path = p; }, "policy file (JSON)");
  if (required) opt->required();
}

void wind_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("-o,--output", cfg.output_path, "directory receiving model.json");
  sub->add_option("--scenario", cfg.scenario, "no-abandon or abandon")
      ->check(CLI::IsMember({"no-abandon", "abandon"}));
  sub->add_option("--beta", cfg.beta, "risk weight");
  sub->add_option_function<std::string>(
      "--kernel", [&cfg](const std::string& p) { cfg.kernel_path = p; },
      "wind kernel file: a JSON matrix or {\"wind_kernel\": matrix}");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-variance optimization of finite Markov decision processes"};
  app.require_subcommand(1);
  RunConfig cfg;
  cfg.seed = mvmdp::cli::default_seed();

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a policy exactly");
  common(evaluate, cfg);
  add_policy(evaluate, cfg, true);

  auto* solve_pi = app.add_subcommand("solve-pi", "policy iteration on the mean-variance metric");
  common(solve_pi, cfg);
  add_policy(solve_pi, cfg, false);
  solve_pi->add_option("--exploration", cfg.exploration, "none, epsilon or ucb")
      ->check(CLI::IsMember({"none", "epsilon", "ucb"}));
  solve_pi->add_option("--epsilon", cfg.epsilon, "exploration probability per state");
  solve_pi->add_option("--gamma", cfg.gamma, "UCB bonus weight");
  solve_pi->add_option("--gamma-decay", cfg.gamma_decay, "UCB bonus decay per step");
  solve_pi->add_option("--budget", cfg.budget, "exploration improvement steps");
  solve_pi->add_option("--max-iterations", cfg.max_iterations, "iteration cap (0: 10 S A)");

  auto* solve_gd = app.add_subcommand("solve-gd", "randomized-policy gradient baseline");
  common(solve_gd, cfg);
  add_policy(solve_gd, cfg, false);
  solve_gd->add_option("--stop-ratio", cfg.stop_ratio, "relative parameter-change threshold");
  solve_gd->add_option("--max-iterations", cfg.max_iterations, "iteration cap");

  auto* multi = app.add_subcommand("multi-start", "policy iteration from several random starts");
  common(multi, cfg);
  multi->add_option("--starts", cfg.starts, "number of initial policies");
  multi->add_option("--max-iterations", cfg.max_iterations, "iteration cap per run");

  auto* sweep = app.add_subcommand("sweep-beta", "multi-start over a grid of risk weights");
  common(sweep, cfg);
  sweep->add_option("--betas", cfg.beta_grid, "strictly increasing beta values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--starts", cfg.starts, "initial policies per beta");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo cross-check of a policy");
  common(simulate, cfg);
  add_policy(simulate, cfg, true);
  simulate->add_option("-T,--horizon", cfg.horizon, "recorded steps");
  simulate->add_option("--burn-in", cfg.burn_in, "discarded initial steps");
  simulate->add_option("--batches", cfg.batches, "batch-means batches");
  simulate->add_flag("--dump-path", cfg.dump_path, "also write path.csv");

  auto* check = app.add_subcommand("check", "check that every policy induces an ergodic chain");
  common(check, cfg);
  check->add_flag("--strict", cfg.strict, "exit 2 when a violation is found");

  auto* wind = app.add_subcommand("wind", "wind farm and battery benchmark");
  wind->require_subcommand(1);
  auto* wind_build = wind->add_subcommand("build", "write the benchmark model");
  wind_options(wind_build, cfg);
  auto* wind_build_alias = app.add_subcommand("wind-build", "same as 'wind build'");
  wind_options(wind_build_alias, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mvmdp::cli::kExitValidation;
  }

  if (*evaluate) cfg.command = Command::evaluate;
  else if (*solve_pi) cfg.command = Command::solve_pi;
  else if (*solve_gd) cfg.command = Command::solve_gd;
  else if (*multi) cfg.command = Command::multi_start;
  else if (*sweep) cfg.command = Command::sweep_beta;
  else if (*simulate) cfg.command = Command::simulate;
  else if (*check) cfg.command = Command::check;
  else cfg.command = Command::wind_build;

  return mvmdp::cli::run(cfg, std::cout, std::cerr);
}
