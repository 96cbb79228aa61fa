#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "steadytrunc/io.hpp"
#include "steadytrunc/run.hpp"

using namespace steadytrunc;

int main(int argc, char** argv) {
  CLI::App app{"stationary distributions of Markov population models via "
               "abstraction-guided truncation"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string solver = "auto";
  std::string oracle = "none";
  std::vector<long long> init_box;
  bool deep = false;

  auto* runc = app.add_subcommand("run", "refine, truncate and solve");
  runc->add_option("--model", cfg.model_path, "model file")->required();
  runc->add_option("--epsilon", cfg.epsilon, "truncation threshold");
  runc->add_option("--epsilon-l", cfg.epsilon_l,
                   "Lyapunov mass threshold for the initial box");
  runc->add_option("--init-exponent", cfg.m, "initial cell width 2^m");
  runc->add_option("--solver", solver, "auto|dense|iterative")
      ->check(CLI::IsMember({"auto", "dense", "iterative"}));
  runc->add_flag("--bounds", cfg.bounds,
                 "state-wise probability bounds (one solve per in-boundary "
                 "target)");
  runc->add_option("--out", cfg.out_dir, "output directory")->required();
  runc->add_option("--seed", cfg.seed, "RNG seed (SSA oracle)");
  runc->add_option("--oracle", oracle, "none|analytic|ssa")
      ->check(CLI::IsMember({"none", "analytic", "ssa"}));
  runc->add_option("--lyapunov", cfg.lyapunov_expr,
                   "Lyapunov polynomial (overrides the model file)");
  runc->add_option("--init-box", init_box,
                   "per-aggregated-species upper bounds (skips the Lyapunov "
                   "analysis)");
  runc->add_option("--max-levels", cfg.max_levels,
                   "stop after this many refinement levels (0 = run to unit "
                   "granularity)");
  runc->add_option("--max-states", cfg.max_states,
                   "cap on partition/truncation size");
  runc->add_option("--ssa-time", cfg.ssa_time, "SSA oracle horizon");
  runc->add_option("--ssa-burn-in", cfg.ssa_burn_in, "SSA burn-in fraction");
  runc->add_flag("--deep", deep, "force a full run to unit granularity");
  runc->add_flag("--verbose", cfg.verbose, "per-level progress on stderr");

  std::string diff_a, diff_b;
  auto* diffc =
      app.add_subcommand("diff", "compare two distribution CSV files");
  diffc->add_option("a", diff_a, "first distribution")->required();
  diffc->add_option("b", diff_b, "second distribution")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (runc->parsed()) {
      if (solver == "dense") cfg.method = SolverMethod::Dense;
      else if (solver == "iterative") cfg.method = SolverMethod::Iterative;
      else cfg.method = SolverMethod::Auto;
      cfg.oracle = oracle == "analytic"
                       ? OracleMode::Analytic
                       : oracle == "ssa" ? OracleMode::Ssa : OracleMode::None;
      if (!init_box.empty()) cfg.init_box = StateVec(init_box.begin(), init_box.end());
      if (deep) cfg.max_levels = 0;
      RunOutput out = run(cfg);
      std::cout << out.summary.dump(2) << "\n";
      return 0;
    }
    if (diffc->parsed()) {
      DistributionFile a = read_distribution_csv(diff_a);
      DistributionFile b = read_distribution_csv(diff_b);
      DiffReport r = diff_distributions(a, b);
      json j = {{"total_abs_diff", r.total_abs},
                {"max_abs_diff", r.max_abs},
                {"mass_a_outside_b", r.mass_a_outside_b},
                {"mass_b_outside_a", r.mass_b_outside_a}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
