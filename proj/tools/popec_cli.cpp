#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "popec/config_io.hpp"
#include "popec/des_oracle.hpp"
#include "popec/experiment.hpp"
#include "popec/freshness.hpp"
#include "popec/orchestrator.hpp"

namespace fs = std::filesystem;

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_policies(const popec::PipelineResult& result,
                    const popec::SystemInstance& inst, const fs::path& dir) {
  {
    std::ofstream os(dir / "offload_policy.cfg");
    os << "[offload_policy]\n";
    for (int n = 0; n < inst.num_users; ++n) {
      os << "user" << n << " =";
      for (int c = 0; c < inst.num_channels; ++c)
        os << ' ' << format_double(result.policy.at(n, c));
      os << '\n';
    }
    os << "t_hat =";
    for (int n = 0; n < inst.num_users; ++n)
      os << ' ' << format_double(result.policy.t_hat[n]);
    os << '\n';
  }
  {
    std::ofstream os(dir / "collaboration_policy.cfg");
    os << "[collaboration_policy]\n";
    for (int m = 0; m < inst.num_servers; ++m) {
      os << "server" << m << " =";
      for (int m2 = 0; m2 < inst.num_servers; ++m2)
        os << ' ' << format_double(result.collaboration.at(m, m2));
      os << '\n';
    }
    os << "y =";
    for (int y : result.collaboration.y) os << ' ' << y;
    os << '\n';
  }
  {
    std::ofstream os(dir / "objective_trace.csv");
    os << "outer_iteration,objective\n";
    for (std::size_t i = 0; i < result.objective_trace.size(); ++i)
      os << i << ',' << format_double(result.objective_trace[i]) << '\n';
  }
  {
    std::ofstream os(dir / "paoi_report.csv");
    os << result.report.to_csv(inst);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PoPeC freshness-aware task-offloading optimizer"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run an experiment spec");
  std::string spec_path;
  bool with_oracle = false;
  std::string trace_dir;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
  run->add_option("spec", spec_path, "experiment spec file")->required();
  run->add_flag("--oracle", with_oracle, "add empirical validation columns");
  run->add_option("--trace-dir", trace_dir, "write solver traces here");
  run->add_option("--seed-override", seed_override, "run a single seed")
      ->each([&](const std::string&) { has_seed_override = true; });

  // compare
  auto* compare = app.add_subcommand("compare", "summarize a results dir");
  std::string results_dir;
  compare->add_option("dir", results_dir, "results directory")->required();

  // generate
  auto* generate = app.add_subcommand("generate", "write a random instance");
  std::string out_path;
  std::uint64_t gen_seed = 1;
  int gen_users = 10, gen_servers = 1, gen_channels = 3, gen_classes = 3;
  generate->add_option("output", out_path, "output config path")->required();
  generate->add_option("--seed", gen_seed, "generator seed");
  generate->add_option("--users", gen_users, "number of users");
  generate->add_option("--servers", gen_servers, "number of servers");
  generate->add_option("--channels", gen_channels, "number of channels");
  generate->add_option("--classes", gen_classes, "number of priority classes");

  // solve
  auto* solve = app.add_subcommand("solve", "optimize a single instance");
  std::string instance_path, solve_out = "solution";
  bool solve_oracle = false;
  long long solve_horizon = 200000;
  std::uint64_t solve_seed = 1;
  solve->add_option("instance", instance_path, "instance config")->required();
  solve->add_option("--output", solve_out, "output directory");
  solve->add_flag("--oracle", solve_oracle, "validate with the simulator");
  solve->add_option("--horizon", solve_horizon, "simulated arrivals");
  solve->add_option("--seed", solve_seed, "simulator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      popec::ExperimentSpec spec = popec::load_experiment_spec(spec_path);
      if (with_oracle) spec.oracle = true;
      if (!trace_dir.empty()) spec.trace_dir = trace_dir;
      if (has_seed_override) spec.seeds = {seed_override};
      const popec::ExperimentOutcome outcome = popec::run_experiment(spec);
      std::cout << "wrote " << outcome.results_path << " ("
                << outcome.total_runs - outcome.failed_runs << "/"
                << outcome.total_runs << " runs ok)\n";
      return outcome.failed_runs == 0 ? 0 : 1;
    }
    if (*compare) {
      std::cout << "wrote " << popec::compare_table(results_dir) << "\n";
      return 0;
    }
    if (*generate) {
      const popec::SystemInstance inst = popec::generate_instance(
          gen_seed, {gen_users, gen_servers, gen_channels, gen_classes});
      popec::save_instance(inst, out_path);
      std::cout << "wrote " << out_path << "\n";
      return 0;
    }
    if (*solve) {
      const popec::SystemInstance inst = popec::load_instance(instance_path);
      const popec::PipelineResult result = popec::iterative_solve(inst);
      fs::create_directories(solve_out);
      write_policies(result, inst, solve_out);
      std::cout << "mean expected PAoI: "
                << format_double(result.report.mean_objective) << " after "
                << result.outer_iterations << " outer iterations\n";
      if (solve_oracle) {
        const popec::EmpiricalReport rep =
            popec::simulate(inst, result.policy, result.collaboration,
                            solve_horizon, solve_seed);
        const popec::PaoiEstimate est = popec::empirical_paoi(rep);
        std::cout << "empirical mean PAoI: " << format_double(est.aggregate_mean)
                  << " (" << solve_horizon << " arrivals)\n";
      }
      std::cout << "wrote " << solve_out << "/\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
