#ifndef POPEC_EXPERIMENT_HPP_
#define POPEC_EXPERIMENT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "popec/system_model.hpp"

namespace popec {

enum class SweepAxis {
  kUsers,
  kServers,
  kChannels,
  kServiceRate,
  kLinkReliability,
  kPriorityCount,
};

std::string sweep_axis_name(SweepAxis axis);
SweepAxis sweep_axis_from_name(const std::string& name);

enum class PipelineSelection { kPopec, kGreedy, kBoth };

struct ExperimentSpec {
  std::optional<std::string> instance_path;  // fixed instance instead of draws
  GeneratorDims dims{10, 1, 3, 3};
  GeneratorRanges ranges;
  PipelineSelection pipelines = PipelineSelection::kBoth;
  SweepAxis axis = SweepAxis::kUsers;
  std::vector<double> sweep_values;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "results";
  bool oracle = false;
  long long oracle_horizon = 200000;
  std::string trace_dir;
};

ExperimentSpec experiment_spec_from_config(const std::string& text);
ExperimentSpec load_experiment_spec(const std::string& path);

// One row per (sweep value, seed, method); errors are recorded in the status
// column and do not stop the sweep. Returns the results CSV path.
struct ExperimentOutcome {
  std::string results_path;
  int failed_runs = 0;
  int total_runs = 0;
};
ExperimentOutcome run_experiment(const ExperimentSpec& spec);

// Aggregates a results directory into summary.csv: mean and std of the mean
// PAoI per (method, sweep value), win rate against the greedy baseline, and
// per-class PAoI means.
std::string compare_table(const std::string& results_dir);

}  // namespace popec

#endif  // POPEC_EXPERIMENT_HPP_
