#include "popec/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "popec/async_consensus.hpp"
#include "popec/config_io.hpp"
#include "popec/des_oracle.hpp"
#include "popec/freshness.hpp"
#include "popec/math_util.hpp"
#include "popec/orchestrator.hpp"

namespace popec {

namespace fs = std::filesystem;

std::string sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kUsers: return "N";
    case SweepAxis::kServers: return "M";
    case SweepAxis::kChannels: return "C";
    case SweepAxis::kServiceRate: return "mu";
    case SweepAxis::kLinkReliability: return "link-reliability";
    case SweepAxis::kPriorityCount: return "priority-count";
  }
  return "?";
}

SweepAxis sweep_axis_from_name(const std::string& name) {
  if (name == "N") return SweepAxis::kUsers;
  if (name == "M") return SweepAxis::kServers;
  if (name == "C") return SweepAxis::kChannels;
  if (name == "mu") return SweepAxis::kServiceRate;
  if (name == "link-reliability") return SweepAxis::kLinkReliability;
  if (name == "priority-count") return SweepAxis::kPriorityCount;
  throw ConfigError("unknown sweep axis: " + name);
}

ExperimentSpec experiment_spec_from_config(const std::string& text) {
  const detail::SectionMap sections = detail::parse_key_value_sections(text);
  ExperimentSpec spec;

  auto get = [&](const std::string& section, const std::string& key,
                 const std::string& fallback) {
    const auto sit = sections.find(section);
    if (sit == sections.end()) return fallback;
    const auto kit = sit->second.find(key);
    return kit == sit->second.end() ? fallback : kit->second;
  };

  const std::string pipeline = get("experiment", "pipeline", "both");
  if (pipeline == "popec")
    spec.pipelines = PipelineSelection::kPopec;
  else if (pipeline == "greedy")
    spec.pipelines = PipelineSelection::kGreedy;
  else if (pipeline == "both")
    spec.pipelines = PipelineSelection::kBoth;
  else
    throw ConfigError("experiment: unknown pipeline: " + pipeline);

  spec.axis = sweep_axis_from_name(get("experiment", "sweep_axis", "N"));
  {
    std::istringstream is(get("experiment", "sweep_values", ""));
    double v;
    while (is >> v) spec.sweep_values.push_back(v);
  }
  {
    std::istringstream is(get("experiment", "seeds", ""));
    std::uint64_t v;
    while (is >> v) spec.seeds.push_back(v);
  }
  if (spec.sweep_values.empty() || spec.seeds.empty())
    throw ConfigError("experiment: sweep_values and seeds must be non-empty");

  spec.output_dir = get("experiment", "output_dir", "results");
  spec.oracle = get("experiment", "oracle", "0") == "1";
  spec.oracle_horizon =
      std::stoll(get("experiment", "oracle_horizon", "200000"));
  spec.trace_dir = get("experiment", "trace_dir", "");
  const std::string inst = get("experiment", "instance", "");
  if (!inst.empty()) spec.instance_path = inst;

  auto dim = [&](const std::string& key, int fallback) {
    const std::string v = get("generator", key, "");
    return v.empty() ? fallback : std::stoi(v);
  };
  spec.dims.num_users = dim("num_users", spec.dims.num_users);
  spec.dims.num_servers = dim("num_servers", spec.dims.num_servers);
  spec.dims.num_channels = dim("num_channels", spec.dims.num_channels);
  spec.dims.num_classes = dim("num_classes", spec.dims.num_classes);

  auto range = [&](const std::string& key, double fallback) {
    const std::string v = get("generator", key, "");
    return v.empty() ? fallback : std::stod(v);
  };
  auto& r = spec.ranges;
  r.mu_lo = range("mu_lo", r.mu_lo);
  r.mu_hi = range("mu_hi", r.mu_hi);
  r.nu_lo = range("nu_lo", r.nu_lo);
  r.nu_hi = range("nu_hi", r.nu_hi);
  r.lambda_lo = range("lambda_lo", r.lambda_lo);
  r.lambda_hi = range("lambda_hi", r.lambda_hi);
  r.packet_size = range("packet_size", r.packet_size);
  r.channel_capacity = range("channel_capacity", r.channel_capacity);
  r.server_capacity = range("server_capacity", r.server_capacity);
  r.confidence_alpha = range("confidence_alpha", r.confidence_alpha);
  r.confidence_beta = range("confidence_beta", r.confidence_beta);
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read experiment spec: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return experiment_spec_from_config(buffer.str());
}

namespace {

std::string fmt(double v) {
  if (is_infinite_time(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

SystemInstance build_instance(const ExperimentSpec& spec, double value,
                              std::uint64_t seed) {
  if (spec.instance_path) return load_instance(*spec.instance_path);
  GeneratorDims dims = spec.dims;
  GeneratorRanges ranges = spec.ranges;
  switch (spec.axis) {
    case SweepAxis::kUsers:
      dims.num_users = static_cast<int>(value);
      break;
    case SweepAxis::kServers:
      dims.num_servers = static_cast<int>(value);
      break;
    case SweepAxis::kChannels:
      dims.num_channels = static_cast<int>(value);
      break;
    case SweepAxis::kPriorityCount:
      dims.num_classes = static_cast<int>(value);
      break;
    case SweepAxis::kServiceRate:
      ranges.mu_lo = ranges.mu_hi = value;
      break;
    case SweepAxis::kLinkReliability:
      ranges.p_clip_lo = ranges.p_clip_hi = value;
      break;
  }
  return generate_instance(seed, dims, ranges);
}

struct RunRow {
  std::string method;
  std::string axis;
  double value = 0.0;
  std::uint64_t seed = 0;
  double mean_paoi = 0.0;
  double throughput = 0.0;
  int outer_iters = 0;
  long long solver_rounds = 0;
  std::string status = "ok";
  std::vector<double> paoi_by_class;
  long long nac_rounds = -1;
  long long anac_rounds = -1;
  double oracle_mean = -1.0;
  double oracle_ci = -1.0;
};

std::vector<double> per_class_paoi(const PaoiReport& report,
                                   const SystemInstance& inst) {
  std::vector<double> sums(inst.num_classes, 0.0);
  std::vector<int> counts(inst.num_classes, 0);
  for (int n = 0; n < inst.num_users; ++n) {
    sums[inst.user_class[n] - 1] += report.total[n];
    counts[inst.user_class[n] - 1] += 1;
  }
  for (int d = 0; d < inst.num_classes; ++d)
    if (counts[d] > 0) sums[d] /= counts[d];
  return sums;
}

double total_throughput(const OffloadPolicy& pol, const SystemInstance& inst) {
  double total = 0.0;
  for (int n = 0; n < inst.num_users; ++n)
    total += effective_rate(n, pol, inst);
  return total;
}

void write_row(std::ostream& os, const RunRow& row) {
  os << row.method << ',' << row.axis << ',' << fmt(row.value) << ','
     << row.seed << ',' << fmt(row.mean_paoi) << ',' << fmt(row.throughput)
     << ',' << row.outer_iters << ',' << row.solver_rounds << ','
     << sanitize(row.status) << ',';
  for (std::size_t i = 0; i < row.paoi_by_class.size(); ++i) {
    if (i > 0) os << ';';
    os << fmt(row.paoi_by_class[i]);
  }
  os << ',';
  if (row.nac_rounds >= 0) os << row.nac_rounds;
  os << ',';
  if (row.anac_rounds >= 0) os << row.anac_rounds;
  os << ',';
  if (row.oracle_mean >= 0.0) os << fmt(row.oracle_mean);
  os << ',';
  if (row.oracle_ci >= 0.0) os << fmt(row.oracle_ci);
  os << '\n';
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentSpec& spec) {
  fs::create_directories(spec.output_dir);
  if (!spec.trace_dir.empty()) fs::create_directories(spec.trace_dir);

  std::vector<RunRow> rows;
  ExperimentOutcome outcome;

  for (double value : spec.sweep_values) {
    for (std::uint64_t seed : spec.seeds) {
      SystemInstance inst;
      std::string build_error;
      try {
        inst = build_instance(spec, value, seed);
      } catch (const std::exception& e) {
        build_error = e.what();
      }

      auto make_row = [&](const std::string& method) {
        RunRow row;
        row.method = method;
        row.axis = sweep_axis_name(spec.axis);
        row.value = value;
        row.seed = seed;
        return row;
      };

      const bool run_popec = spec.pipelines != PipelineSelection::kGreedy;
      const bool run_greedy = spec.pipelines != PipelineSelection::kPopec;

      if (run_popec) {
        RunRow row = make_row("popec");
        if (!build_error.empty()) {
          row.status = "error: " + build_error;
        } else {
          try {
            const PipelineResult result = iterative_solve(inst);
            row.mean_paoi = result.report.mean_objective;
            row.throughput = total_throughput(result.policy, inst);
            row.outer_iters = result.outer_iterations;
            row.solver_rounds = result.solver_rounds;
            row.paoi_by_class = per_class_paoi(result.report, inst);
            if (spec.oracle) {
              const EmpiricalReport rep =
                  simulate(inst, result.policy, result.collaboration,
                           spec.oracle_horizon, seed);
              const PaoiEstimate est = empirical_paoi(rep);
              row.oracle_mean = est.aggregate_mean;
              double ci = 0.0;
              for (const auto& s : rep.peak_age)
                if (s.count > 1) ci = std::max(ci, s.half_width99);
              row.oracle_ci = ci;
            }
            if (spec.axis == SweepAxis::kLinkReliability &&
                inst.num_servers == 1) {
              const PairedRounds paired =
                  paired_round_comparison(inst, 1e-4, seed);
              row.nac_rounds = paired.nac_rounds;
              row.anac_rounds = paired.anac_rounds;
            }
            if (!spec.trace_dir.empty()) {
              std::ofstream trace(fs::path(spec.trace_dir) /
                                  ("popec_trace_" + fmt(value) + "_" +
                                   std::to_string(seed) + ".csv"));
              trace << "outer_iteration,objective\n";
              for (std::size_t i = 0; i < result.objective_trace.size(); ++i)
                trace << i << ',' << fmt(result.objective_trace[i]) << '\n';
            }
          } catch (const std::exception& e) {
            row.status = std::string("error: ") + e.what();
          }
        }
        rows.push_back(std::move(row));
      }

      if (run_greedy) {
        RunRow row = make_row("greedy");
        if (!build_error.empty()) {
          row.status = "error: " + build_error;
        } else {
          try {
            const GreedyResult result = greedy_baseline(inst);
            const PaoiReport report = paoi_report(
                result.policy, result.collaboration, inst, true);
            row.mean_paoi = report.mean_objective;
            row.throughput = total_throughput(result.policy, inst);
            row.paoi_by_class = per_class_paoi(report, inst);
            if (spec.oracle) {
              SimOptions sim_opts;
              sim_opts.force_single_class = true;
              const EmpiricalReport rep =
                  simulate(inst, result.policy, result.collaboration,
                           spec.oracle_horizon, seed, sim_opts);
              const PaoiEstimate est = empirical_paoi(rep);
              row.oracle_mean = est.aggregate_mean;
            }
          } catch (const std::exception& e) {
            row.status = std::string("error: ") + e.what();
          }
        }
        rows.push_back(std::move(row));
      }
    }
  }

  outcome.total_runs = static_cast<int>(rows.size());
  for (const auto& row : rows)
    if (row.status != "ok") ++outcome.failed_runs;

  const fs::path path = fs::path(spec.output_dir) / "results.csv";
  std::ofstream os(path);
  os << "# popec-results v1\n";
  os << "method,sweep_axis,sweep_value,seed,mean_paoi,throughput,outer_iters,"
        "solver_rounds,status,paoi_by_class,nac_rounds,anac_rounds,"
        "oracle_mean_paoi,oracle_ci\n";
  for (const auto& row : rows) write_row(os, row);
  outcome.results_path = path.string();
  return outcome;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

struct ParsedRow {
  std::string method;
  std::string axis;
  double value = 0.0;
  std::uint64_t seed = 0;
  double mean_paoi = 0.0;
  double throughput = 0.0;
  bool ok = false;
  std::vector<double> paoi_by_class;
};

}  // namespace

std::string compare_table(const std::string& results_dir) {
  std::vector<ParsedRow> rows;
  for (const auto& entry : fs::directory_iterator(results_dir)) {
    if (entry.path().extension() != ".csv") continue;
    std::ifstream in(entry.path());
    std::string line;
    if (!std::getline(in, line) || line.rfind("# popec-results", 0) != 0)
      continue;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      const std::vector<std::string> f = split(line, ',');
      if (f.size() < 10) continue;
      ParsedRow row;
      row.method = f[0];
      row.axis = f[1];
      row.value = std::stod(f[2]);
      row.seed = std::stoull(f[3]);
      row.mean_paoi = f[4] == "inf" ? kInfiniteTime : std::stod(f[4]);
      row.throughput = std::stod(f[5]);
      row.ok = f[8] == "ok";
      for (const std::string& part : split(f[9], ';'))
        if (!part.empty())
          row.paoi_by_class.push_back(part == "inf" ? kInfiniteTime
                                                    : std::stod(part));
      rows.push_back(std::move(row));
    }
  }
  if (rows.empty())
    throw ConfigError("compare_table: no result rows in " + results_dir);

  std::map<std::pair<std::string, double>, std::vector<const ParsedRow*>>
      groups;
  for (const auto& row : rows) groups[{row.method, row.value}].push_back(&row);

  std::map<std::pair<double, std::uint64_t>, double> greedy_by_run;
  for (const auto& row : rows)
    if (row.method == "greedy" && row.ok)
      greedy_by_run[{row.value, row.seed}] = row.mean_paoi;

  std::ostringstream os;
  os << "# popec-summary v1\n";
  os << "method,sweep_axis,sweep_value,runs,ok_runs,mean_paoi_mean,"
        "mean_paoi_std,throughput_mean,win_rate_vs_greedy,"
        "paoi_by_class_mean\n";
  for (const auto& [key, members] : groups) {
    const auto& [method, value] = key;
    double sum = 0.0, sum2 = 0.0, thr = 0.0;
    int ok_runs = 0;
    std::vector<double> class_sums;
    int wins = 0, paired = 0;
    for (const ParsedRow* row : members) {
      if (!row->ok || is_infinite_time(row->mean_paoi)) continue;
      ++ok_runs;
      sum += row->mean_paoi;
      sum2 += row->mean_paoi * row->mean_paoi;
      thr += row->throughput;
      if (class_sums.size() < row->paoi_by_class.size())
        class_sums.resize(row->paoi_by_class.size(), 0.0);
      for (std::size_t i = 0; i < row->paoi_by_class.size(); ++i)
        class_sums[i] += row->paoi_by_class[i];
      if (method == "popec") {
        const auto it = greedy_by_run.find({row->value, row->seed});
        if (it != greedy_by_run.end()) {
          ++paired;
          if (row->mean_paoi <= it->second) ++wins;
        }
      }
    }
    const double mean = ok_runs > 0 ? sum / ok_runs : 0.0;
    const double variance =
        ok_runs > 1 ? std::max(0.0, (sum2 - sum * mean) / (ok_runs - 1)) : 0.0;
    os << method << ',' << members.front()->axis << ',' << fmt(value) << ','
       << members.size() << ',' << ok_runs << ',' << fmt(mean) << ','
       << fmt(std::sqrt(variance)) << ','
       << fmt(ok_runs > 0 ? thr / ok_runs : 0.0) << ',';
    if (method == "popec" && paired > 0)
      os << fmt(static_cast<double>(wins) / paired);
    os << ',';
    for (std::size_t i = 0; i < class_sums.size(); ++i) {
      if (i > 0) os << ';';
      os << fmt(ok_runs > 0 ? class_sums[i] / ok_runs : 0.0);
    }
    os << '\n';
  }

  const fs::path path = fs::path(results_dir) / "summary.csv";
  std::ofstream out(path);
  out << os.str();
  return path.string();
}

}  // namespace popec
