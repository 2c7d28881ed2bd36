#include "popec/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "popec/channel_problem.hpp"
#include "popec/collaboration.hpp"
#include "popec/consensus.hpp"
#include "popec/math_util.hpp"

namespace popec {

std::vector<int> migration_decision(const CollaborationPolicy& collab,
                                    const LambdaTable& lambda_s,
                                    const SystemInstance& inst) {
  const int M = inst.num_servers;
  std::vector<double> outflow_total(M, 0.0);
  for (int d = 0; d < inst.num_classes; ++d)
    for (int m = 0; m < M; ++m) outflow_total[m] += lambda_s[d * M + m];

  std::vector<int> y(M, 0);
  for (int m = 0; m < M; ++m) {
    double flow = 0.0;
    for (int m2 = 0; m2 < M; ++m2) {
      if (m2 == m) continue;
      flow += collab.at(m, m2) * outflow_total[m];
      flow += collab.at(m2, m) * outflow_total[m2];
    }
    y[m] = flow > 0.0 ? 1 : 0;
  }
  return y;
}

namespace {

// Channel capacity is a shared radio resource; the per-server solves get
// proportional shares so the collected allocation stays globally feasible.
FeasibleSetSpec server_share(const FeasibleSetSpec& spec, int server_users,
                             int total_users) {
  FeasibleSetSpec share = spec;
  const double fraction =
      static_cast<double>(server_users) / static_cast<double>(total_users);
  for (double& rhs : share.channel_rhs) rhs *= fraction;
  return share;
}

}  // namespace

OffloadPolicy solve_channel_allocation(const SystemInstance& inst,
                                       const LambdaTable& lambda_s, double tol,
                                       long long* rounds) {
  const FeasibleSetSpec spec = capacity_bounds(inst);
  OffloadPolicy result = OffloadPolicy::zeros(inst);

  for (int m = 0; m < inst.num_servers; ++m) {
    const std::vector<int> users = inst.users_of_server(m);
    if (users.empty()) continue;
    const FeasibleSetSpec share =
        inst.num_servers == 1
            ? spec
            : server_share(spec, static_cast<int>(users.size()),
                           inst.num_users);
    const ChannelProblem cp(inst, share, users, &lambda_s);

    SolverOptions opts;
    if (tol > 0.0) {
      opts.eps_primal = tol;
      opts.eps_dual = tol;
    }
    ConsensusResult solved;
    try {
      solved = ac_solve(cp.f2_consensus(), 5.0, opts, cp.uniform_feasible());
    } catch (const ProjectionError&) {
      throw InfeasibleError("solve_channel_allocation: server " +
                            std::to_string(m) +
                            " has no feasible allocation under the coupling "
                            "bound");
    }

    if (rounds != nullptr) *rounds += solved.iterations;
    const OffloadPolicy part = unpack_policy(solved.x_consensus, cp.layout(),
                                             inst);
    for (int n : users) {
      for (int c = 0; c < inst.num_channels; ++c)
        result.at(n, c) = part.at(n, c);
      result.t_hat[n] = part.t_hat[n];
    }
  }
  return result;
}

namespace {

// Outer objective of the alternating loop: transmission bound, interarrival
// and the migrated sojourn, averaged over users.
double outer_objective(const OffloadPolicy& pol,
                       const CollaborationPolicy& collab,
                       const LambdaTable& lambda_s,
                       const SystemInstance& inst) {
  double total = 0.0;
  for (int n = 0; n < inst.num_users; ++n) {
    const double rate = effective_rate(n, pol, inst);
    if (rate <= 0.0) return kInfiniteTime;
    double sojourn = 0.0;
    for (int m = 0; m < inst.num_servers; ++m) {
      const double part = server_sojourn(n, m, collab, lambda_s, inst);
      if (is_infinite_time(part)) return kInfiniteTime;
      sojourn += part;
    }
    total += pol.t_hat[n] + 1.0 / rate + sojourn;
  }
  return total / inst.num_users;
}

}  // namespace

PipelineResult iterative_solve(const SystemInstance& inst,
                               const PipelineOptions& opts) {
  const auto started = std::chrono::steady_clock::now();
  if (const auto violations = validate_instance(inst); !violations.empty())
    throw ConfigError("iterative_solve: invalid instance: " +
                      violations.front().field + ": " +
                      violations.front().message);

  PipelineResult result;
  const int M = inst.num_servers;

  LambdaTable lambda_s = opts.initial_lambda;
  if (lambda_s.empty()) {
    lambda_s.assign(static_cast<std::size_t>(inst.num_classes) * M, 0.0);
    for (int d = 0; d < inst.num_classes; ++d)
      for (int m = 0; m < M; ++m)
        lambda_s[d * M + m] = inst.server_capacity[m];
  }

  OffloadPolicy pol = OffloadPolicy::zeros(inst);
  CollaborationPolicy collab = CollaborationPolicy::identity(inst);
  double best = kInfiniteTime;

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    OffloadPolicy next_pol;
    LambdaTable next_lambda;
    CollaborationPolicy next_collab;
    try {
      next_pol = solve_channel_allocation(inst, lambda_s, opts.subproblem_tol,
                                          &result.solver_rounds);
      next_lambda = aggregate_lambda_s(next_pol, inst);
      next_collab = solve_server_collaboration(
          inst, next_lambda, opts.subproblem_tol, &result.solver_rounds);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError("iterative_solve: outer iteration " +
                            std::to_string(outer) + ": " + e.what());
    }

    const double objective =
        outer_objective(next_pol, next_collab, next_lambda, inst);
    result.outer_iterations = outer + 1;

    // Inexact subsolves may wobble; keep the best iterate so the recorded
    // trace stays monotone.
    if (objective <= best) {
      pol = std::move(next_pol);
      lambda_s = std::move(next_lambda);
      collab = std::move(next_collab);
      const double previous = best;
      best = objective;
      result.objective_trace.push_back(best);
      if (std::isfinite(previous) &&
          std::abs(previous - best) <
              opts.outer_tol * std::max(1.0, std::abs(previous))) {
        result.converged = true;
        break;
      }
    } else {
      result.objective_trace.push_back(best);
      result.converged = true;
      break;
    }
  }

  collab.y = migration_decision(collab, lambda_s, inst);
  result.policy = std::move(pol);
  result.collaboration = std::move(collab);
  if (opts.evaluate_final_paoi)
    result.report = paoi_report(result.policy, result.collaboration, inst);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return result;
}

GreedyResult greedy_baseline(const SystemInstance& inst) {
  GreedyResult result;
  result.policy = OffloadPolicy::zeros(inst);
  result.collaboration = CollaborationPolicy::identity(inst);

  for (int n = 0; n < inst.num_users; ++n) {
    int best = 0;
    for (int c = 1; c < inst.num_channels; ++c)
      if (inst.p(n, c) > inst.p(n, best)) best = c;
    result.policy.at(n, best) = 1.0;
  }

  const FeasibleSetSpec spec = capacity_bounds(inst);
  double scale = 1.0;
  for (int c = 0; c < inst.num_channels; ++c) {
    const double load = channel_load(c, result.policy, inst);
    if (load > 0.0) scale = std::min(scale, spec.channel_rhs[c] / load);
  }
  for (int m = 0; m < inst.num_servers; ++m) {
    double util = 0.0;
    for (int n = 0; n < inst.num_users; ++n) {
      if (inst.user_server[n] != m) continue;
      util += effective_rate(n, result.policy, inst) / inst.mu_home(n);
    }
    if (util > 0.0) scale = std::min(scale, spec.compute_rhs[m] / util);
  }
  for (double& v : result.policy.eta) v *= scale;

  for (int n = 0; n < inst.num_users; ++n) {
    double bound = 0.0;
    for (int c = 0; c < inst.num_channels; ++c)
      bound = std::max(bound, transmission_time(n, c, result.policy, inst));
    result.policy.t_hat[n] = bound;
  }
  return result;
}

}  // namespace popec
