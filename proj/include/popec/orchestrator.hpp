#ifndef POPEC_ORCHESTRATOR_HPP_
#define POPEC_ORCHESTRATOR_HPP_

#include <vector>

#include "popec/feasibility.hpp"
#include "popec/freshness.hpp"
#include "popec/policy.hpp"
#include "popec/system_model.hpp"

namespace popec {

// Migration flags: a server migrates iff any effective flow crosses its
// boundary (inbound or outbound off-diagonal mass).
std::vector<int> migration_decision(const CollaborationPolicy& collab,
                                    const LambdaTable& lambda_s,
                                    const SystemInstance& inst);

// Channel-allocation stage: per home server, the convex interarrival
// objective under the capacity constraints and the coupling bound from the
// previous outer iterate.
OffloadPolicy solve_channel_allocation(const SystemInstance& inst,
                                       const LambdaTable& lambda_s, double tol,
                                       long long* rounds = nullptr);

struct PipelineOptions {
  double outer_tol = 1e-6;  // relative objective change
  int max_outer = 100;
  double subproblem_tol = 0.0;  // 0 keeps the solver defaults
  bool evaluate_final_paoi = true;
  // Warm start for the per-class arrival bounds; defaults to the server
  // capacities.
  LambdaTable initial_lambda;
};

struct PipelineResult {
  OffloadPolicy policy;
  CollaborationPolicy collaboration;
  std::vector<double> objective_trace;  // one entry per outer iteration
  PaoiReport report;
  int outer_iterations = 0;
  long long solver_rounds = 0;  // inner AC/NAC iterations, summed
  bool converged = false;
  double wall_seconds = 0.0;
};

// Alternating channel-allocation / server-collaboration loop with the
// migration decision applied at the end. The objective trace is
// non-increasing.
PipelineResult iterative_solve(const SystemInstance& inst,
                               const PipelineOptions& opts = {});

// Greedy baseline: all offloading mass on the most reliable channel (lowest
// index on ties), scaled down uniformly until the capacity bounds hold; no
// collaboration; evaluated with single-class service.
struct GreedyResult {
  OffloadPolicy policy;
  CollaborationPolicy collaboration;
};
GreedyResult greedy_baseline(const SystemInstance& inst);

}  // namespace popec

#endif  // POPEC_ORCHESTRATOR_HPP_
