#ifndef POPEC_CONSENSUS_HPP_
#define POPEC_CONSENSUS_HPP_

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace popec {

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Separable consensus problem: num_agents smooth objectives over a shared
// convex feasible set, coupled through a consensus point.
struct ConsensusProblem {
  int dim = 0;
  int num_agents = 0;
  std::function<double(int, std::span<const double>)> value;
  std::function<void(int, std::span<const double>, std::span<double>)>
      gradient;
  std::function<void(std::span<double>)> project;
  std::vector<double> lipschitz;  // gradient-Lipschitz bound per agent
};

// ADMM-consensus state: local copies, consensus point, duals, penalties,
// fractional ratios and tolerances.
struct SolverState {
  std::vector<std::vector<double>> x_local;
  std::vector<double> x_consensus;
  std::vector<std::vector<double>> dual;
  std::vector<double> rho;
  std::vector<double> theta;
  std::vector<double> lipschitz;
  int iterations = 0;

  double eps_ck = 1e-5;
  double eps_ac = 1e-4;
  double eps_primal = 1e-6;
  double eps_dual = 1e-6;
};

SolverState make_state(const ConsensusProblem& problem,
                       std::span<const double> x0,
                       std::span<const double> rho);

struct TraceRow {
  int iteration = 0;
  double objective = 0.0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

std::string trace_to_csv(const std::vector<TraceRow>& trace);

struct SolverOptions {
  double eps_primal = 1e-6;
  double eps_dual = 1e-6;
  double eps_ac = 1e-4;
  int max_iterations = 100000;
  double inner_tol = 1e-9;
  int inner_cap = 10000;
  std::vector<TraceRow>* trace = nullptr;
  // Per-iteration augmented-Lagrangian values (monotonicity checks).
  std::vector<double>* lagrangian_trace = nullptr;
};

struct ConsensusResult {
  std::vector<double> x_consensus;
  SolverState state;
  int iterations = 0;
  double objective = 0.0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

// Convex ADMM-consensus: proximal local step, plain average, dual ascent.
// Stops when both the primal residual sum ||x_n - x_o||^2 and the dual
// residual rho * ||x_o^{t+1} - x_o^t||^2 fall below their tolerances.
ConsensusResult ac_solve(const ConsensusProblem& problem, double rho,
                         const SolverOptions& opts,
                         std::span<const double> x0 = {});

// Non-convex ADMM-consensus: local argmin of the augmented Lagrangian over
// the feasible set, rho-weighted consensus average, dual step; stops when
// the gap function drops below eps_ac. Requires rho_n > 2 * lipschitz_n.
ConsensusResult nac_solve(const ConsensusProblem& problem, SolverState state,
                          const SolverOptions& opts);

// Squared norm of the augmented-Lagrangian gradient (projected-gradient
// residual for the constrained local blocks) plus the squared consensus
// residual. Zero exactly at stationary consensus points.
double gap(const ConsensusProblem& problem, const SolverState& state);

double augmented_lagrangian(const ConsensusProblem& problem,
                            const SolverState& state);

// Minimizes value(agent, x) + <dual, x - anchor> + (rho/2)||x - anchor||^2
// over the feasible set by projected accelerated descent with backtracking.
// `x` carries the warm start and receives the solution.
void proximal_step(const ConsensusProblem& problem, int agent,
                   std::span<const double> anchor,
                   std::span<const double> dual, double rho,
                   std::span<double> x, double tol, int cap);

}  // namespace popec

#endif  // POPEC_CONSENSUS_HPP_
