#ifndef POPEC_ASYNC_CONSENSUS_HPP_
#define POPEC_ASYNC_CONSENSUS_HPP_

#include <cstdint>
#include <vector>

#include "popec/consensus.hpp"
#include "popec/system_model.hpp"

namespace popec {

struct UnreachableUserError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Simulated unreliable transport: seeded Bernoulli loss per message, applied
// independently to the downlink and the uplink; the server waits one virtual
// round per iteration. `reliability[n]` is the per-message success
// probability of agent n's channel.
struct LossyLinkModel {
  std::vector<double> reliability;
  std::uint64_t seed = 0;
  double eps_a = 0.01;  // retry-bound tolerance

  // Best channel per user (the asynchronous protocol's choice).
  static LossyLinkModel best_channel(const SystemInstance& inst,
                                     std::uint64_t seed, double eps_a = 0.01);
  // Mean reliability per user (the synchronous round model).
  static LossyLinkModel mean_channel(const SystemInstance& inst,
                                     std::uint64_t seed);
};

// Retry bound: communications needed so the failure probability of one
// iteration round drops below eps_a.
int gamma_bound(double p_max, double eps_a);

struct ReliabilityProbs {
  double p_sysn = 0.0;   // all users succeed in a synchronous round
  double p_asysn = 0.0;  // at least one user succeeds in an async round
};
ReliabilityProbs reliability_probs(const SystemInstance& inst);

// Penalty threshold of the asynchronous convergence condition:
// max(7 l, l * (Gamma^2 + (3/7)(Gamma+1)^2)).
double anac_rho_threshold(double lipschitz, int gamma);

struct RoundLogRow {
  long long round = 0;
  int successful_users = 0;
  double gap = 0.0;
  double objective = 0.0;
};
std::string round_log_to_csv(const std::vector<RoundLogRow>& rows);

struct AsyncOptions {
  double eps_ac = 1e-4;
  long long max_rounds = 1000000;
  std::vector<RoundLogRow>* round_log = nullptr;
};

struct AsyncResult {
  std::vector<double> x_consensus;
  SolverState state;
  long long total_rounds = 0;
  long long successful_rounds = 0;  // rounds with at least one reply
  double gap = 0.0;
  double objective = 0.0;
  int max_staleness = 0;
};

// Asynchronous non-convex ADMM-consensus over the lossy transport. Each
// round the server refreshes the consensus point, broadcasts it, collects
// whatever replies survive, reuses stale gradients for silent users and
// applies the closed-form local and dual updates. A user silenced for
// gamma_n consecutive rounds is forced through (the retry bound).
AsyncResult anac_solve(const ConsensusProblem& problem, SolverState state,
                       const LossyLinkModel& links, const AsyncOptions& opts);

// Synchronous NAC driven over the same transport: an iteration only advances
// when every user's round trip survives; lost rounds are counted but leave
// the state untouched. Used for paired communication-cost comparisons.
AsyncResult nac_solve_under_loss(const ConsensusProblem& problem,
                                 SolverState state,
                                 const LossyLinkModel& links,
                                 const AsyncOptions& opts);

struct PairedRounds {
  long long nac_rounds = 0;
  long long anac_rounds = 0;
  double nac_gap = 0.0;
  double anac_gap = 0.0;
};

// Runs the prioritized parametric problem once synchronously and once
// asynchronously over the same seeded loss process (both sides use the
// asynchronous penalty choice so only the protocol differs) and reports the
// communication rounds each needed to reach eps_ac.
PairedRounds paired_round_comparison(const SystemInstance& inst, double eps_ac,
                                     std::uint64_t seed,
                                     long long max_rounds = 1000000);

}  // namespace popec

#endif  // POPEC_ASYNC_CONSENSUS_HPP_
