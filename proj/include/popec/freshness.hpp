#ifndef POPEC_FRESHNESS_HPP_
#define POPEC_FRESHNESS_HPP_

#include <vector>

#include "popec/policy.hpp"
#include "popec/system_model.hpp"

namespace popec {

struct DegeneratePolicyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Total task rate offered to channel c, sum of eta*lambda over all users.
double channel_load(int c, const OffloadPolicy& pol, const SystemInstance& inst);

// Rate of successfully delivered updates of user n: sum_c p*eta*lambda.
double effective_rate(int n, const OffloadPolicy& pol,
                      const SystemInstance& inst);

// Channel contention time plus per-hop delay; infinite when the channel's
// offered load reaches its service rate r_c/S.
double transmission_time(int n, int c, const OffloadPolicy& pol,
                         const SystemInstance& inst);

// Mean waiting time of user n in the non-preemptive priority M/G/1 queue at
// its home server, with effective arrival rates p*eta*lambda. Infinite when
// either cumulative-utilization factor reaches 1. With `force_single_class`
// all users count as one class (the priority-free expression).
double priority_waiting_time(int n, const OffloadPolicy& pol,
                             const SystemInstance& inst,
                             bool force_single_class = false);

// Per-(class, server) effective arrival table lambda^s, row-major
// [class-1][server]; classes indexed from 1.
using LambdaTable = std::vector<double>;

// Effective arrivals per (class, server): sums p*eta*lambda over the users
// of each server and class.
LambdaTable aggregate_lambda_s(const OffloadPolicy& pol,
                               const SystemInstance& inst);

// Expected stay of user n's tasks routed to server m under migration:
// routing weight times (transfer delay + service mean + priority waiting).
double server_sojourn(int n, int m, const CollaborationPolicy& collab,
                      const LambdaTable& lambda_s, const SystemInstance& inst);

struct PaoiComponents {
  double transmission = 0.0;
  double interarrival = 0.0;
  double waiting = 0.0;
  double service = 0.0;
  double total = 0.0;
};

PaoiComponents expected_paoi(int n, const OffloadPolicy& pol,
                             const CollaborationPolicy& collab,
                             const SystemInstance& inst,
                             bool force_single_class = false);

double mean_paoi(const OffloadPolicy& pol, const CollaborationPolicy& collab,
                 const SystemInstance& inst, bool force_single_class = false);

PaoiReport paoi_report(const OffloadPolicy& pol,
                       const CollaborationPolicy& collab,
                       const SystemInstance& inst,
                       bool force_single_class = false);

struct PriorityGain {
  double delta = 0.0;  // E[A] priority-free minus E[A] prioritized
  int sign = 0;        // +1 top class, -1 bottom class, 0 otherwise
};

// How much user n gains (positive) or loses (negative) from the priority
// discipline relative to priority-free service under the same policy.
PriorityGain priority_gain(int n, const OffloadPolicy& pol,
                           const SystemInstance& inst);

}  // namespace popec

#endif  // POPEC_FRESHNESS_HPP_
