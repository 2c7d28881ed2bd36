#ifndef POPEC_POLICY_HPP_
#define POPEC_POLICY_HPP_

#include <string>
#include <vector>

#include "popec/system_model.hpp"

namespace popec {

// Per-user channel-access probabilities plus the auxiliary per-user
// transmission bound used by the optimization objectives.
struct OffloadPolicy {
  int num_users = 0;
  int num_channels = 0;
  std::vector<double> eta;    // eta[n*C + c] in [0,1], row sums <= 1
  std::vector<double> t_hat;  // per-user transmission bound, > 0

  double at(int n, int c) const { return eta[n * num_channels + c]; }
  double& at(int n, int c) { return eta[n * num_channels + c]; }

  static OffloadPolicy zeros(const SystemInstance& inst);
  // Equal split across channels scaled by `scale`.
  static OffloadPolicy uniform(const SystemInstance& inst, double scale = 1.0);
};

// Inter-server migration fractions (row-stochastic) and migration flags.
struct CollaborationPolicy {
  int num_servers = 0;
  std::vector<double> eta;  // eta[m*M + m'] in [0,1], rows sum to 1
  std::vector<int> y;       // migration flag per server

  double at(int m, int m2) const { return eta[m * num_servers + m2]; }
  double& at(int m, int m2) { return eta[m * num_servers + m2]; }

  static CollaborationPolicy identity(const SystemInstance& inst);
};

// Expected-PAoI decomposition, one row per user plus the mean objective.
struct PaoiReport {
  std::vector<double> transmission;  // E[T]
  std::vector<double> interarrival;  // E[I]
  std::vector<double> waiting;       // E[W]
  std::vector<double> service;       // E[Y]
  std::vector<double> total;         // E[A]
  double mean_objective = 0.0;

  std::string to_csv(const SystemInstance& inst) const;
};

}  // namespace popec

#endif  // POPEC_POLICY_HPP_
