#ifndef POPEC_COLLABORATION_HPP_
#define POPEC_COLLABORATION_HPP_

#include <span>
#include <utility>
#include <vector>

#include "popec/consensus.hpp"
#include "popec/fractional.hpp"
#include "popec/freshness.hpp"
#include "popec/system_model.hpp"

namespace popec {

// Fractional machinery of the server-collaboration subproblem. The decision
// vector is the migration matrix eta^s flattened row-major; agents are the
// (user, target server) pairs of users whose home server has positive
// outflow. Feasible set: box, row sums equal to one, inbound server
// capacities, and the stability half-spaces that keep each agent's queueing
// factors positive (the domain of the ratio objectives).
class CollabProblem {
 public:
  CollabProblem(const SystemInstance& inst, const LambdaTable& lambda_s);

  int dim() const { return M_ * M_; }
  int num_agents() const { return static_cast<int>(agents_.size()); }
  const std::vector<std::pair<int, int>>& agents() const { return agents_; }

  double pi_upper(int agent, std::span<const double> z) const;
  double pi_lower(int agent, std::span<const double> z) const;
  double value(int agent, std::span<const double> z, double ratio) const;
  void gradient(int agent, std::span<const double> z, double ratio,
                std::span<double> out) const;
  // Hessian bound of pi_upper - ratio * pi_lower over the unit box.
  double lipschitz(int agent, double ratio) const;

  void project(std::span<double> z) const;
  std::vector<double> initial_point() const;  // identity, projected

  ConsensusProblem consensus(std::span<const double> ratios) const;
  FractionalFamily fractional_family() const;

 private:
  struct AgentTerms {
    int home = 0, target = 0;
    double transfer_service = 0.0;  // t^tr + 1/mu
    double outflow = 0.0;           // total effective rate leaving home
    std::vector<double> util_upto;  // A coefficients, per source server
    std::vector<double> util_above; // B coefficients
    std::vector<double> moment;     // Upsilon coefficients
  };

  const SystemInstance* inst_;
  int M_ = 0;
  std::vector<double> total_outflow_;  // per server, sum over classes
  std::vector<std::pair<int, int>> agents_;
  std::vector<AgentTerms> terms_;

  struct LinearSet {
    std::vector<int> index;
    std::vector<double> weight;
    double rhs = 0.0;
    double norm2 = 0.0;
    bool equality = false;
  };
  std::vector<LinearSet> sets_;
  friend struct CollabRegionAccess;
};

// Best response of the collaboration stage at fixed per-class arrivals.
CollaborationPolicy solve_server_collaboration(const SystemInstance& inst,
                                               const LambdaTable& lambda_s,
                                               double tol,
                                               long long* rounds = nullptr);

}  // namespace popec

#endif  // POPEC_COLLABORATION_HPP_
