#ifndef POPEC_CHANNEL_PROBLEM_HPP_
#define POPEC_CHANNEL_PROBLEM_HPP_

#include <memory>
#include <span>
#include <vector>

#include "popec/consensus.hpp"
#include "popec/feasibility.hpp"
#include "popec/system_model.hpp"

namespace popec {

// Channel-side objective machinery over a user group (one server's users, or
// all users in the single-server problems). Decision vector layout:
// [eta per group user, t_hat per group user].
class ChannelProblem {
 public:
  ChannelProblem(const SystemInstance& inst, const FeasibleSetSpec& spec,
                 std::vector<int> users,
                 const LambdaTable* coupling_bound = nullptr);

  const DecisionLayout& layout() const { return layout_; }
  const SystemInstance& instance() const { return *inst_; }
  int dim() const { return layout_.dim(); }
  int num_agents() const { return static_cast<int>(layout_.users.size()); }

  void project(std::span<double> x) const;

  // Effective offload rate of one group user and the shared queue terms.
  double psi(int agent, std::span<const double> x) const;
  double upsilon(std::span<const double> x) const;
  // 1 - cumulative utilization of classes <= k; phi(0) = 1.
  double phi(int k, std::span<const double> x) const;

  // Priority-free objective g_n: t_hat + 1/psi + upsilon/phi_total + 1/mu.
  double p1_value(int agent, std::span<const double> x) const;
  void p1_gradient(int agent, std::span<const double> x,
                   std::span<double> out) const;

  // Fractional numerator / denominator of the prioritized objective.
  double f_upper(int agent, std::span<const double> x) const;
  double f_lower(int agent, std::span<const double> x) const;
  // f_upper - theta * f_lower and its gradient.
  double p2_value(int agent, std::span<const double> x, double theta) const;
  void p2_gradient(int agent, std::span<const double> x, double theta,
                   std::span<double> out) const;

  // Channel-allocation objective t_hat + 1/psi (the interarrival part only;
  // queueing enters through the collaboration stage).
  double f2_value(int agent, std::span<const double> x) const;
  void f2_gradient(int agent, std::span<const double> x,
                   std::span<double> out) const;

  std::vector<double> uniform_feasible() const;

  // Closed-form gradient-Lipschitz bound of the prioritized parametric
  // objective at ratio theta.
  double lipschitz(int agent, double theta) const;

  ConsensusProblem p1_consensus() const;
  ConsensusProblem p2_consensus(std::span<const double> theta) const;
  ConsensusProblem f2_consensus() const;

 private:
  const SystemInstance* inst_;
  DecisionLayout layout_;
  FeasibleRegion region_;
  std::vector<double> rate_coeff_;     // p * lambda, per (agent, channel)
  std::vector<double> util_coeff_;     // p * lambda / mu, per (agent, channel)
  std::vector<double> moment_coeff_;   // p * lambda * nu / 2, per (agent, ch.)
  std::vector<int> agent_class_;
  std::vector<double> mu_home_;
  int num_classes_ = 0;
};

// Group: users served by n's home server. Evaluates the fractional split
// of the prioritized objective at a packed all-users decision vector.
struct FractionalParts {
  double upper = 0.0;
  double lower = 0.0;
};
FractionalParts fractional_parts(int n, std::span<const double> x,
                                 const SystemInstance& inst);

double lipschitz_bound(int n, double theta, const SystemInstance& inst);

}  // namespace popec

#endif  // POPEC_CHANNEL_PROBLEM_HPP_
