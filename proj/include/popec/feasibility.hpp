#ifndef POPEC_FEASIBILITY_HPP_
#define POPEC_FEASIBILITY_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "popec/freshness.hpp"
#include "popec/policy.hpp"
#include "popec/system_model.hpp"

namespace popec {

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ProjectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Convexified capacity right-hand sides and the normal quantiles they were
// built from: z1 = Phi^-1(alpha/2), z2 = Phi^-1(1-alpha/2), likewise z3/z4
// with beta.
struct FeasibleSetSpec {
  std::vector<double> channel_rhs;  // tasks/time, per channel
  std::vector<double> compute_rhs;  // dimensionless utilization, per server
  double z1 = 0.0, z2 = 0.0, z3 = 0.0, z4 = 0.0;
};

FeasibleSetSpec capacity_bounds(const SystemInstance& inst);

struct ConstraintViolation {
  std::string id;  // e.g. "eta_row_sum[3]"
  double slack;    // negative when violated
};

std::string violations_to_text(const std::vector<ConstraintViolation>& v);

// Evaluates the full constraint set (policy boxes and sums, transmission
// bound, convexified capacities, server capacity, optional coupling bound).
// Empty iff everything holds within tol.
std::vector<ConstraintViolation> check_feasible(
    const OffloadPolicy& pol, const CollaborationPolicy& collab,
    const FeasibleSetSpec& spec, const SystemInstance& inst, double tol,
    const LambdaTable* coupling_bound = nullptr);

// Decision-vector layout for the channel-side problems over a user group:
// [eta for each group user (C per user), then one t_hat per user].
struct DecisionLayout {
  std::vector<int> users;  // global user ids
  int num_channels = 0;

  int dim() const {
    return static_cast<int>(users.size()) * (num_channels + 1);
  }
  int eta_index(int local_user, int c) const {
    return local_user * num_channels + c;
  }
  int t_hat_index(int local_user) const {
    return static_cast<int>(users.size()) * num_channels + local_user;
  }
};

// Closed convex feasible region for the channel-side decision vector:
// intersection of the box, per-user access-sum caps, capacity half-spaces,
// optional per-(class,server) coupling half-spaces, and the per-(user,
// channel) transmission-bound sets. Projection by Dykstra's alternating
// scheme.
class FeasibleRegion {
 public:
  FeasibleRegion(const SystemInstance& inst, const FeasibleSetSpec& spec,
                 DecisionLayout layout,
                 const LambdaTable* coupling_bound = nullptr);

  const DecisionLayout& layout() const { return layout_; }

  void project(std::span<double> x, double tol = 1e-8,
               int max_cycles = 10000) const;
  bool contains(std::span<const double> x, double tol) const;
  void append_violations(std::span<const double> x, double tol,
                         std::vector<ConstraintViolation>& out) const;

 private:
  struct HalfSpace {
    std::vector<int> index;
    std::vector<double> weight;
    double rhs = 0.0;
    double weight_norm2 = 0.0;
    std::string id;
  };
  struct TransmissionSet {
    int t_hat_index = 0;
    std::vector<int> eta_index;     // group eta coordinates on this channel
    std::vector<double> eta_weight; // arrival rates
    double service_rate = 0.0;      // r_c/S
    double hop_delay = 0.0;
    double weight_norm2 = 0.0;
    std::string id;
  };

  void project_once(std::span<double> x) const;
  static void project_half_space(const HalfSpace& h, std::span<double> x);
  static void project_transmission(const TransmissionSet& t,
                                   std::span<double> x);
  static double transmission_violation(const TransmissionSet& t,
                                       std::span<const double> x);

  DecisionLayout layout_;
  std::vector<HalfSpace> half_spaces_;
  std::vector<TransmissionSet> transmission_sets_;
};

// Euclidean projection of a candidate onto the global feasible set;
// output satisfies check_feasible at the projection tolerance.
void project_feasible(std::span<double> x, const FeasibleSetSpec& spec,
                      const SystemInstance& inst);

OffloadPolicy unpack_policy(std::span<const double> x,
                            const DecisionLayout& layout,
                            const SystemInstance& inst);
void pack_policy(const OffloadPolicy& pol, const DecisionLayout& layout,
                 std::span<double> x);

DecisionLayout all_users_layout(const SystemInstance& inst);

}  // namespace popec

#endif  // POPEC_FEASIBILITY_HPP_
