#ifndef POPEC_FRACTIONAL_HPP_
#define POPEC_FRACTIONAL_HPP_

#include <functional>
#include <span>
#include <vector>

#include "popec/channel_problem.hpp"
#include "popec/consensus.hpp"

namespace popec {

struct StarvedPolicyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A family of per-agent ratio objectives f_upper/f_lower whose parametric
// form f_upper - theta * f_lower is handed to a consensus solver.
struct FractionalFamily {
  int dim = 0;
  int num_agents = 0;
  std::function<double(int, std::span<const double>)> f_upper;
  std::function<double(int, std::span<const double>)> f_lower;
  std::function<ConsensusProblem(std::span<const double>)> make_problem;
  std::function<std::vector<double>()> initial_point;
};

FractionalFamily channel_fractional_family(const ChannelProblem& cp);

// Solves the parametric consensus problem at the current ratios and returns
// the solution; `rounds` should report the solver's iteration/round count.
using InnerSolver = std::function<ConsensusResult(
    const ConsensusProblem&, std::span<const double> x0, long long* rounds)>;

// Default inner solver: NAC with rho_n = rho_scale * lipschitz_n.
InnerSolver nac_inner_solver(SolverOptions opts, double rho_scale = 2.5);

struct DinkelbachOptions {
  double eps_ck = 1e-5;
  int max_outer = 60;
};

struct DinkelbachResult {
  std::vector<double> x;
  std::vector<double> theta;
  std::vector<std::vector<double>> theta_trace;  // one entry per outer round
  int outer_iterations = 0;
  long long inner_rounds = 0;
  bool converged = false;
};

// Iterative ratio root-finding: repeat the inner solve with the current
// ratios, re-evaluate theta at the new point, stop once
// |f_upper - theta * f_lower| <= eps_ck for every agent. Theta sequences are
// non-increasing for exact inner solves.
DinkelbachResult dinkelbach_solve(const FractionalFamily& family,
                                  std::span<const double> theta0,
                                  double eps_ck, const InnerSolver& inner,
                                  const DinkelbachOptions& opts = {});

}  // namespace popec

#endif  // POPEC_FRACTIONAL_HPP_
