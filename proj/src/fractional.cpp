#include "popec/fractional.hpp"

#include <cmath>

namespace popec {

FractionalFamily channel_fractional_family(const ChannelProblem& cp) {
  FractionalFamily family;
  family.dim = cp.dim();
  family.num_agents = cp.num_agents();
  family.f_upper = [&cp](int a, std::span<const double> x) {
    return cp.f_upper(a, x);
  };
  family.f_lower = [&cp](int a, std::span<const double> x) {
    return cp.f_lower(a, x);
  };
  family.make_problem = [&cp](std::span<const double> theta) {
    return cp.p2_consensus(theta);
  };
  family.initial_point = [&cp]() { return cp.uniform_feasible(); };
  return family;
}

InnerSolver nac_inner_solver(SolverOptions opts, double rho_scale) {
  return [opts, rho_scale](const ConsensusProblem& problem,
                           std::span<const double> x0,
                           long long* rounds) -> ConsensusResult {
    std::vector<double> rho(problem.num_agents);
    for (int a = 0; a < problem.num_agents; ++a)
      rho[a] = rho_scale * problem.lipschitz[a];
    std::vector<double> start(x0.begin(), x0.end());
    problem.project(start);
    SolverState state = make_state(problem, start, rho);
    ConsensusResult result = nac_solve(problem, std::move(state), opts);
    if (rounds != nullptr) *rounds += result.iterations;
    return result;
  };
}

DinkelbachResult dinkelbach_solve(const FractionalFamily& family,
                                  std::span<const double> theta0,
                                  double eps_ck, const InnerSolver& inner,
                                  const DinkelbachOptions& opts) {
  DinkelbachResult result;
  result.x = family.initial_point();

  auto ratio_at = [&](std::span<const double> x) {
    std::vector<double> theta(family.num_agents);
    for (int a = 0; a < family.num_agents; ++a) {
      const double lower = family.f_lower(a, x);
      if (lower <= 0.0)
        throw StarvedPolicyError(
            "dinkelbach_solve: ratio denominator vanished (starved policy)");
      theta[a] = family.f_upper(a, x) / lower;
    }
    return theta;
  };

  result.theta = theta0.empty()
                     ? ratio_at(result.x)
                     : std::vector<double>(theta0.begin(), theta0.end());
  result.theta_trace.push_back(result.theta);

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    const ConsensusProblem problem = family.make_problem(result.theta);
    ConsensusResult solved = inner(problem, result.x, &result.inner_rounds);
    result.x = solved.x_consensus;
    result.outer_iterations = outer + 1;

    double worst = 0.0;
    for (int a = 0; a < family.num_agents; ++a) {
      const double residual = family.f_upper(a, result.x) -
                              result.theta[a] * family.f_lower(a, result.x);
      worst = std::max(worst, std::abs(residual));
    }
    if (worst <= eps_ck) {
      result.converged = true;
      return result;
    }
    result.theta = ratio_at(result.x);
    result.theta_trace.push_back(result.theta);
  }
  return result;
}

}  // namespace popec
