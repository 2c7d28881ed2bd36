#include "popec/consensus.hpp"

#include <cmath>

#include "doctest.h"
#include "popec/math_util.hpp"
#include "popec/system_model.hpp"

using namespace popec;

namespace {

// Unconstrained quadratic agents (x - c_a)^2 in a given dimension.
ConsensusProblem quadratic_problem(std::vector<double> centers, int dim = 1) {
  ConsensusProblem problem;
  problem.dim = dim;
  problem.num_agents = static_cast<int>(centers.size());
  problem.value = [centers, dim](int a, std::span<const double> x) {
    double v = 0.0;
    for (int i = 0; i < dim; ++i) v += (x[i] - centers[a]) * (x[i] - centers[a]);
    return v;
  };
  problem.gradient = [centers, dim](int a, std::span<const double> x,
                                    std::span<double> out) {
    for (int i = 0; i < dim; ++i) out[i] = 2.0 * (x[i] - centers[a]);
  };
  problem.project = [](std::span<double>) {};
  problem.lipschitz.assign(centers.size(), 2.0);
  return problem;
}

}  // namespace

TEST_CASE("single-agent consensus is plain minimization") {
  const ConsensusProblem problem = quadratic_problem({3.0});
  SolverOptions opts;
  const ConsensusResult result = ac_solve(problem, 1.0, opts);
  CHECK(result.x_consensus[0] == doctest::Approx(3.0).epsilon(1e-4));
  CHECK(result.primal_residual <= opts.eps_primal);
  CHECK(result.dual_residual <= opts.eps_dual);
}

TEST_CASE("two quadratic agents agree on the average") {
  const ConsensusProblem problem = quadratic_problem({1.0, 5.0});
  SolverOptions opts;
  const ConsensusResult result = ac_solve(problem, 1.0, opts);
  CHECK(result.x_consensus[0] == doctest::Approx(3.0).epsilon(1e-4));
}

TEST_CASE("ac_solve throws on an impossible iteration budget") {
  const ConsensusProblem problem = quadratic_problem({1.0, 5.0});
  SolverOptions opts;
  opts.max_iterations = 1;
  opts.eps_primal = 1e-12;
  opts.eps_dual = 1e-12;
  CHECK_THROWS_AS(ac_solve(problem, 1.0, opts), ConvergenceError);
}

TEST_CASE("nac agrees with ac on convex instances") {
  const ConsensusProblem problem = quadratic_problem({1.0, 5.0}, 2);
  SolverOptions opts;
  const ConsensusResult convex = ac_solve(problem, 1.0, opts);

  std::vector<double> x0(2, 0.0);
  std::vector<double> rho(2, 5.0);  // above 2 * lipschitz = 4
  SolverState state = make_state(problem, x0, rho);
  const ConsensusResult nonconvex = nac_solve(problem, state, opts);
  for (int i = 0; i < 2; ++i)
    CHECK(nonconvex.x_consensus[i] ==
          doctest::Approx(convex.x_consensus[i]).epsilon(1e-4));
  CHECK(nonconvex.gap < opts.eps_ac);
}

TEST_CASE("nac rejects penalties at or below twice the Lipschitz bound") {
  const ConsensusProblem problem = quadratic_problem({1.0, 5.0});
  std::vector<double> x0(1, 0.0);
  std::vector<double> rho(2, 4.0);  // exactly 2 * lipschitz
  SolverState state = make_state(problem, x0, rho);
  SolverOptions opts;
  CHECK_THROWS_AS(nac_solve(problem, state, opts), ConfigError);
}

TEST_CASE("augmented lagrangian is non-increasing under the penalty rule") {
  const ConsensusProblem problem = quadratic_problem({0.0, 2.0, 7.0}, 3);
  std::vector<double> x0(3, 10.0);
  std::vector<double> rho(3, 5.0);
  SolverState state = make_state(problem, x0, rho);
  SolverOptions opts;
  std::vector<double> lagrangian;
  opts.lagrangian_trace = &lagrangian;
  nac_solve(problem, state, opts);
  for (std::size_t i = 2; i < lagrangian.size(); ++i)
    CHECK(lagrangian[i] <= lagrangian[i - 1] + 1e-8);
}

TEST_CASE("gap function") {
  const ConsensusProblem problem = quadratic_problem({1.0, 5.0});

  SUBCASE("zero exactly at a stationary consensus point") {
    std::vector<double> x0{3.0};
    std::vector<double> rho(2, 5.0);
    SolverState state = make_state(problem, x0, rho);
    // duals at the fixed point: sigma_a = -grad g_a(x*)
    state.dual[0][0] = -2.0 * (3.0 - 1.0);
    state.dual[1][0] = -2.0 * (3.0 - 5.0);
    CHECK(gap(problem, state) == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("consensus with a nonzero gradient leaves the gradient part") {
    std::vector<double> x0{0.0};
    std::vector<double> rho(2, 5.0);
    SolverState state = make_state(problem, x0, rho);
    // x_n = x_o = 0, duals zero: grad L_a = grad g_a, grad_o = 0.
    const double g1 = 2.0 * (0.0 - 1.0);
    const double g2 = 2.0 * (0.0 - 5.0);
    CHECK(gap(problem, state) == doctest::Approx(g1 * g1 + g2 * g2));
  }

  SUBCASE("matches a finite-difference reconstruction") {
    std::vector<double> x0{0.7};
    std::vector<double> rho(2, 6.0);
    SolverState state = make_state(problem, x0, rho);
    state.x_local[0][0] = 0.4;
    state.x_local[1][0] = 1.3;
    state.dual[0][0] = 0.2;
    state.dual[1][0] = -0.5;

    // L(x_1, x_2, x_o) with the quadratic penalty; differentiate numerically.
    auto lagrangian_at = [&](double x1, double x2, double xo) {
      SolverState s = state;
      s.x_local[0][0] = x1;
      s.x_local[1][0] = x2;
      s.x_consensus[0] = xo;
      return augmented_lagrangian(problem, s);
    };
    const double h = 1e-6;
    const double x1 = state.x_local[0][0], x2 = state.x_local[1][0],
                 xo = state.x_consensus[0];
    const double d1 =
        (lagrangian_at(x1 + h, x2, xo) - lagrangian_at(x1 - h, x2, xo)) /
        (2 * h);
    const double d2 =
        (lagrangian_at(x1, x2 + h, xo) - lagrangian_at(x1, x2 - h, xo)) /
        (2 * h);
    const double do_ =
        (lagrangian_at(x1, x2, xo + h) - lagrangian_at(x1, x2, xo - h)) /
        (2 * h);
    const double consensus2 =
        (x1 - xo) * (x1 - xo) + (x2 - xo) * (x2 - xo);
    const double expected = d1 * d1 + d2 * d2 + do_ * do_ + consensus2;
    CHECK(gap(problem, state) == doctest::Approx(expected).epsilon(1e-5));
  }
}

TEST_CASE("trace csv has the documented columns") {
  const ConsensusProblem problem = quadratic_problem({1.0, 5.0});
  SolverOptions opts;
  std::vector<TraceRow> trace;
  opts.trace = &trace;
  ac_solve(problem, 1.0, opts);
  CHECK(!trace.empty());
  const std::string csv = trace_to_csv(trace);
  CHECK(csv.find("iteration,objective,gap,primal_residual,dual_residual") ==
        0);
}
