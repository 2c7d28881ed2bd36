#include "popec/fractional.hpp"

#include <cmath>

#include "doctest.h"
#include "popec/freshness.hpp"
#include "popec/math_util.hpp"
#include "test_helpers.hpp"

using namespace popec;
using popec::testing::small_instance;

TEST_CASE("fractional parts at zero and at the hand-computed point") {
  SystemInstance inst = small_instance(1, 1, 1, 5.0);
  inst.arrival_rate[0] = 0.5;
  const DecisionLayout layout = all_users_layout(inst);

  std::vector<double> x(layout.dim(), 0.0);
  FractionalParts parts = fractional_parts(0, x, inst);
  CHECK(parts.upper == doctest::Approx(1.0));
  CHECK(parts.lower == doctest::Approx(0.0));

  x[layout.eta_index(0, 0)] = 1.0;
  x[layout.t_hat_index(0)] = 1.0;
  parts = fractional_parts(0, x, inst);
  CHECK(parts.upper == doctest::Approx(1.0));
  CHECK(parts.lower == doctest::Approx(0.25));
  CHECK(parts.upper / parts.lower == doctest::Approx(4.0));
}

TEST_CASE("ratio equals the prioritized objective minus the service mean") {
  const SystemInstance inst = popec::testing::default_instance(21, 5);
  const FeasibleSetSpec spec = capacity_bounds(inst);
  const DecisionLayout layout = all_users_layout(inst);

  std::vector<double> x(layout.dim(), 0.0);
  for (int n = 0; n < inst.num_users; ++n) {
    for (int c = 0; c < inst.num_channels; ++c)
      x[layout.eta_index(n, c)] = 0.4 / inst.num_channels;
    x[layout.t_hat_index(n)] = 1.0;
  }
  project_feasible(x, spec, inst);
  const OffloadPolicy pol = unpack_policy(x, layout, inst);

  for (int n = 0; n < inst.num_users; ++n) {
    const FractionalParts parts = fractional_parts(n, x, inst);
    REQUIRE(parts.lower > 0.0);
    const double expected = pol.t_hat[n] +
                            1.0 / effective_rate(n, pol, inst) +
                            priority_waiting_time(n, pol, inst);
    CHECK(parts.upper / parts.lower == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("lipschitz bound closed form and monotonicity") {
  SystemInstance inst = small_instance(1, 1, 1);
  // lambda = 1, mu = 1, nu = 2: l(0) = 1 * (2/2 + 1) = 2.
  CHECK(lipschitz_bound(0, 0.0, inst) == doctest::Approx(2.0));

  double prev = 0.0;
  for (double theta : {0.0, 0.5, 1.0, 3.0, 10.0}) {
    const double l = lipschitz_bound(0, theta, inst);
    CHECK(l >= prev);
    prev = l;
  }
}

TEST_CASE("gradient variation stays within the lipschitz bound") {
  const SystemInstance inst = popec::testing::default_instance(31, 6);
  const FeasibleSetSpec spec = capacity_bounds(inst);
  std::vector<int> users(inst.num_users);
  for (int n = 0; n < inst.num_users; ++n) users[n] = n;
  const ChannelProblem cp(inst, spec, users);

  Rng rng(7);
  const int dim = cp.dim();
  std::vector<double> a(dim), b(dim), ga(dim), gb(dim);
  for (int trial = 0; trial < 100; ++trial) {
    for (int i = 0; i < dim; ++i) {
      a[i] = rng.uniform(0.0, 1.0);
      b[i] = rng.uniform(0.0, 1.0);
    }
    cp.project(a);
    cp.project(b);
    const double dist = std::sqrt(squared_distance(a, b));
    if (dist < 1e-12) continue;
    for (int agent = 0; agent < cp.num_agents(); ++agent) {
      const double theta = 2.0;
      cp.p2_gradient(agent, a, theta, ga);
      cp.p2_gradient(agent, b, theta, gb);
      const double variation = std::sqrt(squared_distance(ga, gb));
      CHECK(variation <=
            cp.lipschitz(agent, theta) * dist * (1.0 + 1e-6));
    }
  }
}

namespace {

// Closed-form single-user ratio with the transmission bound eliminated.
double single_user_ratio(const SystemInstance& inst, double eta) {
  const double service_rate = shannon_rate(0, inst) / inst.packet_size;
  const double p = inst.p(0, 0);
  const double lambda = inst.arrival_rate[0];
  const double psi = p * eta * lambda;
  const double phi = 1.0 - psi / inst.mu_home(0);
  const double upsilon = 0.5 * psi * inst.nu_home(0);
  const double t_hat =
      1.0 / (service_rate - eta * lambda) + inst.hop(0, 0);
  return t_hat + 1.0 / psi + upsilon / phi;
}

}  // namespace

TEST_CASE("dinkelbach matches the grid oracle on one user, one channel") {
  SystemInstance inst = small_instance(1, 1, 1, 5.0);
  inst.channel_capacity = {4.5};
  const FeasibleSetSpec spec = capacity_bounds(inst);
  const ChannelProblem cp(inst, spec, {0});

  SolverOptions inner_opts;
  inner_opts.eps_ac = 1e-9;
  inner_opts.max_iterations = 200000;
  DinkelbachOptions opts;
  opts.eps_ck = 1e-8;
  const DinkelbachResult result =
      dinkelbach_solve(channel_fractional_family(cp), {}, opts.eps_ck,
                       nac_inner_solver(inner_opts), opts);
  CHECK(result.converged);

  // Exhaustive scan of the only free coordinate at step 1e-3.
  const double eta_max =
      std::min({1.0, spec.channel_rhs[0] / inst.arrival_rate[0],
                spec.compute_rhs[0] * inst.mu_home(0) /
                    (inst.p(0, 0) * inst.arrival_rate[0])});
  double best = kInfiniteTime;
  for (double eta = 1e-3; eta <= eta_max + 1e-12; eta += 1e-3)
    best = std::min(best, single_user_ratio(inst, eta));

  CHECK(result.theta[0] == doctest::Approx(best).epsilon(2e-3));

  SUBCASE("restarting at the optimal ratio terminates immediately") {
    const DinkelbachResult again =
        dinkelbach_solve(channel_fractional_family(cp), result.theta,
                         opts.eps_ck, nac_inner_solver(inner_opts), opts);
    CHECK(again.converged);
    CHECK(again.outer_iterations == 1);
    CHECK(again.theta[0] == doctest::Approx(result.theta[0]).epsilon(1e-9));
  }
}

TEST_CASE("theta sequences are monotone non-increasing") {
  const SystemInstance inst = popec::testing::default_instance(3, 4);
  const FeasibleSetSpec spec = capacity_bounds(inst);
  std::vector<int> users(inst.num_users);
  for (int n = 0; n < inst.num_users; ++n) users[n] = n;
  const ChannelProblem cp(inst, spec, users);

  SolverOptions inner_opts;
  inner_opts.eps_ac = 1e-6;
  DinkelbachOptions opts;
  const DinkelbachResult result = dinkelbach_solve(
      channel_fractional_family(cp), {}, 1e-6, nac_inner_solver(inner_opts),
      opts);
  CHECK(result.converged);
  REQUIRE(result.theta_trace.size() >= 2);
  for (std::size_t k = 1; k < result.theta_trace.size(); ++k)
    for (int a = 0; a < cp.num_agents(); ++a)
      CHECK(result.theta_trace[k][a] <=
            result.theta_trace[k - 1][a] + 1e-10);
}

TEST_CASE("starved policies are rejected") {
  SystemInstance inst = small_instance(1, 1, 1, 5.0);
  const FeasibleSetSpec spec = capacity_bounds(inst);
  const ChannelProblem cp(inst, spec, {0});
  FractionalFamily family = channel_fractional_family(cp);
  family.initial_point = [&cp]() {
    return std::vector<double>(cp.dim(), 0.0);  // psi = 0
  };
  SolverOptions inner_opts;
  CHECK_THROWS_AS(dinkelbach_solve(family, {}, 1e-6,
                                   nac_inner_solver(inner_opts), {}),
                  StarvedPolicyError);
}
