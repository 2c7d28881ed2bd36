#include "popec/feasibility.hpp"

#include <cmath>

#include "doctest.h"
#include "popec/math_util.hpp"
#include "test_helpers.hpp"

using namespace popec;
using popec::testing::small_instance;

TEST_CASE("capacity bounds closed form") {
  SystemInstance inst = small_instance(1, 1, 1);
  inst.channel_capacity = {30.0};
  inst.confidence_alpha = 0.05;
  const FeasibleSetSpec spec = capacity_bounds(inst);
  CHECK(spec.z1 == doctest::Approx(-1.959963985).epsilon(1e-8));
  CHECK(spec.z2 == doctest::Approx(1.959963985).epsilon(1e-8));
  CHECK(spec.channel_rhs[0] ==
        doctest::Approx(30.0 - 1.959963985 * std::sqrt(30.0)).epsilon(1e-8));

  SUBCASE("vanishing confidence recovers the plain capacity") {
    inst.confidence_alpha = 1.0 - 1e-9;
    inst.confidence_beta = 1.0 - 1e-9;
    const FeasibleSetSpec wide = capacity_bounds(inst);
    CHECK(wide.channel_rhs[0] == doctest::Approx(30.0).epsilon(1e-4));
    CHECK(wide.compute_rhs[0] == doctest::Approx(1.0).epsilon(1e-4));
  }
  SUBCASE("capacity below the confidence threshold is infeasible") {
    inst.channel_capacity = {3.0};  // below z2^2 at alpha = 0.05
    CHECK_THROWS_AS(capacity_bounds(inst), InfeasibleError);
  }
}

TEST_CASE("membership in the raw and convexified capacity sets coincides") {
  // The raw set: z1^2/2 + z2*sqrt(load + z2^2/4) + load <= M_c.
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const SystemInstance inst = popec::testing::default_instance(seed, 6);
    const FeasibleSetSpec spec = capacity_bounds(inst);
    Rng rng(seed * 77 + 1);
    for (int trial = 0; trial < 300; ++trial) {
      const double load = rng.uniform(0.0, 2.0 * inst.channel_capacity[0]);
      const bool raw =
          spec.z1 * spec.z1 / 2.0 +
              spec.z2 * std::sqrt(load + spec.z2 * spec.z2 / 4.0) + load <=
          inst.channel_capacity[0];
      const bool convexified = load <= spec.channel_rhs[0];
      CHECK(raw == convexified);

      const double util = rng.uniform(0.0, 2.0);
      const bool raw_compute =
          spec.z3 * spec.z3 / 2.0 +
              spec.z4 * std::sqrt(util + spec.z4 * spec.z4 / 4.0) + util <
          1.0;
      const bool convexified_compute = util <= spec.compute_rhs[0];
      CHECK(raw_compute == convexified_compute);
    }
  }
}

TEST_CASE("check_feasible reports violations") {
  SystemInstance inst = small_instance(2, 2, 2, 5.0);
  const FeasibleSetSpec spec = capacity_bounds(inst);

  SUBCASE("all-zero offloading with a large enough bound is feasible") {
    OffloadPolicy pol = OffloadPolicy::zeros(inst);
    for (double& t : pol.t_hat) t = 10.0;  // above S/r = 0.2
    const CollaborationPolicy collab = CollaborationPolicy::identity(inst);
    CHECK(check_feasible(pol, collab, spec, inst, 1e-9).empty());
  }
  SUBCASE("access sum above one is flagged") {
    OffloadPolicy pol = OffloadPolicy::zeros(inst);
    pol.at(0, 0) = 0.9;
    pol.at(0, 1) = 0.6;
    for (double& t : pol.t_hat) t = 10.0;
    const CollaborationPolicy collab = CollaborationPolicy::identity(inst);
    bool found = false;
    for (const auto& v : check_feasible(pol, collab, spec, inst, 1e-9))
      if (v.id == "eta_row_sum[0]") found = true;
    CHECK(found);
  }
  SUBCASE("transmission bound below the contention time is flagged") {
    OffloadPolicy pol = OffloadPolicy::zeros(inst);
    for (double& t : pol.t_hat) t = 0.01;  // below S/r
    const CollaborationPolicy collab = CollaborationPolicy::identity(inst);
    bool found = false;
    for (const auto& v : check_feasible(pol, collab, spec, inst, 1e-9))
      if (v.id.rfind("transmission_bound", 0) == 0) found = true;
    CHECK(found);
  }
  SUBCASE("collaboration rows must be stochastic") {
    OffloadPolicy pol = OffloadPolicy::zeros(inst);
    for (double& t : pol.t_hat) t = 10.0;
    CollaborationPolicy collab = CollaborationPolicy::identity(inst);
    collab.at(0, 0) = 0.4;
    bool found = false;
    for (const auto& v : check_feasible(pol, collab, spec, inst, 1e-9))
      if (v.id == "eta_s_row_sum[0]") found = true;
    CHECK(found);
  }
}

TEST_CASE("boundary point saturating the channel capacity is feasible") {
  SystemInstance inst = small_instance(1, 1, 1, 5.0);
  inst.channel_capacity = {4.2};
  const FeasibleSetSpec spec = capacity_bounds(inst);
  REQUIRE(spec.channel_rhs[0] > 0.0);
  REQUIRE(spec.channel_rhs[0] < 1.0);

  OffloadPolicy pol = OffloadPolicy::zeros(inst);
  pol.at(0, 0) = spec.channel_rhs[0];  // arrival rate is 1
  pol.t_hat[0] = 1.0 / (5.0 - spec.channel_rhs[0]) + 1.0;
  const CollaborationPolicy collab = CollaborationPolicy::identity(inst);
  CHECK(check_feasible(pol, collab, spec, inst, 1e-9).empty());
  CHECK(violations_to_text(check_feasible(pol, collab, spec, inst, 1e-9))
            .empty());
}

TEST_CASE("projection is idempotent on feasible points") {
  const SystemInstance inst = popec::testing::default_instance(5, 4);
  const FeasibleSetSpec spec = capacity_bounds(inst);
  const DecisionLayout layout = all_users_layout(inst);

  std::vector<double> x(layout.dim(), 0.0);
  for (int n = 0; n < inst.num_users; ++n) x[layout.t_hat_index(n)] = 5.0;
  project_feasible(x, spec, inst);
  std::vector<double> y = x;
  project_feasible(y, spec, inst);
  for (int i = 0; i < layout.dim(); ++i)
    CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-9));
}

TEST_CASE("projection clips an oversized coordinate") {
  const SystemInstance inst = popec::testing::default_instance(9, 3);
  const FeasibleSetSpec spec = capacity_bounds(inst);
  const DecisionLayout layout = all_users_layout(inst);

  std::vector<double> x(layout.dim(), 0.0);
  for (int n = 0; n < inst.num_users; ++n) x[layout.t_hat_index(n)] = 5.0;
  project_feasible(x, spec, inst);
  std::vector<double> y = x;
  y[layout.eta_index(0, 0)] = 2.0;
  project_feasible(y, spec, inst);
  CHECK(y[layout.eta_index(0, 0)] <= 1.0 + 1e-9);

  OffloadPolicy pol = unpack_policy(y, layout, inst);
  CHECK(check_feasible(pol, CollaborationPolicy::identity(inst), spec, inst,
                       1e-8)
            .empty());
}

TEST_CASE("projection matches a brute-force grid oracle") {
  // One user, one channel: the decision space is (eta, t_hat).
  SystemInstance inst = small_instance(1, 1, 1, 5.0);
  inst.channel_capacity = {4.5};
  inst.hop_delay[0] = 0.05;
  const FeasibleSetSpec spec = capacity_bounds(inst);
  const DecisionLayout layout = all_users_layout(inst);
  const FeasibleRegion region(inst, spec, layout);

  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<double> x{rng.uniform(-0.5, 2.0),
                                rng.uniform(-1.0, 3.0)};
    std::vector<double> projected = x;
    project_feasible(projected, spec, inst);

    OffloadPolicy pol = unpack_policy(projected, layout, inst);
    CHECK(check_feasible(pol, CollaborationPolicy::identity(inst), spec, inst,
                         1e-8)
              .empty());

    const double dist = std::sqrt(squared_distance(projected, x));

    // 1000 x 1000 grid over the box [0,1] x [0,4].
    double best = kInfiniteTime;
    for (int i = 0; i <= 1000; ++i) {
      const double eta = i / 1000.0;
      for (int j = 0; j <= 1000; ++j) {
        const std::vector<double> candidate{eta, 4.0 * j / 1000.0};
        if (!region.contains(candidate, 1e-12)) continue;
        best = std::min(best, std::sqrt(squared_distance(candidate, x)));
      }
    }
    CHECK(dist <= best + 1e-6);
  }
}

TEST_CASE("infinite candidates are rejected") {
  const SystemInstance inst = popec::testing::default_instance(2, 2);
  const FeasibleSetSpec spec = capacity_bounds(inst);
  std::vector<double> x(all_users_layout(inst).dim(), kInfiniteTime);
  CHECK_THROWS_AS(project_feasible(x, spec, inst), ProjectionError);
}
