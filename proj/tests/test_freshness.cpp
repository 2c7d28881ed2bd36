#include "popec/freshness.hpp"

#include <cmath>

#include "doctest.h"
#include "popec/math_util.hpp"
#include "test_helpers.hpp"

using namespace popec;
using popec::testing::small_instance;

TEST_CASE("transmission time matches hand substitution") {
  // r_c/S = 5 tasks per unit; one user pushing 4 of them into the channel.
  SystemInstance inst = small_instance(1, 1, 1, 5.0);
  inst.arrival_rate[0] = 8.0;
  inst.hop_delay[0] = 0.1;
  OffloadPolicy pol = OffloadPolicy::zeros(inst);
  pol.at(0, 0) = 0.5;  // channel load 4
  CHECK(transmission_time(0, 0, pol, inst) == doctest::Approx(1.1));

  pol.at(0, 0) = 5.0 / 8.0;  // load exactly at the service rate
  CHECK(is_infinite_time(transmission_time(0, 0, pol, inst)));

  pol.at(0, 0) = 0.0;  // empty channel
  CHECK(transmission_time(0, 0, pol, inst) == doctest::Approx(0.2 + 0.1));
}

TEST_CASE("priority waiting time reduces to Pollaczek-Khinchine") {
  SystemInstance inst = small_instance(1, 1, 1);
  inst.arrival_rate[0] = 0.5;
  OffloadPolicy pol = OffloadPolicy::uniform(inst);  // eta = 1 on the channel
  // effective rate 0.5, mu 1, nu 2: W = (0.5*0.5*2)/(0.5*1) = 1.
  CHECK(priority_waiting_time(0, pol, inst) == doctest::Approx(1.0));

  SUBCASE("zero effective arrivals") {
    OffloadPolicy zero = OffloadPolicy::zeros(inst);
    CHECK(priority_waiting_time(0, zero, inst) == doctest::Approx(0.0));
  }
}

TEST_CASE("two-class waiting times match the closed form") {
  SystemInstance inst = small_instance(2, 1, 2);
  inst.arrival_rate = {0.3, 0.3};
  OffloadPolicy pol = OffloadPolicy::uniform(inst);
  // Classes 1 and 2, each with effective rate 0.3, mu = 1, nu = 2.
  CHECK(priority_waiting_time(0, pol, inst) == doctest::Approx(6.0 / 7.0));
  CHECK(priority_waiting_time(1, pol, inst) == doctest::Approx(15.0 / 7.0));

  SUBCASE("waiting time is non-decreasing in class index") {
    CHECK(priority_waiting_time(0, pol, inst) <=
          priority_waiting_time(1, pol, inst));
  }
  SUBCASE("overload returns the infinite sentinel") {
    inst.arrival_rate = {0.9, 0.9};  // total utilization 1.8
    CHECK(is_infinite_time(priority_waiting_time(1, pol, inst)));
  }
}

TEST_CASE("priority-free reduction equals the single-class formula") {
  SystemInstance inst = small_instance(4, 2, 3);
  inst.arrival_rate = {0.1, 0.15, 0.2, 0.1};
  OffloadPolicy pol = OffloadPolicy::uniform(inst, 0.8);
  SystemInstance flat = inst;
  flat.num_classes = 1;
  flat.user_class.assign(4, 1);
  for (int n = 0; n < 4; ++n)
    CHECK(priority_waiting_time(n, pol, inst, true) ==
          doctest::Approx(priority_waiting_time(n, pol, flat)));
}

TEST_CASE("expected paoi componentwise") {
  SystemInstance inst = small_instance(1, 1, 1, 1000.0);
  inst.arrival_rate[0] = 0.5;
  OffloadPolicy pol = OffloadPolicy::uniform(inst);
  const CollaborationPolicy collab = CollaborationPolicy::identity(inst);

  const PaoiComponents c = expected_paoi(0, pol, collab, inst);
  CHECK(c.transmission == doctest::Approx(1.0 / 999.5));
  CHECK(c.interarrival == doctest::Approx(2.0));
  CHECK(c.waiting == doctest::Approx(1.0));
  CHECK(c.service == doctest::Approx(1.0));
  CHECK(c.total ==
        doctest::Approx(c.transmission + c.interarrival + c.waiting +
                        c.service));

  SUBCASE("no offloading means unbounded age") {
    OffloadPolicy zero = OffloadPolicy::zeros(inst);
    CHECK(is_infinite_time(expected_paoi(0, zero, collab, inst).total));
    CHECK(is_infinite_time(mean_paoi(zero, collab, inst)));
  }
}

TEST_CASE("symmetric users get identical paoi") {
  SystemInstance inst = small_instance(2, 2, 1);
  inst.arrival_rate = {0.4, 0.4};
  OffloadPolicy pol = OffloadPolicy::uniform(inst, 0.9);
  const CollaborationPolicy collab = CollaborationPolicy::identity(inst);
  const PaoiComponents a = expected_paoi(0, pol, collab, inst);
  const PaoiComponents b = expected_paoi(1, pol, collab, inst);
  CHECK(a.total == doctest::Approx(b.total));
  CHECK(mean_paoi(pol, collab, inst) == doctest::Approx(a.total));
}

TEST_CASE("aggregate lambda table") {
  SystemInstance inst = small_instance(1, 1, 1);
  inst.success_prob[0] = 0.8;
  OffloadPolicy pol = OffloadPolicy::uniform(inst);
  const LambdaTable table = aggregate_lambda_s(pol, inst);
  CHECK(table[0] == doctest::Approx(0.8));

  OffloadPolicy zero = OffloadPolicy::zeros(inst);
  for (double v : aggregate_lambda_s(zero, inst)) CHECK(v == 0.0);
}

TEST_CASE("server sojourn with identity routing reduces to the home queue") {
  SystemInstance inst = small_instance(3, 1, 2);
  inst.arrival_rate = {0.2, 0.25, 0.15};
  OffloadPolicy pol = OffloadPolicy::uniform(inst, 0.9);
  const CollaborationPolicy collab = CollaborationPolicy::identity(inst);
  const LambdaTable lambda_s = aggregate_lambda_s(pol, inst);
  for (int n = 0; n < 3; ++n) {
    const double direct =
        1.0 / inst.mu_home(n) + priority_waiting_time(n, pol, inst);
    CHECK(server_sojourn(n, 0, collab, lambda_s, inst) ==
          doctest::Approx(direct));
  }
}

TEST_CASE("server sojourn with full migration to an empty server") {
  SystemInstance inst = small_instance(1, 1, 1);
  inst.num_servers = 2;
  inst.user_server = {0};
  inst.service_mean_inv = {1.0, 2.0};
  inst.service_second_moment = {2.0, 1.0};
  inst.inter_server_delay = {0.0, 0.3, 0.3, 0.0};
  inst.server_capacity = {100.0, 100.0};
  inst.arrival_rate = {0.5};

  OffloadPolicy pol = OffloadPolicy::uniform(inst);
  CollaborationPolicy collab = CollaborationPolicy::identity(inst);
  collab.at(0, 0) = 0.0;
  collab.at(0, 1) = 1.0;
  const LambdaTable lambda_s = aggregate_lambda_s(pol, inst);

  // Weight 1; inbound at server 1 is 0.5 with mu = 2, nu = 1.
  const double waiting = 0.5 * 0.5 * 1.0 / (1.0 - 0.5 / 2.0);
  CHECK(server_sojourn(0, 1, collab, lambda_s, inst) ==
        doctest::Approx(0.3 + 0.5 + waiting));
  CHECK(server_sojourn(0, 0, collab, lambda_s, inst) == doctest::Approx(0.0));

  SUBCASE("zero outflow row is degenerate") {
    collab.at(0, 1) = 0.0;
    CHECK_THROWS_AS(server_sojourn(0, 1, collab, lambda_s, inst),
                    DegeneratePolicyError);
  }
}

TEST_CASE("priority gain signs") {
  SUBCASE("single class collapses to zero") {
    SystemInstance inst = small_instance(3, 1, 1);
    inst.arrival_rate = {0.2, 0.2, 0.2};
    OffloadPolicy pol = OffloadPolicy::uniform(inst, 0.8);
    const PriorityGain gain = priority_gain(0, pol, inst);
    CHECK(gain.delta == doctest::Approx(0.0));
    CHECK(gain.sign == 0);
  }
  SUBCASE("two-class system") {
    SystemInstance inst = small_instance(2, 1, 2);
    inst.arrival_rate = {0.3, 0.3};
    OffloadPolicy pol = OffloadPolicy::uniform(inst);
    const PriorityGain top = priority_gain(0, pol, inst);
    const PriorityGain bottom = priority_gain(1, pol, inst);
    CHECK(top.sign == 1);
    CHECK(top.delta >= 0.0);
    CHECK(bottom.sign == -1);
    CHECK(bottom.delta <= 0.0);
  }
}

TEST_CASE("paoi report additivity and csv") {
  SystemInstance inst = small_instance(3, 2, 2);
  inst.arrival_rate = {0.2, 0.3, 0.1};
  OffloadPolicy pol = OffloadPolicy::uniform(inst, 0.9);
  const CollaborationPolicy collab = CollaborationPolicy::identity(inst);
  const PaoiReport report = paoi_report(pol, collab, inst);
  for (int n = 0; n < 3; ++n) {
    CHECK(report.total[n] ==
          doctest::Approx(report.transmission[n] + report.interarrival[n] +
                          report.waiting[n] + report.service[n]));
    CHECK(report.total[n] >= 0.0);
  }
  const std::string csv = report.to_csv(inst);
  CHECK(csv.find("user,class,E_T,E_I,E_W,E_Y,E_A") == 0);
}
