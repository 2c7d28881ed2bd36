#include "popec/system_model.hpp"

#include "doctest.h"
#include "popec/config_io.hpp"

using namespace popec;

TEST_CASE("generate_instance is deterministic per seed") {
  const GeneratorDims dims{6, 2, 3, 2};
  const SystemInstance a = generate_instance(7, dims);
  const SystemInstance b = generate_instance(7, dims);
  CHECK(instance_to_config(a) == instance_to_config(b));
  const SystemInstance c = generate_instance(8, dims);
  CHECK(instance_to_config(a) != instance_to_config(c));
}

TEST_CASE("generated moments dominate the squared mean") {
  const SystemInstance inst = generate_instance(123, {40, 3, 4, 3});
  for (int n = 0; n < inst.num_users; ++n)
    for (int m = 0; m < inst.num_servers; ++m) {
      const double mean = 1.0 / inst.mu(n, m);
      CHECK(inst.nu(n, m) >= mean * mean);
      CHECK(inst.mu(n, m) >= 1.0);
      CHECK(inst.mu(n, m) <= 5.0);
    }
  for (double p : inst.success_prob) {
    CHECK(p >= 0.05);
    CHECK(p <= 1.0);
  }
  CHECK(validate_instance(inst).empty());
}

TEST_CASE("empty dimensions are rejected") {
  CHECK_THROWS_AS(generate_instance(1, {0, 1, 1, 1}), ConfigError);
  CHECK_THROWS_AS(generate_instance(1, {1, 1, -2, 1}), ConfigError);
  GeneratorRanges degenerate;
  degenerate.mu_hi = 0.5;  // below mu_lo
  CHECK_THROWS_AS(generate_instance(1, {1, 1, 1, 1}, degenerate), ConfigError);
}

TEST_CASE("shannon rate") {
  SystemInstance inst = generate_instance(1, {1, 1, 2, 1});
  inst.channel_bandwidth = {5e6, 5e6};
  inst.channel_snr = {1.0, 3.0};
  CHECK(shannon_rate(0, inst) == doctest::Approx(5e6));
  CHECK(shannon_rate(1, inst) == doctest::Approx(1e7));
  inst.channel_snr[0] = 0.0;
  CHECK(shannon_rate(0, inst) == doctest::Approx(0.0));
}

TEST_CASE("validate_instance reports violations without throwing") {
  SystemInstance inst = generate_instance(5, {3, 1, 2, 2});
  CHECK(validate_instance(inst).empty());

  SystemInstance bad_moment = inst;
  bad_moment.service_mean_inv[0] = 1.0;
  bad_moment.service_second_moment[0] = 0.5;
  bool found = false;
  for (const auto& v : validate_instance(bad_moment))
    if (v.message == "second moment below squared mean") found = true;
  CHECK(found);

  SystemInstance bad_prob = inst;
  bad_prob.success_prob[1] = 1.2;
  found = false;
  for (const auto& v : validate_instance(bad_prob))
    if (v.message == "probability out of range") found = true;
  CHECK(found);
}

TEST_CASE("instance config round trip") {
  const SystemInstance inst = generate_instance(11, {4, 2, 3, 2});
  const std::string text = instance_to_config(inst);
  const SystemInstance back = instance_from_config(text);
  CHECK(instance_to_config(back) == text);
  CHECK(validate_instance(back).empty());
}

TEST_CASE("config parser rejects malformed input") {
  CHECK_THROWS_AS(instance_from_config("[system]\nnum_users 3\n"), ConfigError);
  CHECK_THROWS_AS(instance_from_config("[system\nnum_users = 3\n"),
                  ConfigError);
  CHECK_THROWS_AS(instance_from_config("[system]\nnum_users = 0\n"),
                  ConfigError);
}
