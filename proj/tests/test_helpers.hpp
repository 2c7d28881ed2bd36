#ifndef POPEC_TESTS_TEST_HELPERS_HPP_
#define POPEC_TESTS_TEST_HELPERS_HPP_

#include <vector>

#include "popec/policy.hpp"
#include "popec/system_model.hpp"

namespace popec::testing {

// Hand-built single-server instance with unit success probabilities, fast
// channels and explicit service moments. Users get classes 1..K cyclically.
inline SystemInstance small_instance(int users, int channels, int classes,
                                     double channel_rate_tasks = 1000.0) {
  SystemInstance inst;
  inst.num_users = users;
  inst.num_servers = 1;
  inst.num_channels = channels;
  inst.num_classes = classes;
  inst.user_server.assign(users, 0);
  inst.user_class.resize(users);
  for (int n = 0; n < users; ++n) inst.user_class[n] = 1 + n % classes;
  inst.arrival_rate.assign(users, 1.0);
  inst.success_prob.assign(users * channels, 1.0);
  inst.service_mean_inv.assign(users, 1.0);
  inst.service_second_moment.assign(users, 2.0);
  inst.channel_bandwidth.assign(channels, 5e6);
  inst.channel_snr.assign(channels, 1.0);
  inst.packet_size = 5e6 / channel_rate_tasks;  // r_c / S in tasks per unit
  inst.hop_delay.assign(users * channels, 0.0);
  inst.inter_server_delay.assign(1, 0.0);
  inst.channel_capacity.assign(channels, 30.0);
  inst.server_capacity.assign(1, 100.0);
  inst.confidence_alpha = 0.05;
  inst.confidence_beta = 0.5;
  return inst;
}

// Default randomized instance family used across solver tests.
inline SystemInstance default_instance(std::uint64_t seed, int users = 10,
                                       int servers = 1, int channels = 3,
                                       int classes = 3) {
  return generate_instance(seed, {users, servers, channels, classes});
}

}  // namespace popec::testing

#endif  // POPEC_TESTS_TEST_HELPERS_HPP_
