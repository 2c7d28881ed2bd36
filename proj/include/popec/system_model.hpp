#ifndef POPEC_SYSTEM_MODEL_HPP_
#define POPEC_SYSTEM_MODEL_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace popec {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Immutable description of the offloading system: users, servers, channels,
// priority classes and the stochastic parameters of arrivals, transmission
// and service. Class index 1 is the highest priority.
struct SystemInstance {
  int num_users = 0;
  int num_servers = 0;
  int num_channels = 0;
  int num_classes = 0;

  std::vector<int> user_server;   // home server m_n, per user
  std::vector<int> user_class;    // priority class in {1..num_classes}
  std::vector<double> arrival_rate;  // lambda_n, tasks per time unit

  std::vector<double> success_prob;          // p[n*C + c]
  std::vector<double> service_mean_inv;      // mu[n*M + m], 1/mean service
  std::vector<double> service_second_moment; // nu[n*M + m]

  std::vector<double> channel_bandwidth;  // B_c, Hz
  std::vector<double> channel_snr;        // R_c
  double packet_size = 0.0;               // S, bits

  std::vector<double> hop_delay;          // t[n*C + c]
  std::vector<double> inter_server_delay; // t_tr[m*M + m'], 0 on the diagonal

  std::vector<double> channel_capacity;  // M_c^max, tasks per time unit
  std::vector<double> server_capacity;   // lambda^{s,max}_m

  double confidence_alpha = 0.0;
  double confidence_beta = 0.0;

  double p(int n, int c) const { return success_prob[n * num_channels + c]; }
  double mu(int n, int m) const { return service_mean_inv[n * num_servers + m]; }
  double nu(int n, int m) const {
    return service_second_moment[n * num_servers + m];
  }
  // Parameters at the user's home server.
  double mu_home(int n) const { return mu(n, user_server[n]); }
  double nu_home(int n) const { return nu(n, user_server[n]); }
  double hop(int n, int c) const { return hop_delay[n * num_channels + c]; }
  double server_delay(int m, int m2) const {
    return inter_server_delay[m * num_servers + m2];
  }

  std::vector<int> users_of_server(int m) const;
};

// B_c * log2(R_c + 1), bits per time unit.
double shannon_rate(int channel, const SystemInstance& inst);

struct GeneratorDims {
  int num_users = 0;
  int num_servers = 0;
  int num_channels = 0;
  int num_classes = 0;
};

// Draw ranges for generate_instance. Defaults follow the experimental
// parameterization: mu ~ U(1,5), nu ~ U(1,25) clamped to >= (1/mu)^2,
// lambda ~ U(0.5,1.5), p ~ N(0.5,1) clipped to [0.05,1], B = 5 MHz, R = 1.
struct GeneratorRanges {
  double mu_lo = 1.0, mu_hi = 5.0;
  double nu_lo = 1.0, nu_hi = 25.0;
  double lambda_lo = 0.5, lambda_hi = 1.5;
  double p_mean = 0.5, p_stddev = 1.0;
  double p_clip_lo = 0.05, p_clip_hi = 1.0;
  double bandwidth = 5e6;
  double snr = 1.0;
  double packet_size = 1e6;  // bits; r_c/S = 5 tasks per time unit
  double hop_delay_lo = 0.0, hop_delay_hi = 0.1;
  double server_delay_lo = 0.05, server_delay_hi = 0.2;
  // Channel-capacity bound chosen so the convexified right side stays
  // positive at alpha = 0.05 while still enforcing channel stability.
  double channel_capacity = 6.0;
  double server_capacity = 5.0;
  double confidence_alpha = 0.05;
  // Compute-capacity right side 1 - z must stay positive, which needs
  // beta > 2*(1 - Phi(1)) ~ 0.317; see capacity_bounds.
  double confidence_beta = 0.5;
};

SystemInstance generate_instance(std::uint64_t seed, const GeneratorDims& dims,
                                 const GeneratorRanges& ranges = {});

struct InvariantViolation {
  std::string field;
  std::string message;
};

// Empty report iff every type invariant holds. Violations are reported,
// never thrown.
std::vector<InvariantViolation> validate_instance(const SystemInstance& inst);

}  // namespace popec

#endif  // POPEC_SYSTEM_MODEL_HPP_
