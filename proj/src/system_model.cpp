#include "popec/system_model.hpp"

#include <algorithm>
#include <cmath>

#include "popec/math_util.hpp"

namespace popec {

std::vector<int> SystemInstance::users_of_server(int m) const {
  std::vector<int> out;
  for (int n = 0; n < num_users; ++n)
    if (user_server[n] == m) out.push_back(n);
  return out;
}

double shannon_rate(int channel, const SystemInstance& inst) {
  return inst.channel_bandwidth[channel] *
         std::log2(inst.channel_snr[channel] + 1.0);
}

SystemInstance generate_instance(std::uint64_t seed, const GeneratorDims& dims,
                                 const GeneratorRanges& r) {
  if (dims.num_users <= 0 || dims.num_servers <= 0 || dims.num_channels <= 0 ||
      dims.num_classes <= 0)
    throw ConfigError("generate_instance: all dimensions must be positive");
  if (r.mu_hi < r.mu_lo || r.nu_hi < r.nu_lo || r.lambda_hi < r.lambda_lo ||
      r.mu_lo <= 0.0 || r.lambda_lo <= 0.0 || r.packet_size <= 0.0 ||
      r.bandwidth <= 0.0 || r.channel_capacity <= 0.0 ||
      r.server_capacity <= 0.0)
    throw ConfigError("generate_instance: degenerate parameter ranges");

  Rng rng(seed);
  SystemInstance inst;
  inst.num_users = dims.num_users;
  inst.num_servers = dims.num_servers;
  inst.num_channels = dims.num_channels;
  inst.num_classes = dims.num_classes;

  const int N = dims.num_users, M = dims.num_servers, C = dims.num_channels;

  inst.user_server.resize(N);
  inst.user_class.resize(N);
  inst.arrival_rate.resize(N);
  for (int n = 0; n < N; ++n) {
    inst.user_server[n] = static_cast<int>(rng.next_u64() % M);
    inst.user_class[n] = 1 + static_cast<int>(rng.next_u64() % dims.num_classes);
    inst.arrival_rate[n] = rng.uniform(r.lambda_lo, r.lambda_hi);
  }

  inst.success_prob.resize(N * C);
  inst.hop_delay.resize(N * C);
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      const double draw = rng.gaussian(r.p_mean, r.p_stddev);
      inst.success_prob[n * C + c] =
          std::clamp(draw, r.p_clip_lo, r.p_clip_hi);
      inst.hop_delay[n * C + c] = rng.uniform(r.hop_delay_lo, r.hop_delay_hi);
    }
  }

  inst.service_mean_inv.resize(N * M);
  inst.service_second_moment.resize(N * M);
  for (int n = 0; n < N; ++n) {
    for (int m = 0; m < M; ++m) {
      const double mu = rng.uniform(r.mu_lo, r.mu_hi);
      const double mean = 1.0 / mu;
      double nu = rng.uniform(r.nu_lo, r.nu_hi);
      nu = std::max(nu, mean * mean);
      inst.service_mean_inv[n * M + m] = mu;
      inst.service_second_moment[n * M + m] = nu;
    }
  }

  inst.channel_bandwidth.assign(C, r.bandwidth);
  inst.channel_snr.assign(C, r.snr);
  inst.packet_size = r.packet_size;
  inst.channel_capacity.assign(C, r.channel_capacity);
  inst.server_capacity.assign(M, r.server_capacity);

  inst.inter_server_delay.resize(M * M);
  for (int m = 0; m < M; ++m)
    for (int m2 = 0; m2 < M; ++m2)
      inst.inter_server_delay[m * M + m2] =
          (m == m2) ? 0.0 : rng.uniform(r.server_delay_lo, r.server_delay_hi);

  inst.confidence_alpha = r.confidence_alpha;
  inst.confidence_beta = r.confidence_beta;
  return inst;
}

namespace {

void require(std::vector<InvariantViolation>& out, bool ok,
             const std::string& field, const std::string& message) {
  if (!ok) out.push_back({field, message});
}

}  // namespace

std::vector<InvariantViolation> validate_instance(const SystemInstance& inst) {
  std::vector<InvariantViolation> out;
  const int N = inst.num_users, M = inst.num_servers, C = inst.num_channels;

  require(out, N > 0 && M > 0 && C > 0 && inst.num_classes > 0, "dims",
          "all counts must be positive");
  if (!out.empty()) return out;

  auto sized = [&](const auto& v, std::size_t want, const char* field) {
    require(out, v.size() == want, field, "wrong element count");
  };
  sized(inst.user_server, N, "user_server");
  sized(inst.user_class, N, "user_class");
  sized(inst.arrival_rate, N, "arrival_rate");
  sized(inst.success_prob, static_cast<std::size_t>(N) * C, "success_prob");
  sized(inst.service_mean_inv, static_cast<std::size_t>(N) * M,
        "service_mean_inv");
  sized(inst.service_second_moment, static_cast<std::size_t>(N) * M,
        "service_second_moment");
  sized(inst.channel_bandwidth, C, "channel_bandwidth");
  sized(inst.channel_snr, C, "channel_snr");
  sized(inst.hop_delay, static_cast<std::size_t>(N) * C, "hop_delay");
  sized(inst.inter_server_delay, static_cast<std::size_t>(M) * M,
        "inter_server_delay");
  sized(inst.channel_capacity, C, "channel_capacity");
  sized(inst.server_capacity, M, "server_capacity");
  if (!out.empty()) return out;

  for (int n = 0; n < N; ++n) {
    require(out, inst.user_server[n] >= 0 && inst.user_server[n] < M,
            "user_server", "home server index out of range");
    require(out,
            inst.user_class[n] >= 1 && inst.user_class[n] <= inst.num_classes,
            "user_class", "class index out of range");
    require(out, inst.arrival_rate[n] > 0.0, "arrival_rate",
            "arrival rate must be strictly positive");
  }
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c) {
      const double p = inst.p(n, c);
      require(out, p >= 0.0 && p <= 1.0, "success_prob",
              "probability out of range");
    }
  for (int n = 0; n < N; ++n)
    for (int m = 0; m < M; ++m) {
      const double mu = inst.mu(n, m);
      const double nu = inst.nu(n, m);
      require(out, mu > 0.0, "service_mean_inv", "rate must be positive");
      require(out, nu > 0.0, "service_second_moment",
              "second moment must be positive");
      if (mu > 0.0)
        require(out, nu >= (1.0 / mu) * (1.0 / mu) * (1.0 - 1e-12),
                "service_second_moment", "second moment below squared mean");
    }
  for (int c = 0; c < C; ++c) {
    require(out, inst.channel_bandwidth[c] > 0.0, "channel_bandwidth",
            "bandwidth must be positive");
    require(out, inst.channel_snr[c] >= 0.0, "channel_snr",
            "SNR must be non-negative");
    require(out, inst.channel_capacity[c] > 0.0, "channel_capacity",
            "capacity must be positive");
  }
  for (int m = 0; m < M; ++m)
    require(out, inst.server_capacity[m] > 0.0, "server_capacity",
            "capacity must be positive");
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c)
      require(out, inst.hop(n, c) >= 0.0, "hop_delay",
              "delay must be non-negative");
  for (int m = 0; m < M; ++m)
    for (int m2 = 0; m2 < M; ++m2)
      require(out, inst.server_delay(m, m2) >= 0.0, "inter_server_delay",
              "delay must be non-negative");
  require(out, inst.packet_size > 0.0, "packet_size",
          "packet size must be positive");
  require(out, inst.confidence_alpha > 0.0 && inst.confidence_alpha < 1.0,
          "confidence_alpha", "must lie in (0,1)");
  require(out, inst.confidence_beta > 0.0 && inst.confidence_beta < 1.0,
          "confidence_beta", "must lie in (0,1)");
  return out;
}

}  // namespace popec
