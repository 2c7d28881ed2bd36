#include "popec/freshness.hpp"

#include <cmath>

#include "popec/math_util.hpp"

namespace popec {

double channel_load(int c, const OffloadPolicy& pol,
                    const SystemInstance& inst) {
  double load = 0.0;
  for (int n = 0; n < inst.num_users; ++n)
    load += pol.at(n, c) * inst.arrival_rate[n];
  return load;
}

double effective_rate(int n, const OffloadPolicy& pol,
                      const SystemInstance& inst) {
  double rate = 0.0;
  for (int c = 0; c < inst.num_channels; ++c)
    rate += inst.p(n, c) * pol.at(n, c);
  return rate * inst.arrival_rate[n];
}

double transmission_time(int n, int c, const OffloadPolicy& pol,
                         const SystemInstance& inst) {
  const double service_rate = shannon_rate(c, inst) / inst.packet_size;
  const double load = channel_load(c, pol, inst);
  if (load >= service_rate * (1.0 - kUtilizationSlack)) return kInfiniteTime;
  return 1.0 / (service_rate - load) + inst.hop(n, c);
}

double priority_waiting_time(int n, const OffloadPolicy& pol,
                             const SystemInstance& inst,
                             bool force_single_class) {
  const int home = inst.user_server[n];
  const int my_class = force_single_class ? 1 : inst.user_class[n];

  double residual = 0.0;   // half the sum of effective-rate * second-moment
  double util_upto = 0.0;  // cumulative utilization, classes <= my_class
  double util_above = 0.0; // cumulative utilization, classes < my_class
  for (int n2 = 0; n2 < inst.num_users; ++n2) {
    if (inst.user_server[n2] != home) continue;
    const double rate = effective_rate(n2, pol, inst);
    residual += 0.5 * rate * inst.nu_home(n2);
    const int cls = force_single_class ? 1 : inst.user_class[n2];
    const double util = rate / inst.mu_home(n2);
    if (cls <= my_class) util_upto += util;
    if (cls <= my_class - 1) util_above += util;
  }
  if (residual == 0.0) return 0.0;
  const double f1 = 1.0 - util_upto;
  const double f2 = 1.0 - util_above;
  if (f1 <= kUtilizationSlack || f2 <= kUtilizationSlack) return kInfiniteTime;
  return residual / (f1 * f2);
}

LambdaTable aggregate_lambda_s(const OffloadPolicy& pol,
                               const SystemInstance& inst) {
  LambdaTable table(
      static_cast<std::size_t>(inst.num_classes) * inst.num_servers, 0.0);
  for (int n = 0; n < inst.num_users; ++n) {
    const int row = inst.user_class[n] - 1;
    table[row * inst.num_servers + inst.user_server[n]] +=
        effective_rate(n, pol, inst);
  }
  return table;
}

namespace {

struct SojournParts {
  double transfer_and_service = 0.0;
  double waiting = 0.0;
  bool infinite = false;
};

SojournParts sojourn_parts(int n, int m, const CollaborationPolicy& collab,
                           const LambdaTable& lambda_s,
                           const SystemInstance& inst) {
  const int M = inst.num_servers;
  const int home = inst.user_server[n];

  double outflow = 0.0;
  for (int d = 0; d < inst.num_classes; ++d) outflow += lambda_s[d * M + home];
  double row_sum = 0.0;
  for (int m2 = 0; m2 < M; ++m2) row_sum += collab.at(home, m2);
  if (outflow * row_sum <= 0.0)
    throw DegeneratePolicyError(
        "server_sojourn: zero total outflow from the home server");

  const double weight = collab.at(home, m) * outflow / (outflow * row_sum);
  SojournParts parts;
  if (weight == 0.0) return parts;

  const double mu = inst.mu(n, m);
  const double nu = inst.nu(n, m);
  const int my_class = inst.user_class[n];

  double inbound_total = 0.0, inbound_upto = 0.0, inbound_above = 0.0;
  for (int d = 0; d < inst.num_classes; ++d) {
    double in_d = 0.0;
    for (int m2 = 0; m2 < M; ++m2)
      in_d += collab.at(m2, m) * lambda_s[d * M + m2];
    inbound_total += in_d;
    if (d + 1 <= my_class) inbound_upto += in_d;
    if (d + 1 <= my_class - 1) inbound_above += in_d;
  }

  const double f1 = 1.0 - inbound_upto / mu;
  const double f2 = 1.0 - inbound_above / mu;
  double waiting = 0.0;
  if (inbound_total > 0.0) {
    if (f1 <= kUtilizationSlack || f2 <= kUtilizationSlack) {
      parts.infinite = true;
      return parts;
    }
    waiting = 0.5 * inbound_total * nu / (f1 * f2);
  }
  parts.transfer_and_service = weight * (inst.server_delay(home, m) + 1.0 / mu);
  parts.waiting = weight * waiting;
  return parts;
}

}  // namespace

double server_sojourn(int n, int m, const CollaborationPolicy& collab,
                      const LambdaTable& lambda_s, const SystemInstance& inst) {
  const SojournParts parts = sojourn_parts(n, m, collab, lambda_s, inst);
  if (parts.infinite) return kInfiniteTime;
  return parts.transfer_and_service + parts.waiting;
}

PaoiComponents expected_paoi(int n, const OffloadPolicy& pol,
                             const CollaborationPolicy& collab,
                             const SystemInstance& inst,
                             bool force_single_class) {
  PaoiComponents out;

  const double rate = effective_rate(n, pol, inst);
  if (rate <= 0.0) {
    out.transmission = out.interarrival = out.waiting = out.service =
        out.total = kInfiniteTime;
    return out;
  }
  out.interarrival = 1.0 / rate;

  for (int c = 0; c < inst.num_channels; ++c) {
    const double share = pol.at(n, c);
    if (share == 0.0) continue;
    const double t = transmission_time(n, c, pol, inst);
    if (is_infinite_time(t)) {
      out.transmission = kInfiniteTime;
      break;
    }
    out.transmission += share * t;
  }

  const int home = inst.user_server[n];
  if (collab.y.empty() || collab.y[home] == 0) {
    out.waiting = priority_waiting_time(n, pol, inst, force_single_class);
    out.service = 1.0 / inst.mu_home(n);
  } else {
    const LambdaTable lambda_s = aggregate_lambda_s(pol, inst);
    for (int m = 0; m < inst.num_servers; ++m) {
      const SojournParts parts = sojourn_parts(n, m, collab, lambda_s, inst);
      if (parts.infinite) {
        out.waiting = kInfiniteTime;
        break;
      }
      out.waiting += parts.waiting;
      out.service += parts.transfer_and_service;
    }
  }

  out.total =
      out.transmission + out.interarrival + out.waiting + out.service;
  return out;
}

double mean_paoi(const OffloadPolicy& pol, const CollaborationPolicy& collab,
                 const SystemInstance& inst, bool force_single_class) {
  double sum = 0.0;
  for (int n = 0; n < inst.num_users; ++n) {
    const double a =
        expected_paoi(n, pol, collab, inst, force_single_class).total;
    if (is_infinite_time(a)) return kInfiniteTime;
    sum += a;
  }
  return sum / inst.num_users;
}

PaoiReport paoi_report(const OffloadPolicy& pol,
                       const CollaborationPolicy& collab,
                       const SystemInstance& inst, bool force_single_class) {
  PaoiReport report;
  const int N = inst.num_users;
  report.transmission.resize(N);
  report.interarrival.resize(N);
  report.waiting.resize(N);
  report.service.resize(N);
  report.total.resize(N);
  double sum = 0.0;
  for (int n = 0; n < N; ++n) {
    const PaoiComponents c =
        expected_paoi(n, pol, collab, inst, force_single_class);
    report.transmission[n] = c.transmission;
    report.interarrival[n] = c.interarrival;
    report.waiting[n] = c.waiting;
    report.service[n] = c.service;
    report.total[n] = c.total;
    sum += c.total;
  }
  report.mean_objective = sum / N;
  return report;
}

PriorityGain priority_gain(int n, const OffloadPolicy& pol,
                           const SystemInstance& inst) {
  PriorityGain gain;
  const double prioritized = priority_waiting_time(n, pol, inst, false);
  const double free = priority_waiting_time(n, pol, inst, true);
  if (is_infinite_time(prioritized) && is_infinite_time(free)) {
    return gain;
  }
  gain.delta = free - prioritized;
  if (inst.num_classes > 1) {
    if (inst.user_class[n] == 1) gain.sign = 1;
    if (inst.user_class[n] == inst.num_classes)
      gain.sign = gain.sign == 1 ? 0 : -1;
  }
  return gain;
}

}  // namespace popec
