#include "popec/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "popec/math_util.hpp"

namespace popec {

FeasibleSetSpec capacity_bounds(const SystemInstance& inst) {
  FeasibleSetSpec spec;
  spec.z1 = inverse_normal_cdf(inst.confidence_alpha / 2.0);
  spec.z2 = inverse_normal_cdf(1.0 - inst.confidence_alpha / 2.0);
  spec.z3 = inverse_normal_cdf(inst.confidence_beta / 2.0);
  spec.z4 = inverse_normal_cdf(1.0 - inst.confidence_beta / 2.0);

  spec.channel_rhs.resize(inst.num_channels);
  for (int c = 0; c < inst.num_channels; ++c) {
    const double base = inst.channel_capacity[c] + spec.z2 * spec.z2 / 2.0 -
                        spec.z1 * spec.z1 / 2.0;
    if (base <= 0.0)
      throw InfeasibleError("capacity_bounds: channel capacity too small");
    const double rhs = base - spec.z2 * std::sqrt(base);
    if (rhs <= 0.0)
      throw InfeasibleError(
          "capacity_bounds: channel capacity below the confidence threshold");
    spec.channel_rhs[c] = rhs;
  }

  const double base = 1.0 + spec.z4 * spec.z4 / 2.0 - spec.z3 * spec.z3 / 2.0;
  const double compute = base - spec.z4 * std::sqrt(base);
  if (compute <= 0.0)
    throw InfeasibleError(
        "capacity_bounds: compute confidence level admits no load");
  spec.compute_rhs.assign(inst.num_servers, compute);
  return spec;
}

std::string violations_to_text(const std::vector<ConstraintViolation>& v) {
  std::ostringstream os;
  os.precision(12);
  for (const auto& item : v) os << item.id << ' ' << item.slack << '\n';
  return os.str();
}

DecisionLayout all_users_layout(const SystemInstance& inst) {
  DecisionLayout layout;
  layout.users.resize(inst.num_users);
  for (int n = 0; n < inst.num_users; ++n) layout.users[n] = n;
  layout.num_channels = inst.num_channels;
  return layout;
}

OffloadPolicy unpack_policy(std::span<const double> x,
                            const DecisionLayout& layout,
                            const SystemInstance& inst) {
  OffloadPolicy pol = OffloadPolicy::zeros(inst);
  for (std::size_t u = 0; u < layout.users.size(); ++u) {
    const int n = layout.users[u];
    for (int c = 0; c < layout.num_channels; ++c)
      pol.at(n, c) = x[layout.eta_index(static_cast<int>(u), c)];
    pol.t_hat[n] = x[layout.t_hat_index(static_cast<int>(u))];
  }
  return pol;
}

void pack_policy(const OffloadPolicy& pol, const DecisionLayout& layout,
                 std::span<double> x) {
  for (std::size_t u = 0; u < layout.users.size(); ++u) {
    const int n = layout.users[u];
    for (int c = 0; c < layout.num_channels; ++c)
      x[layout.eta_index(static_cast<int>(u), c)] = pol.at(n, c);
    x[layout.t_hat_index(static_cast<int>(u))] = pol.t_hat[n];
  }
}

FeasibleRegion::FeasibleRegion(const SystemInstance& inst,
                               const FeasibleSetSpec& spec,
                               DecisionLayout layout,
                               const LambdaTable* coupling_bound)
    : layout_(std::move(layout)) {
  const int U = static_cast<int>(layout_.users.size());
  const int C = layout_.num_channels;

  for (int u = 0; u < U; ++u) {
    HalfSpace h;
    for (int c = 0; c < C; ++c) {
      h.index.push_back(layout_.eta_index(u, c));
      h.weight.push_back(1.0);
    }
    h.rhs = 1.0;
    h.weight_norm2 = C;
    h.id = "eta_row_sum[" + std::to_string(layout_.users[u]) + "]";
    half_spaces_.push_back(std::move(h));
  }

  for (int c = 0; c < C; ++c) {
    HalfSpace h;
    for (int u = 0; u < U; ++u) {
      const double w = inst.arrival_rate[layout_.users[u]];
      h.index.push_back(layout_.eta_index(u, c));
      h.weight.push_back(w);
      h.weight_norm2 += w * w;
    }
    h.rhs = spec.channel_rhs[c];
    h.id = "channel_capacity[" + std::to_string(c) + "]";
    half_spaces_.push_back(std::move(h));
  }

  for (int m = 0; m < inst.num_servers; ++m) {
    HalfSpace h;
    for (int u = 0; u < U; ++u) {
      const int n = layout_.users[u];
      if (inst.user_server[n] != m) continue;
      for (int c = 0; c < C; ++c) {
        const double w =
            inst.p(n, c) * inst.arrival_rate[n] / inst.mu_home(n);
        h.index.push_back(layout_.eta_index(u, c));
        h.weight.push_back(w);
        h.weight_norm2 += w * w;
      }
    }
    if (h.index.empty()) continue;
    h.rhs = spec.compute_rhs[m];
    h.id = "compute_capacity[" + std::to_string(m) + "]";
    half_spaces_.push_back(std::move(h));
  }

  if (coupling_bound != nullptr) {
    for (int d = 0; d < inst.num_classes; ++d) {
      for (int m = 0; m < inst.num_servers; ++m) {
        HalfSpace h;
        for (int u = 0; u < U; ++u) {
          const int n = layout_.users[u];
          if (inst.user_server[n] != m || inst.user_class[n] != d + 1)
            continue;
          for (int c = 0; c < C; ++c) {
            const double w = inst.p(n, c) * inst.arrival_rate[n];
            h.index.push_back(layout_.eta_index(u, c));
            h.weight.push_back(w);
            h.weight_norm2 += w * w;
          }
        }
        if (h.index.empty()) continue;
        h.rhs = (*coupling_bound)[d * inst.num_servers + m];
        h.id = "coupling[" + std::to_string(d + 1) + "," + std::to_string(m) +
               "]";
        half_spaces_.push_back(std::move(h));
      }
    }
  }

  for (int u = 0; u < U; ++u) {
    const int n = layout_.users[u];
    for (int c = 0; c < C; ++c) {
      TransmissionSet t;
      t.t_hat_index = layout_.t_hat_index(u);
      for (int u2 = 0; u2 < U; ++u2) {
        t.eta_index.push_back(layout_.eta_index(u2, c));
        const double w = inst.arrival_rate[layout_.users[u2]];
        t.eta_weight.push_back(w);
        t.weight_norm2 += w * w;
      }
      t.service_rate = shannon_rate(c, inst) / inst.packet_size;
      t.hop_delay = inst.hop(n, c);
      t.id = "transmission_bound[" + std::to_string(n) + "," +
             std::to_string(c) + "]";
      transmission_sets_.push_back(std::move(t));
    }
  }
}

void FeasibleRegion::project_half_space(const HalfSpace& h,
                                        std::span<double> x) {
  double value = 0.0;
  for (std::size_t i = 0; i < h.index.size(); ++i)
    value += h.weight[i] * x[h.index[i]];
  if (value <= h.rhs || h.weight_norm2 == 0.0) return;
  const double step = (value - h.rhs) / h.weight_norm2;
  for (std::size_t i = 0; i < h.index.size(); ++i)
    x[h.index[i]] -= step * h.weight[i];
}

double FeasibleRegion::transmission_violation(const TransmissionSet& t,
                                              std::span<const double> x) {
  double load = 0.0;
  for (std::size_t i = 0; i < t.eta_index.size(); ++i)
    load += t.eta_weight[i] * x[t.eta_index[i]];
  if (load >= t.service_rate) return kInfiniteTime;
  return 1.0 / (t.service_rate - load) + t.hop_delay - x[t.t_hat_index];
}

void FeasibleRegion::project_transmission(const TransmissionSet& t,
                                          std::span<double> x) {
  double u0 = 0.0;
  for (std::size_t i = 0; i < t.eta_index.size(); ++i)
    u0 += t.eta_weight[i] * x[t.eta_index[i]];
  const double v0 = x[t.t_hat_index];
  const double a = t.service_rate;
  const double t0 = t.hop_delay;

  if (u0 < a && 1.0 / (a - u0) + t0 <= v0) return;

  const double W2 = t.weight_norm2;
  const double cap = a - 1e-13 * std::max(1.0, a);
  auto phi = [&](double u) { return 1.0 / (a - u) + t0; };
  auto dh = [&](double u) {
    const double dphi = 1.0 / ((a - u) * (a - u));
    return (u - u0) / W2 + (phi(u) - v0) * dphi;
  };

  // Bracket the stationary point of the distance to the boundary curve.
  double hi = std::min(u0, cap);
  for (int it = 0; it < 60 && dh(hi) < 0.0 && hi < cap; ++it)
    hi = std::min(cap, 0.5 * (hi + a));
  double lo = hi - std::max(1.0, std::abs(hi));
  for (int it = 0; it < 200 && dh(lo) > 0.0; ++it) lo -= 2.0 * (hi - lo);

  for (int it = 0; it < 90; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (dh(mid) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  const double u_star = std::min(0.5 * (lo + hi), cap);

  const double shift = (u_star - u0) / W2;
  for (std::size_t i = 0; i < t.eta_index.size(); ++i)
    x[t.eta_index[i]] += shift * t.eta_weight[i];
  x[t.t_hat_index] = std::max(v0, phi(u_star));
}

void FeasibleRegion::project_once(std::span<double> x) const {
  const int U = static_cast<int>(layout_.users.size());
  const int C = layout_.num_channels;
  for (int u = 0; u < U; ++u) {
    for (int c = 0; c < C; ++c) {
      double& v = x[layout_.eta_index(u, c)];
      v = std::clamp(v, 0.0, 1.0);
    }
    double& th = x[layout_.t_hat_index(u)];
    th = std::max(th, 0.0);
  }
  for (const auto& h : half_spaces_) project_half_space(h, x);
  for (const auto& t : transmission_sets_) project_transmission(t, x);
}

void FeasibleRegion::project(std::span<double> x, double tol,
                             int max_cycles) const {
  // Dykstra's corrected alternating projections: one correction buffer per
  // set (box first, then half-spaces, then transmission sets).
  const std::size_t dim = x.size();
  const std::size_t num_sets =
      1 + half_spaces_.size() + transmission_sets_.size();
  std::vector<std::vector<double>> corrections(num_sets,
                                               std::vector<double>(dim, 0.0));
  std::vector<double> before(dim), cycle_start(dim);

  const int U = static_cast<int>(layout_.users.size());
  const int C = layout_.num_channels;

  for (int cycle = 0; cycle < max_cycles; ++cycle) {
    std::copy(x.begin(), x.end(), cycle_start.begin());
    std::size_t set_id = 0;
    double corr_drift2 = 0.0;

    auto apply = [&](auto&& project_set) {
      auto& corr = corrections[set_id++];
      for (std::size_t i = 0; i < dim; ++i) {
        x[i] += corr[i];
        before[i] = x[i];
      }
      project_set();
      for (std::size_t i = 0; i < dim; ++i) {
        const double updated = before[i] - x[i];
        const double d = updated - corr[i];
        corr_drift2 += d * d;
        corr[i] = updated;
      }
    };

    apply([&] {
      for (int u = 0; u < U; ++u) {
        for (int c = 0; c < C; ++c) {
          double& v = x[layout_.eta_index(u, c)];
          v = std::clamp(v, 0.0, 1.0);
        }
        double& th = x[layout_.t_hat_index(u)];
        th = std::max(th, 0.0);
      }
    });
    for (const auto& h : half_spaces_)
      apply([&] { project_half_space(h, x); });
    for (const auto& t : transmission_sets_)
      apply([&] { project_transmission(t, x); });

    // The iterate converges to the projection; the stop test must include
    // the correction drift since the iterate can stall for whole cycles
    // while corrections still evolve.
    double moved2 = corr_drift2, scale2 = 1.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = x[i] - cycle_start[i];
      moved2 += d * d;
      scale2 += x[i] * x[i];
    }
    if (moved2 <= 1e-24 * scale2 && contains(x, tol * 0.1)) return;
  }
  if (!contains(x, tol))
    throw ProjectionError("project: alternating projections did not converge");
}

bool FeasibleRegion::contains(std::span<const double> x, double tol) const {
  const int U = static_cast<int>(layout_.users.size());
  const int C = layout_.num_channels;
  for (int u = 0; u < U; ++u) {
    for (int c = 0; c < C; ++c) {
      const double v = x[layout_.eta_index(u, c)];
      if (v < -tol || v > 1.0 + tol) return false;
    }
    if (x[layout_.t_hat_index(u)] < -tol) return false;
  }
  for (const auto& h : half_spaces_) {
    double value = 0.0;
    for (std::size_t i = 0; i < h.index.size(); ++i)
      value += h.weight[i] * x[h.index[i]];
    if (value > h.rhs + tol) return false;
  }
  for (const auto& t : transmission_sets_)
    if (transmission_violation(t, x) > tol) return false;
  return true;
}

void FeasibleRegion::append_violations(
    std::span<const double> x, double tol,
    std::vector<ConstraintViolation>& out) const {
  const int U = static_cast<int>(layout_.users.size());
  const int C = layout_.num_channels;
  for (int u = 0; u < U; ++u) {
    for (int c = 0; c < C; ++c) {
      const double v = x[layout_.eta_index(u, c)];
      const double slack = std::min(v, 1.0 - v);
      if (slack < -tol)
        out.push_back({"eta_box[" + std::to_string(layout_.users[u]) + "," +
                           std::to_string(c) + "]",
                       slack});
    }
    const double th = x[layout_.t_hat_index(u)];
    if (th < -tol)
      out.push_back(
          {"t_hat_positive[" + std::to_string(layout_.users[u]) + "]", th});
  }
  for (const auto& h : half_spaces_) {
    double value = 0.0;
    for (std::size_t i = 0; i < h.index.size(); ++i)
      value += h.weight[i] * x[h.index[i]];
    if (h.rhs - value < -tol) out.push_back({h.id, h.rhs - value});
  }
  for (const auto& t : transmission_sets_) {
    const double v = transmission_violation(t, x);
    if (v > tol)
      out.push_back({t.id, is_infinite_time(v) ? -kInfiniteTime : -v});
  }
}

void project_feasible(std::span<double> x, const FeasibleSetSpec& spec,
                      const SystemInstance& inst) {
  for (double v : x)
    if (!std::isfinite(v))
      throw ProjectionError("project_feasible: candidate must be finite");
  const FeasibleRegion region(inst, spec, all_users_layout(inst));
  region.project(x);
}

std::vector<ConstraintViolation> check_feasible(
    const OffloadPolicy& pol, const CollaborationPolicy& collab,
    const FeasibleSetSpec& spec, const SystemInstance& inst, double tol,
    const LambdaTable* coupling_bound) {
  std::vector<ConstraintViolation> out;

  const DecisionLayout layout = all_users_layout(inst);
  std::vector<double> x(layout.dim());
  pack_policy(pol, layout, x);
  const FeasibleRegion region(inst, spec, layout, coupling_bound);
  region.append_violations(x, tol, out);

  const int M = inst.num_servers;
  for (int m = 0; m < M; ++m) {
    double row = 0.0;
    for (int m2 = 0; m2 < M; ++m2) {
      const double v = collab.at(m, m2);
      row += v;
      const double slack = std::min(v, 1.0 - v);
      if (slack < -tol)
        out.push_back({"eta_s_box[" + std::to_string(m) + "," +
                           std::to_string(m2) + "]",
                       slack});
    }
    if (std::abs(row - 1.0) > tol)
      out.push_back(
          {"eta_s_row_sum[" + std::to_string(m) + "]", -std::abs(row - 1.0)});
  }
  for (std::size_t m = 0; m < collab.y.size(); ++m) {
    const int y = collab.y[m];
    if (y != 0 && y != 1)
      out.push_back({"migration_flag[" + std::to_string(m) + "]", -1.0});
  }

  const LambdaTable lambda_s = aggregate_lambda_s(pol, inst);
  for (int m = 0; m < M; ++m) {
    double inbound = 0.0;
    for (int d = 0; d < inst.num_classes; ++d)
      for (int m2 = 0; m2 < M; ++m2)
        inbound += collab.at(m2, m) * lambda_s[d * M + m2];
    const double slack = inst.server_capacity[m] - inbound;
    if (slack < -tol)
      out.push_back({"server_capacity[" + std::to_string(m) + "]", slack});
  }
  return out;
}

}  // namespace popec
