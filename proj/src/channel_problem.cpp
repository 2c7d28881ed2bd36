#include "popec/channel_problem.hpp"

#include <algorithm>
#include <cmath>

#include "popec/math_util.hpp"

namespace popec {

ChannelProblem::ChannelProblem(const SystemInstance& inst,
                               const FeasibleSetSpec& spec,
                               std::vector<int> users,
                               const LambdaTable* coupling_bound)
    : inst_(&inst),
      layout_{std::move(users), inst.num_channels},
      region_(inst, spec, layout_, coupling_bound),
      num_classes_(inst.num_classes) {
  const int U = num_agents();
  const int C = inst.num_channels;
  rate_coeff_.resize(U * C);
  util_coeff_.resize(U * C);
  moment_coeff_.resize(U * C);
  agent_class_.resize(U);
  mu_home_.resize(U);
  for (int u = 0; u < U; ++u) {
    const int n = layout_.users[u];
    agent_class_[u] = inst.user_class[n];
    mu_home_[u] = inst.mu_home(n);
    for (int c = 0; c < C; ++c) {
      const double p_lambda = inst.p(n, c) * inst.arrival_rate[n];
      rate_coeff_[u * C + c] = p_lambda;
      util_coeff_[u * C + c] = p_lambda / inst.mu_home(n);
      moment_coeff_[u * C + c] = 0.5 * p_lambda * inst.nu_home(n);
    }
  }
}

void ChannelProblem::project(std::span<double> x) const { region_.project(x); }

double ChannelProblem::psi(int agent, std::span<const double> x) const {
  const int C = layout_.num_channels;
  double v = 0.0;
  for (int c = 0; c < C; ++c)
    v += rate_coeff_[agent * C + c] * x[agent * C + c];
  return v;
}

double ChannelProblem::upsilon(std::span<const double> x) const {
  const int total = num_agents() * layout_.num_channels;
  double v = 0.0;
  for (int i = 0; i < total; ++i) v += moment_coeff_[i] * x[i];
  return v;
}

double ChannelProblem::phi(int k, std::span<const double> x) const {
  if (k <= 0) return 1.0;
  const int C = layout_.num_channels;
  double util = 0.0;
  for (int u = 0; u < num_agents(); ++u) {
    if (agent_class_[u] > k) continue;
    for (int c = 0; c < C; ++c) util += util_coeff_[u * C + c] * x[u * C + c];
  }
  return 1.0 - util;
}

double ChannelProblem::p1_value(int agent, std::span<const double> x) const {
  const double rate = psi(agent, x);
  if (rate <= 0.0) return kInfiniteTime;
  const double phi_total = phi(num_classes_, x);
  if (phi_total <= 0.0) return kInfiniteTime;
  return x[layout_.t_hat_index(agent)] + 1.0 / rate +
         upsilon(x) / phi_total + 1.0 / mu_home_[agent];
}

void ChannelProblem::p1_gradient(int agent, std::span<const double> x,
                                 std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const int C = layout_.num_channels;
  const double rate = std::max(psi(agent, x), 1e-12);
  const double phi_total = std::max(phi(num_classes_, x), 1e-12);
  const double ups = upsilon(x);
  for (int u = 0; u < num_agents(); ++u) {
    for (int c = 0; c < C; ++c) {
      const int i = u * C + c;
      double g = (moment_coeff_[i] * phi_total + ups * util_coeff_[i]) /
                 (phi_total * phi_total);
      if (u == agent) g -= rate_coeff_[i] / (rate * rate);
      out[i] = g;
    }
  }
  out[layout_.t_hat_index(agent)] = 1.0;
}

double ChannelProblem::f_upper(int agent, std::span<const double> x) const {
  const double a = phi(agent_class_[agent], x);
  const double b = phi(agent_class_[agent] - 1, x);
  const double rate = psi(agent, x);
  return a * b + upsilon(x) * rate +
         x[layout_.t_hat_index(agent)] * rate * a * b;
}

double ChannelProblem::f_lower(int agent, std::span<const double> x) const {
  return psi(agent, x) * phi(agent_class_[agent], x) *
         phi(agent_class_[agent] - 1, x);
}

double ChannelProblem::p2_value(int agent, std::span<const double> x,
                                double theta) const {
  const double a = phi(agent_class_[agent], x);
  const double b = phi(agent_class_[agent] - 1, x);
  const double rate = psi(agent, x);
  const double t_hat = x[layout_.t_hat_index(agent)];
  return a * b * (1.0 + (t_hat - theta) * rate) + upsilon(x) * rate;
}

void ChannelProblem::p2_gradient(int agent, std::span<const double> x,
                                 double theta, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const int C = layout_.num_channels;
  const int cls = agent_class_[agent];
  const double a = phi(cls, x);
  const double b = phi(cls - 1, x);
  const double rate = psi(agent, x);
  const double ups = upsilon(x);
  const double t_shift = x[layout_.t_hat_index(agent)] - theta;

  for (int u = 0; u < num_agents(); ++u) {
    const bool in_a = agent_class_[u] <= cls;
    const bool in_b = agent_class_[u] <= cls - 1;
    for (int c = 0; c < C; ++c) {
      const int i = u * C + c;
      const double da = in_a ? -util_coeff_[i] : 0.0;
      const double db = in_b ? -util_coeff_[i] : 0.0;
      const double dpsi = (u == agent) ? rate_coeff_[i] : 0.0;
      out[i] = (da * b + a * db) * (1.0 + t_shift * rate) +
               a * b * t_shift * dpsi + moment_coeff_[i] * rate + ups * dpsi;
    }
  }
  out[layout_.t_hat_index(agent)] = rate * a * b;
}

double ChannelProblem::f2_value(int agent, std::span<const double> x) const {
  const double rate = psi(agent, x);
  if (rate <= 0.0) return kInfiniteTime;
  return x[layout_.t_hat_index(agent)] + 1.0 / rate;
}

void ChannelProblem::f2_gradient(int agent, std::span<const double> x,
                                 std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const int C = layout_.num_channels;
  const double rate = std::max(psi(agent, x), 1e-12);
  for (int c = 0; c < C; ++c) {
    const int i = agent * C + c;
    out[i] = -rate_coeff_[i] / (rate * rate);
  }
  out[layout_.t_hat_index(agent)] = 1.0;
}

std::vector<double> ChannelProblem::uniform_feasible() const {
  std::vector<double> x(dim(), 0.0);
  const int C = layout_.num_channels;
  for (int u = 0; u < num_agents(); ++u) {
    for (int c = 0; c < C; ++c) x[u * C + c] = 1.0 / C;
    x[layout_.t_hat_index(u)] = 0.0;
  }
  region_.project(x);
  // Rest the transmission bounds on their lower envelope; the objectives
  // increase in t_hat, and starting far above it makes the consensus
  // iteration crawl.
  for (int u = 0; u < num_agents(); ++u) {
    const int n = layout_.users[u];
    double bound = 0.0;
    for (int c = 0; c < C; ++c) {
      const double service_rate = shannon_rate(c, *inst_) / inst_->packet_size;
      double load = 0.0;
      for (int u2 = 0; u2 < num_agents(); ++u2)
        load += inst_->arrival_rate[layout_.users[u2]] * x[u2 * C + c];
      if (load < service_rate)
        bound = std::max(bound,
                         1.0 / (service_rate - load) + inst_->hop(n, c));
    }
    x[layout_.t_hat_index(u)] = bound;
  }
  region_.project(x);
  return x;
}

double ChannelProblem::lipschitz(int agent, double theta) const {
  double lambda_max = 0.0, mu_min = kInfiniteTime;
  for (int u = 0; u < num_agents(); ++u) {
    lambda_max =
        std::max(lambda_max, inst_->arrival_rate[layout_.users[u]]);
    mu_min = std::min(mu_min, mu_home_[u]);
  }
  const double nu_n = inst_->nu_home(layout_.users[agent]);
  const double mu_n = mu_home_[agent];
  double sum_pair = 0.0;
  int n1 = 0, n2 = 0;
  for (int u = 0; u < num_agents(); ++u) {
    sum_pair += nu_n / (2.0 * mu_n * mu_home_[u]);
    if (agent_class_[u] < agent_class_[agent] || u == agent) ++n1;
    if (agent_class_[u] <= agent_class_[agent]) ++n2;
  }
  const double half_moment = theta * nu_n / (2.0 * mu_n);
  return (lambda_max * lambda_max) / (mu_min * mu_min) *
         (sum_pair + (1.0 + half_moment) * n1 + half_moment * n2);
}

ConsensusProblem ChannelProblem::p1_consensus() const {
  ConsensusProblem problem;
  problem.dim = dim();
  problem.num_agents = num_agents();
  problem.value = [this](int a, std::span<const double> x) {
    return p1_value(a, x);
  };
  problem.gradient = [this](int a, std::span<const double> x,
                            std::span<double> out) { p1_gradient(a, x, out); };
  problem.project = [this](std::span<double> x) { project(x); };
  problem.lipschitz.resize(num_agents());
  for (int a = 0; a < num_agents(); ++a)
    problem.lipschitz[a] = lipschitz(a, 0.0);
  return problem;
}

ConsensusProblem ChannelProblem::p2_consensus(
    std::span<const double> theta) const {
  ConsensusProblem problem;
  problem.dim = dim();
  problem.num_agents = num_agents();
  std::vector<double> ratios(theta.begin(), theta.end());
  problem.value = [this, ratios](int a, std::span<const double> x) {
    return p2_value(a, x, ratios[a]);
  };
  problem.gradient = [this, ratios](int a, std::span<const double> x,
                                    std::span<double> out) {
    p2_gradient(a, x, ratios[a], out);
  };
  problem.project = [this](std::span<double> x) { project(x); };
  problem.lipschitz.resize(num_agents());
  for (int a = 0; a < num_agents(); ++a)
    problem.lipschitz[a] = lipschitz(a, ratios[a]);
  return problem;
}

ConsensusProblem ChannelProblem::f2_consensus() const {
  ConsensusProblem problem;
  problem.dim = dim();
  problem.num_agents = num_agents();
  problem.value = [this](int a, std::span<const double> x) {
    return f2_value(a, x);
  };
  problem.gradient = [this](int a, std::span<const double> x,
                            std::span<double> out) { f2_gradient(a, x, out); };
  problem.project = [this](std::span<double> x) { project(x); };
  problem.lipschitz.resize(num_agents());
  for (int a = 0; a < num_agents(); ++a)
    problem.lipschitz[a] = lipschitz(a, 0.0);
  return problem;
}

namespace {

std::vector<double> group_vector(const DecisionLayout& group,
                                 std::span<const double> x,
                                 const SystemInstance& inst) {
  const DecisionLayout all = all_users_layout(inst);
  std::vector<double> out(group.dim());
  for (std::size_t u = 0; u < group.users.size(); ++u) {
    const int n = group.users[u];
    for (int c = 0; c < group.num_channels; ++c)
      out[group.eta_index(static_cast<int>(u), c)] =
          x[all.eta_index(n, c)];
    out[group.t_hat_index(static_cast<int>(u))] = x[all.t_hat_index(n)];
  }
  return out;
}

}  // namespace

FractionalParts fractional_parts(int n, std::span<const double> x,
                                 const SystemInstance& inst) {
  const FeasibleSetSpec spec = capacity_bounds(inst);
  const ChannelProblem cp(inst, spec,
                          inst.users_of_server(inst.user_server[n]));
  const std::vector<double> xs = group_vector(cp.layout(), x, inst);
  int agent = -1;
  for (std::size_t u = 0; u < cp.layout().users.size(); ++u)
    if (cp.layout().users[u] == n) agent = static_cast<int>(u);
  FractionalParts parts;
  parts.upper = cp.f_upper(agent, xs);
  parts.lower = cp.f_lower(agent, xs);
  return parts;
}

double lipschitz_bound(int n, double theta, const SystemInstance& inst) {
  const FeasibleSetSpec spec = capacity_bounds(inst);
  const ChannelProblem cp(inst, spec,
                          inst.users_of_server(inst.user_server[n]));
  int agent = -1;
  for (std::size_t u = 0; u < cp.layout().users.size(); ++u)
    if (cp.layout().users[u] == n) agent = static_cast<int>(u);
  return cp.lipschitz(agent, theta);
}

}  // namespace popec
