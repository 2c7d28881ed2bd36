#include "popec/collaboration.hpp"

#include <algorithm>
#include <cmath>

#include "popec/feasibility.hpp"
#include "popec/math_util.hpp"

namespace popec {

namespace {

double affine_eval(double constant, const std::vector<int>& index,
                   const std::vector<double>& weight,
                   std::span<const double> z) {
  double v = constant;
  for (std::size_t i = 0; i < index.size(); ++i) v += weight[i] * z[index[i]];
  return v;
}

}  // namespace

CollabProblem::CollabProblem(const SystemInstance& inst,
                             const LambdaTable& lambda_s)
    : inst_(&inst), M_(inst.num_servers) {
  total_outflow_.assign(M_, 0.0);
  for (int d = 0; d < inst.num_classes; ++d)
    for (int m = 0; m < M_; ++m) total_outflow_[m] += lambda_s[d * M_ + m];

  for (int n = 0; n < inst.num_users; ++n) {
    const int home = inst.user_server[n];
    if (total_outflow_[home] <= 0.0) continue;
    for (int m = 0; m < M_; ++m) {
      AgentTerms t;
      t.home = home;
      t.target = m;
      t.transfer_service = inst.server_delay(home, m) + 1.0 / inst.mu(n, m);
      t.outflow = total_outflow_[home];
      t.util_upto.assign(M_, 0.0);
      t.util_above.assign(M_, 0.0);
      t.moment.assign(M_, 0.0);
      const int cls = inst.user_class[n];
      for (int src = 0; src < M_; ++src) {
        double upto = 0.0, above = 0.0, all = 0.0;
        for (int d = 0; d < inst.num_classes; ++d) {
          const double v = lambda_s[d * M_ + src];
          all += v;
          if (d + 1 <= cls) upto += v;
          if (d + 1 <= cls - 1) above += v;
        }
        t.util_upto[src] = upto / inst.mu(n, m);
        t.util_above[src] = above / inst.mu(n, m);
        t.moment[src] = 0.5 * inst.nu(n, m) * all;
      }
      agents_.push_back({n, m});
      terms_.push_back(std::move(t));
    }
  }

  // Feasible set: rows sum to one, inbound capacity per server, and the
  // stability half-spaces keeping every agent's utilization factors below 1.
  for (int m = 0; m < M_; ++m) {
    LinearSet row;
    for (int m2 = 0; m2 < M_; ++m2) {
      row.index.push_back(m * M_ + m2);
      row.weight.push_back(1.0);
    }
    row.rhs = 1.0;
    row.norm2 = M_;
    row.equality = true;
    sets_.push_back(std::move(row));
  }
  for (int m = 0; m < M_; ++m) {
    LinearSet cap;
    for (int src = 0; src < M_; ++src) {
      if (total_outflow_[src] <= 0.0) continue;
      cap.index.push_back(src * M_ + m);
      cap.weight.push_back(total_outflow_[src]);
      cap.norm2 += total_outflow_[src] * total_outflow_[src];
    }
    if (cap.index.empty()) continue;
    cap.rhs = inst.server_capacity[m];
    sets_.push_back(std::move(cap));
  }
  for (const auto& t : terms_) {
    LinearSet stab;
    for (int src = 0; src < M_; ++src) {
      if (t.util_upto[src] == 0.0) continue;
      stab.index.push_back(src * M_ + t.target);
      stab.weight.push_back(t.util_upto[src]);
      stab.norm2 += t.util_upto[src] * t.util_upto[src];
    }
    if (stab.index.empty()) continue;
    stab.rhs = 1.0 - 1e-6;
    sets_.push_back(std::move(stab));
  }
}

double CollabProblem::pi_upper(int agent, std::span<const double> z) const {
  const AgentTerms& t = terms_[agent];
  const double s = t.outflow * z[t.home * M_ + t.target];
  double a = 1.0, b = 1.0, u = 0.0;
  for (int src = 0; src < M_; ++src) {
    const double v = z[src * M_ + t.target];
    a -= t.util_upto[src] * v;
    b -= t.util_above[src] * v;
    u += t.moment[src] * v;
  }
  return t.transfer_service * s * a * b + s * u;
}

double CollabProblem::pi_lower(int agent, std::span<const double> z) const {
  const AgentTerms& t = terms_[agent];
  double row = 0.0;
  for (int m2 = 0; m2 < M_; ++m2) row += z[t.home * M_ + m2];
  const double r = t.outflow * row;
  double a = 1.0, b = 1.0;
  for (int src = 0; src < M_; ++src) {
    const double v = z[src * M_ + t.target];
    a -= t.util_upto[src] * v;
    b -= t.util_above[src] * v;
  }
  return a * b * r;
}

double CollabProblem::value(int agent, std::span<const double> z,
                            double ratio) const {
  return pi_upper(agent, z) - ratio * pi_lower(agent, z);
}

void CollabProblem::gradient(int agent, std::span<const double> z,
                             double ratio, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const AgentTerms& t = terms_[agent];

  const double s = t.outflow * z[t.home * M_ + t.target];
  double row = 0.0;
  for (int m2 = 0; m2 < M_; ++m2) row += z[t.home * M_ + m2];
  const double r = t.outflow * row;
  double a = 1.0, b = 1.0, u = 0.0;
  for (int src = 0; src < M_; ++src) {
    const double v = z[src * M_ + t.target];
    a -= t.util_upto[src] * v;
    b -= t.util_above[src] * v;
    u += t.moment[src] * v;
  }

  // d/ds terms: s enters via one coordinate.
  out[t.home * M_ + t.target] +=
      t.outflow * (t.transfer_service * a * b + u);
  // d/dr terms.
  for (int m2 = 0; m2 < M_; ++m2)
    out[t.home * M_ + m2] -= ratio * t.outflow * a * b;
  // Column terms through A, B, U.
  for (int src = 0; src < M_; ++src) {
    const int idx = src * M_ + t.target;
    const double da = -t.util_upto[src];
    const double db = -t.util_above[src];
    out[idx] += t.transfer_service * s * (da * b + a * db);
    out[idx] += s * t.moment[src];
    out[idx] -= ratio * r * (da * b + a * db);
  }
}

double CollabProblem::lipschitz(int agent, double ratio) const {
  const AgentTerms& t = terms_[agent];
  const double gs = t.outflow;
  const double gr = t.outflow * std::sqrt(static_cast<double>(M_));
  double ga2 = 0.0, gb2 = 0.0, gu2 = 0.0;
  double sum_a = 0.0, sum_b = 0.0, sum_u = 0.0;
  for (int src = 0; src < M_; ++src) {
    ga2 += t.util_upto[src] * t.util_upto[src];
    gb2 += t.util_above[src] * t.util_above[src];
    gu2 += t.moment[src] * t.moment[src];
    sum_a += t.util_upto[src];
    sum_b += t.util_above[src];
    sum_u += t.moment[src];
  }
  const double ga = std::sqrt(ga2), gb = std::sqrt(gb2), gu = std::sqrt(gu2);
  const double s_max = t.outflow;
  const double r_max = M_ * t.outflow;
  const double a_max = std::max(1.0, std::abs(1.0 - sum_a));
  const double b_max = std::max(1.0, std::abs(1.0 - sum_b));
  (void)sum_u;

  double bound = t.transfer_service *
                 (2.0 * gs * ga * b_max + 2.0 * gs * gb * a_max +
                  2.0 * ga * gb * s_max);
  bound += 2.0 * gs * gu;
  bound += std::abs(ratio) * (2.0 * ga * gb * r_max + 2.0 * ga * gr * b_max +
                              2.0 * gb * gr * a_max);
  return std::max(bound, 1e-12);
}

void CollabProblem::project(std::span<double> z) const {
  const std::size_t dim = z.size();
  const std::size_t num_sets = 1 + sets_.size();
  std::vector<std::vector<double>> corrections(num_sets,
                                               std::vector<double>(dim, 0.0));
  std::vector<double> before(dim);

  auto contains = [&](double tol) {
    for (double v : z)
      if (v < -tol || v > 1.0 + tol) return false;
    for (const auto& s : sets_) {
      const double v = affine_eval(0.0, s.index, s.weight, z);
      if (s.equality ? std::abs(v - s.rhs) > tol : v > s.rhs + tol)
        return false;
    }
    return true;
  };

  std::vector<double> cycle_start(dim);
  for (int cycle = 0; cycle < 20000; ++cycle) {
    std::copy(z.begin(), z.end(), cycle_start.begin());
    std::size_t set_id = 0;
    double corr_drift2 = 0.0;
    auto apply = [&](auto&& project_set) {
      auto& corr = corrections[set_id++];
      for (std::size_t i = 0; i < dim; ++i) {
        z[i] += corr[i];
        before[i] = z[i];
      }
      project_set();
      for (std::size_t i = 0; i < dim; ++i) {
        const double updated = before[i] - z[i];
        const double d = updated - corr[i];
        corr_drift2 += d * d;
        corr[i] = updated;
      }
    };

    apply([&] {
      for (double& v : z) v = std::clamp(v, 0.0, 1.0);
    });
    for (const auto& s : sets_) {
      apply([&] {
        const double v = affine_eval(0.0, s.index, s.weight, z);
        const bool move = s.equality ? true : v > s.rhs;
        if (!move || s.norm2 == 0.0) return;
        const double step = (v - s.rhs) / s.norm2;
        for (std::size_t i = 0; i < s.index.size(); ++i)
          z[s.index[i]] -= step * s.weight[i];
      });
    }
    double moved2 = corr_drift2, scale2 = 1.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = z[i] - cycle_start[i];
      moved2 += d * d;
      scale2 += z[i] * z[i];
    }
    if (moved2 <= 1e-24 * scale2 && contains(1e-10)) return;
  }
  if (!contains(1e-8))
    throw ProjectionError(
        "CollabProblem::project: alternating projections did not converge");
}

std::vector<double> CollabProblem::initial_point() const {
  std::vector<double> z(dim(), 0.0);
  for (int m = 0; m < M_; ++m) z[m * M_ + m] = 1.0;
  project(z);
  return z;
}

ConsensusProblem CollabProblem::consensus(std::span<const double> ratios) const {
  ConsensusProblem problem;
  problem.dim = dim();
  problem.num_agents = num_agents();
  std::vector<double> r(ratios.begin(), ratios.end());
  problem.value = [this, r](int a, std::span<const double> z) {
    return value(a, z, r[a]);
  };
  problem.gradient = [this, r](int a, std::span<const double> z,
                               std::span<double> out) {
    gradient(a, z, r[a], out);
  };
  problem.project = [this](std::span<double> z) { project(z); };
  problem.lipschitz.resize(num_agents());
  for (int a = 0; a < num_agents(); ++a)
    problem.lipschitz[a] = lipschitz(a, r[a]);
  return problem;
}

FractionalFamily CollabProblem::fractional_family() const {
  FractionalFamily family;
  family.dim = dim();
  family.num_agents = num_agents();
  family.f_upper = [this](int a, std::span<const double> z) {
    return pi_upper(a, z);
  };
  family.f_lower = [this](int a, std::span<const double> z) {
    return pi_lower(a, z);
  };
  family.make_problem = [this](std::span<const double> ratios) {
    return consensus(ratios);
  };
  family.initial_point = [this]() { return initial_point(); };
  return family;
}

CollaborationPolicy solve_server_collaboration(const SystemInstance& inst,
                                               const LambdaTable& lambda_s,
                                               double tol, long long* rounds) {
  CollaborationPolicy collab = CollaborationPolicy::identity(inst);
  if (inst.num_servers == 1) return collab;

  double total_out = 0.0, total_cap = 0.0;
  for (double v : lambda_s) total_out += v;
  for (double v : inst.server_capacity) total_cap += v;
  if (total_out > total_cap)
    throw InfeasibleError(
        "solve_server_collaboration: aggregate load exceeds server capacity");

  const CollabProblem problem(inst, lambda_s);
  if (problem.num_agents() == 0) return collab;

  SolverOptions inner;
  inner.eps_ac = tol > 0.0 ? tol : 1e-4;
  inner.max_iterations = 20000;
  DinkelbachOptions opts;
  opts.eps_ck = tol > 0.0 ? tol : 1e-5;
  DinkelbachResult result;
  try {
    result = dinkelbach_solve(problem.fractional_family(), {}, opts.eps_ck,
                              nac_inner_solver(inner), opts);
  } catch (const ProjectionError&) {
    throw InfeasibleError(
        "solve_server_collaboration: no feasible migration matrix");
  }

  if (rounds != nullptr) *rounds += result.inner_rounds;
  problem.project(result.x);
  for (int m = 0; m < inst.num_servers; ++m)
    for (int m2 = 0; m2 < inst.num_servers; ++m2)
      collab.at(m, m2) = result.x[m * inst.num_servers + m2];
  return collab;
}

}  // namespace popec
