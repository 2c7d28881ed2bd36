#include "popec/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "popec/math_util.hpp"
#include "popec/system_model.hpp"

namespace popec {

SolverState make_state(const ConsensusProblem& problem,
                       std::span<const double> x0,
                       std::span<const double> rho) {
  SolverState state;
  state.x_consensus.assign(x0.begin(), x0.end());
  state.x_local.assign(problem.num_agents,
                       std::vector<double>(x0.begin(), x0.end()));
  state.dual.assign(problem.num_agents, std::vector<double>(problem.dim, 0.0));
  state.rho.assign(rho.begin(), rho.end());
  state.lipschitz = problem.lipschitz;
  state.theta.assign(problem.num_agents, 0.0);
  return state;
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream os;
  os << "iteration,objective,gap,primal_residual,dual_residual\n";
  os.precision(12);
  for (const auto& row : trace)
    os << row.iteration << ',' << row.objective << ',' << row.gap << ','
       << row.primal_residual << ',' << row.dual_residual << '\n';
  return os.str();
}

void proximal_step(const ConsensusProblem& problem, int agent,
                   std::span<const double> anchor,
                   std::span<const double> dual, double rho,
                   std::span<double> x, double tol, int cap) {
  const int dim = problem.dim;
  std::vector<double> y(x.begin(), x.end());
  std::vector<double> x_prev(x.begin(), x.end());
  std::vector<double> grad(dim), candidate(dim);

  auto objective = [&](std::span<const double> v) {
    double quad = 0.0, lin = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double d = v[i] - anchor[i];
      quad += d * d;
      lin += dual[i] * d;
    }
    return problem.value(agent, v) + lin + 0.5 * rho * quad;
  };
  auto gradient = [&](std::span<const double> v, std::span<double> out) {
    problem.gradient(agent, v, out);
    for (int i = 0; i < dim; ++i)
      out[i] += dual[i] + rho * (v[i] - anchor[i]);
  };

  // Backtracked step; never grown again, so the descent condition usually
  // holds on the first probe and each iteration costs one projection.
  double step = 1.0 / (std::max(problem.lipschitz[agent], 1e-12) + rho);
  double momentum = 1.0;

  for (int it = 0; it < cap; ++it) {
    gradient(y, grad);
    const double fy = objective(y);

    double fc = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      for (int i = 0; i < dim; ++i) candidate[i] = y[i] - step * grad[i];
      problem.project(candidate);
      fc = objective(candidate);
      double inner = 0.0, dist2 = 0.0;
      for (int i = 0; i < dim; ++i) {
        const double d = candidate[i] - y[i];
        inner += grad[i] * d;
        dist2 += d * d;
      }
      if (fc <= fy + inner + 0.5 / step * dist2 + 1e-12 * (1.0 + std::abs(fy))) break;
      step *= 0.5;
    }

    double move2 = 0.0, scale2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double d = candidate[i] - x_prev[i];
      move2 += d * d;
      scale2 += candidate[i] * candidate[i];
    }

    const double next_momentum =
        0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    double restart = 0.0;
    for (int i = 0; i < dim; ++i)
      restart += (y[i] - candidate[i]) * (candidate[i] - x_prev[i]);
    const double beta = restart > 0.0 ? 0.0 : (momentum - 1.0) / next_momentum;
    for (int i = 0; i < dim; ++i)
      y[i] = candidate[i] + beta * (candidate[i] - x_prev[i]);
    momentum = restart > 0.0 ? 1.0 : next_momentum;

    std::copy(candidate.begin(), candidate.end(), x_prev.begin());
    if (move2 <= tol * tol * (1.0 + scale2)) break;
  }

  // Momentum can stall the displacement test early; certify with plain
  // projected-gradient steps whose displacement bounds the distance to the
  // prox solution through the strong convexity of the penalty.
  step = 1.0 / (std::max(problem.lipschitz[agent], 1e-12) + rho);
  for (int it = 0; it < 300; ++it) {
    gradient(x_prev, grad);
    const double fy = objective(x_prev);
    double fc = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      for (int i = 0; i < dim; ++i) candidate[i] = x_prev[i] - step * grad[i];
      problem.project(candidate);
      fc = objective(candidate);
      double inner = 0.0, dist2 = 0.0;
      for (int i = 0; i < dim; ++i) {
        const double d = candidate[i] - x_prev[i];
        inner += grad[i] * d;
        dist2 += d * d;
      }
      if (fc <= fy + inner + 0.5 / step * dist2 + 1e-12 * (1.0 + std::abs(fy))) break;
      step *= 0.5;
    }
    double move2 = 0.0, scale2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double d = candidate[i] - x_prev[i];
      move2 += d * d;
      scale2 += candidate[i] * candidate[i];
    }
    std::copy(candidate.begin(), candidate.end(), x_prev.begin());
    if (move2 <= tol * tol * (1.0 + scale2)) break;
  }
  std::copy(x_prev.begin(), x_prev.end(), x.begin());
}

double augmented_lagrangian(const ConsensusProblem& problem,
                            const SolverState& state) {
  double total = 0.0;
  for (int a = 0; a < problem.num_agents; ++a) {
    total += problem.value(a, state.x_local[a]);
    for (int i = 0; i < problem.dim; ++i) {
      const double d = state.x_local[a][i] - state.x_consensus[i];
      total += state.dual[a][i] * d + 0.5 * state.rho[a] * d * d;
    }
  }
  return total;
}

double gap(const ConsensusProblem& problem, const SolverState& state) {
  const int dim = problem.dim;
  std::vector<double> grad_o(dim, 0.0), grad(dim), shifted(dim);

  double consensus2 = 0.0, local2 = 0.0;
  for (int a = 0; a < problem.num_agents; ++a) {
    problem.gradient(a, state.x_local[a], grad);
    for (int i = 0; i < dim; ++i) {
      const double d = state.x_local[a][i] - state.x_consensus[i];
      consensus2 += d * d;
      grad_o[i] -= state.dual[a][i] + state.rho[a] * d;
      grad[i] += state.dual[a][i] + state.rho[a] * d;
      shifted[i] = state.x_local[a][i] - grad[i];
    }
    // Projected-gradient residual of the local block.
    problem.project(shifted);
    for (int i = 0; i < dim; ++i) {
      const double r = state.x_local[a][i] - shifted[i];
      local2 += r * r;
    }
  }
  // Consensus-block residual, also through the gradient mapping so that
  // constrained stationary points register as zero.
  for (int i = 0; i < dim; ++i) shifted[i] = state.x_consensus[i] - grad_o[i];
  problem.project(shifted);
  double grad_o2 = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double r = state.x_consensus[i] - shifted[i];
    grad_o2 += r * r;
  }
  return grad_o2 + local2 + consensus2;
}

namespace {

double objective_sum(const ConsensusProblem& problem, const SolverState& s) {
  double total = 0.0;
  for (int a = 0; a < problem.num_agents; ++a)
    total += problem.value(a, s.x_local[a]);
  return total;
}

}  // namespace

ConsensusResult ac_solve(const ConsensusProblem& problem, double rho,
                         const SolverOptions& opts,
                         std::span<const double> x0) {
  std::vector<double> start(problem.dim, 0.0);
  if (!x0.empty()) start.assign(x0.begin(), x0.end());
  problem.project(start);

  std::vector<double> rhos(problem.num_agents, rho);
  SolverState state = make_state(problem, start, rhos);
  state.eps_primal = opts.eps_primal;
  state.eps_dual = opts.eps_dual;

  const int dim = problem.dim;
  std::vector<double> prev_consensus(dim);

  for (int t = 0; t < opts.max_iterations; ++t) {
    for (int a = 0; a < problem.num_agents; ++a)
      proximal_step(problem, a, state.x_consensus, state.dual[a], rho,
                    state.x_local[a], opts.inner_tol, opts.inner_cap);

    std::copy(state.x_consensus.begin(), state.x_consensus.end(),
              prev_consensus.begin());
    for (int i = 0; i < dim; ++i) {
      double avg = 0.0;
      for (int a = 0; a < problem.num_agents; ++a)
        avg += state.x_local[a][i] + state.dual[a][i] / rho;
      state.x_consensus[i] = avg / problem.num_agents;
    }

    double primal = 0.0;
    for (int a = 0; a < problem.num_agents; ++a) {
      for (int i = 0; i < dim; ++i) {
        const double d = state.x_local[a][i] - state.x_consensus[i];
        state.dual[a][i] += rho * d;
        primal += d * d;
      }
    }
    const double dual_res =
        rho * squared_distance(state.x_consensus, prev_consensus);
    state.iterations = t + 1;

    if (opts.trace != nullptr)
      opts.trace->push_back(
          {t + 1, objective_sum(problem, state), 0.0, primal, dual_res});

    if (primal <= opts.eps_primal && dual_res <= opts.eps_dual) {
      ConsensusResult result;
      result.x_consensus = state.x_consensus;
      result.iterations = state.iterations;
      result.primal_residual = primal;
      result.dual_residual = dual_res;
      std::vector<double> probe = state.x_consensus;
      problem.project(probe);
      result.x_consensus = probe;
      result.objective = 0.0;
      for (int a = 0; a < problem.num_agents; ++a)
        result.objective += problem.value(a, probe);
      result.state = std::move(state);
      return result;
    }
  }
  throw ConvergenceError("ac_solve: iteration cap exceeded");
}

ConsensusResult nac_solve(const ConsensusProblem& problem, SolverState state,
                          const SolverOptions& opts) {
  for (int a = 0; a < problem.num_agents; ++a)
    if (!(state.rho[a] > 2.0 * problem.lipschitz[a]))
      throw ConfigError("nac_solve: rho must exceed twice the Lipschitz bound");

  const int dim = problem.dim;
  const double rho_sum =
      std::accumulate(state.rho.begin(), state.rho.end(), 0.0);

  for (int t = 0; t < opts.max_iterations; ++t) {
    const double g = gap(problem, state);
    if (opts.trace != nullptr) {
      double primal = 0.0;
      for (int a = 0; a < problem.num_agents; ++a)
        primal += squared_distance(state.x_local[a], state.x_consensus);
      opts.trace->push_back(
          {t, objective_sum(problem, state), g, primal, 0.0});
    }
    if (opts.lagrangian_trace != nullptr)
      opts.lagrangian_trace->push_back(augmented_lagrangian(problem, state));
    if (g < opts.eps_ac) {
      ConsensusResult result;
      result.x_consensus = state.x_consensus;
      problem.project(result.x_consensus);
      result.iterations = state.iterations;
      result.gap = g;
      result.objective = 0.0;
      for (int a = 0; a < problem.num_agents; ++a)
        result.objective += problem.value(a, result.x_consensus);
      result.state = std::move(state);
      return result;
    }

    for (int a = 0; a < problem.num_agents; ++a)
      proximal_step(problem, a, state.x_consensus, state.dual[a], state.rho[a],
                    state.x_local[a], opts.inner_tol, opts.inner_cap);

    for (int i = 0; i < dim; ++i) {
      double avg = 0.0;
      for (int a = 0; a < problem.num_agents; ++a)
        avg += state.rho[a] * state.x_local[a][i] + state.dual[a][i];
      state.x_consensus[i] = avg / rho_sum;
    }

    for (int a = 0; a < problem.num_agents; ++a)
      for (int i = 0; i < dim; ++i)
        state.dual[a][i] +=
            state.rho[a] * (state.x_local[a][i] - state.x_consensus[i]);
    state.iterations = t + 1;
  }
  throw ConvergenceError("nac_solve: iteration cap exceeded");
}

}  // namespace popec
