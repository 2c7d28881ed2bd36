#include "popec/async_consensus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "popec/channel_problem.hpp"
#include "popec/fractional.hpp"
#include "popec/math_util.hpp"

namespace popec {

LossyLinkModel LossyLinkModel::best_channel(const SystemInstance& inst,
                                            std::uint64_t seed, double eps_a) {
  LossyLinkModel links;
  links.seed = seed;
  links.eps_a = eps_a;
  links.reliability.resize(inst.num_users);
  for (int n = 0; n < inst.num_users; ++n) {
    double best = 0.0;
    for (int c = 0; c < inst.num_channels; ++c)
      best = std::max(best, inst.p(n, c));
    links.reliability[n] = best;
  }
  return links;
}

LossyLinkModel LossyLinkModel::mean_channel(const SystemInstance& inst,
                                            std::uint64_t seed) {
  LossyLinkModel links;
  links.seed = seed;
  links.reliability.resize(inst.num_users);
  for (int n = 0; n < inst.num_users; ++n) {
    double mean = 0.0;
    for (int c = 0; c < inst.num_channels; ++c) mean += inst.p(n, c);
    links.reliability[n] = mean / inst.num_channels;
  }
  return links;
}

int gamma_bound(double p_max, double eps_a) {
  if (p_max <= 0.0)
    throw UnreachableUserError("gamma_bound: user has no working channel");
  if (p_max >= 1.0) return 1;
  const double bound = std::log(eps_a) / std::log(1.0 - p_max);
  return std::max(1, static_cast<int>(std::ceil(bound - 1e-12)));
}

ReliabilityProbs reliability_probs(const SystemInstance& inst) {
  ReliabilityProbs probs;
  probs.p_sysn = 1.0;
  double all_fail = 1.0;
  for (int n = 0; n < inst.num_users; ++n) {
    double mean = 0.0, best = 0.0;
    for (int c = 0; c < inst.num_channels; ++c) {
      mean += inst.p(n, c);
      best = std::max(best, inst.p(n, c));
    }
    probs.p_sysn *= mean / inst.num_channels;
    all_fail *= 1.0 - best;
  }
  probs.p_asysn = 1.0 - all_fail;
  return probs;
}

double anac_rho_threshold(double lipschitz, int gamma) {
  const double g = gamma;
  return std::max(7.0 * lipschitz,
                  lipschitz * (g * g + (3.0 / 7.0) * (g + 1.0) * (g + 1.0)));
}

std::string round_log_to_csv(const std::vector<RoundLogRow>& rows) {
  std::ostringstream os;
  os << "round,successful_users,gap,objective\n";
  os.precision(12);
  for (const auto& r : rows)
    os << r.round << ',' << r.successful_users << ',' << r.gap << ','
       << r.objective << '\n';
  return os.str();
}

namespace {

double objective_at(const ConsensusProblem& problem,
                    std::span<const double> x) {
  double total = 0.0;
  for (int a = 0; a < problem.num_agents; ++a) total += problem.value(a, x);
  return total;
}

}  // namespace

AsyncResult anac_solve(const ConsensusProblem& problem, SolverState state,
                       const LossyLinkModel& links, const AsyncOptions& opts) {
  const int dim = problem.dim;
  const int N = problem.num_agents;
  const double rho_sum =
      std::accumulate(state.rho.begin(), state.rho.end(), 0.0);

  std::vector<int> gamma(N);
  for (int a = 0; a < N; ++a)
    gamma[a] = gamma_bound(links.reliability[a], links.eps_a);

  // Stale gradient buffer, seeded at the initial consensus point.
  std::vector<std::vector<double>> grad_buffer(N, std::vector<double>(dim));
  for (int a = 0; a < N; ++a)
    problem.gradient(a, state.x_consensus, grad_buffer[a]);

  std::vector<int> silent_rounds(N, 0);
  Rng rng(links.seed);
  AsyncResult result;

  for (long long round = 0; round < opts.max_rounds; ++round) {
    // Server refreshes the consensus point (constrained argmin of the
    // augmented Lagrangian, an isotropic quadratic: projected average).
    for (int i = 0; i < dim; ++i) {
      double avg = 0.0;
      for (int a = 0; a < N; ++a)
        avg += state.rho[a] * state.x_local[a][i] + state.dual[a][i];
      state.x_consensus[i] = avg / rho_sum;
    }
    problem.project(state.x_consensus);

    const double g = gap(problem, state);
    if (opts.round_log != nullptr)
      opts.round_log->push_back(
          {round, 0, g, objective_at(problem, state.x_consensus)});
    if (g < opts.eps_ac) {
      result.x_consensus = state.x_consensus;
      result.gap = g;
      result.objective = objective_at(problem, state.x_consensus);
      result.state = std::move(state);
      return result;
    }

    // Broadcast / reply over the lossy links; a silence streak about to
    // reach the retry bound is forced through.
    int received_count = 0;
    std::vector<char> received(N, 0);
    for (int a = 0; a < N; ++a) {
      const bool down = rng.bernoulli(links.reliability[a]);
      const bool up = rng.bernoulli(links.reliability[a]);
      bool ok = down && up;
      if (!ok && silent_rounds[a] + 1 >= gamma[a]) ok = true;
      received[a] = ok ? 1 : 0;
      if (ok) {
        silent_rounds[a] = 0;
        ++received_count;
      } else {
        ++silent_rounds[a];
        result.max_staleness = std::max(result.max_staleness, silent_rounds[a]);
      }
    }

    for (int a = 0; a < N; ++a) {
      if (received[a])
        problem.gradient(a, state.x_consensus, grad_buffer[a]);
      for (int i = 0; i < dim; ++i) {
        state.x_local[a][i] =
            state.x_consensus[i] -
            (grad_buffer[a][i] + state.dual[a][i]) / state.rho[a];
        state.dual[a][i] +=
            state.rho[a] * (state.x_local[a][i] - state.x_consensus[i]);
      }
    }

    ++result.total_rounds;
    if (received_count > 0) ++result.successful_rounds;
    if (opts.round_log != nullptr)
      opts.round_log->back().successful_users = received_count;
    state.iterations = static_cast<int>(round + 1);
  }
  throw ConvergenceError("anac_solve: round cap exceeded");
}

AsyncResult nac_solve_under_loss(const ConsensusProblem& problem,
                                 SolverState state,
                                 const LossyLinkModel& links,
                                 const AsyncOptions& opts) {
  const int dim = problem.dim;
  const int N = problem.num_agents;
  const double rho_sum =
      std::accumulate(state.rho.begin(), state.rho.end(), 0.0);

  Rng rng(links.seed);
  AsyncResult result;
  double g = gap(problem, state);

  for (long long round = 0; round < opts.max_rounds; ++round) {
    if (opts.round_log != nullptr)
      opts.round_log->push_back(
          {round, 0, g, objective_at(problem, state.x_consensus)});
    if (g < opts.eps_ac) {
      result.x_consensus = state.x_consensus;
      problem.project(result.x_consensus);
      result.gap = g;
      result.objective = objective_at(problem, result.x_consensus);
      result.state = std::move(state);
      return result;
    }

    bool all_ok = true;
    for (int a = 0; a < N; ++a) {
      const bool down = rng.bernoulli(links.reliability[a]);
      const bool up = rng.bernoulli(links.reliability[a]);
      if (!(down && up)) all_ok = false;
    }
    ++result.total_rounds;
    if (!all_ok) continue;
    ++result.successful_rounds;
    if (opts.round_log != nullptr)
      opts.round_log->back().successful_users = N;

    for (int a = 0; a < N; ++a)
      proximal_step(problem, a, state.x_consensus, state.dual[a], state.rho[a],
                    state.x_local[a], 1e-9, 10000);
    for (int i = 0; i < dim; ++i) {
      double avg = 0.0;
      for (int a = 0; a < N; ++a)
        avg += state.rho[a] * state.x_local[a][i] + state.dual[a][i];
      state.x_consensus[i] = avg / rho_sum;
    }
    for (int a = 0; a < N; ++a)
      for (int i = 0; i < dim; ++i)
        state.dual[a][i] +=
            state.rho[a] * (state.x_local[a][i] - state.x_consensus[i]);
    state.iterations += 1;
    g = gap(problem, state);
  }
  throw ConvergenceError("nac_solve_under_loss: round cap exceeded");
}

PairedRounds paired_round_comparison(const SystemInstance& inst, double eps_ac,
                                     std::uint64_t seed,
                                     long long max_rounds) {
  const FeasibleSetSpec spec = capacity_bounds(inst);
  std::vector<int> users(inst.num_users);
  for (int n = 0; n < inst.num_users; ++n) users[n] = n;
  const ChannelProblem cp(inst, spec, users);

  const std::vector<double> x0 = cp.uniform_feasible();
  std::vector<double> theta(cp.num_agents());
  for (int a = 0; a < cp.num_agents(); ++a) {
    const double lower = cp.f_lower(a, x0);
    if (lower <= 0.0)
      throw StarvedPolicyError(
          "paired_round_comparison: uniform policy starves a user");
    theta[a] = cp.f_upper(a, x0) / lower;
  }
  const ConsensusProblem problem = cp.p2_consensus(theta);

  const LossyLinkModel async_links =
      LossyLinkModel::best_channel(inst, seed);
  const LossyLinkModel sync_links = LossyLinkModel::mean_channel(inst, seed);

  // Same penalties on both sides; only the protocol differs.
  std::vector<double> rho(problem.num_agents);
  for (int a = 0; a < problem.num_agents; ++a) {
    const int gamma = gamma_bound(async_links.reliability[a], async_links.eps_a);
    rho[a] = 1.05 * anac_rho_threshold(problem.lipschitz[a], gamma);
  }

  AsyncOptions opts;
  opts.eps_ac = eps_ac;
  opts.max_rounds = max_rounds;

  PairedRounds out;
  {
    SolverState state = make_state(problem, x0, rho);
    const AsyncResult r = anac_solve(problem, state, async_links, opts);
    out.anac_rounds = r.total_rounds;
    out.anac_gap = r.gap;
  }
  {
    SolverState state = make_state(problem, x0, rho);
    const AsyncResult r = nac_solve_under_loss(problem, state, sync_links, opts);
    out.nac_rounds = r.total_rounds;
    out.nac_gap = r.gap;
  }
  return out;
}

}  // namespace popec
