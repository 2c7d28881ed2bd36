#ifndef POPEC_DES_ORACLE_HPP_
#define POPEC_DES_ORACLE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "popec/policy.hpp"
#include "popec/system_model.hpp"

namespace popec {

// One task's lifecycle through the simulated system.
struct TaskRecord {
  long long id = 0;
  int user = 0;
  int priority_class = 0;
  double generated_at = 0.0;
  int channel = -1;  // -1: not offloaded
  bool delivered = false;
  int server = -1;
  double service_start = 0.0;
  double service_end = 0.0;
  double peak_age = -1.0;  // -1: no sample (lost or stale)
};

struct SampleStats {
  double mean = 0.0;
  double half_width99 = 0.0;  // normal-approximation 99% CI half width
  long long count = 0;
};

struct EmpiricalReport {
  std::vector<SampleStats> transmission;  // channel sojourn + hop delay
  std::vector<SampleStats> interarrival;  // gaps of delivered generations
  std::vector<SampleStats> waiting;       // server queue wait
  std::vector<SampleStats> service;       // service time (+ migration hop)
  std::vector<SampleStats> peak_age;
  long long horizon = 0;
  std::uint64_t seed = 0;
  bool truncated = false;
};

struct SimOptions {
  double warmup_fraction = 0.05;
  bool force_single_class = false;  // FCFS service order
  std::vector<TaskRecord>* trace = nullptr;
};

// Seeded discrete-event run: Poisson generation, exponential channel
// service, Bernoulli delivery, migration routing, non-preemptive priority
// service with the two-point law matching each (user, server)'s first two
// moments. Fully deterministic per seed.
EmpiricalReport simulate(const SystemInstance& inst, const OffloadPolicy& pol,
                         const CollaborationPolicy& collab,
                         long long horizon_arrivals, std::uint64_t seed,
                         const SimOptions& opts = {});

struct PaoiEstimate {
  std::vector<SampleStats> per_user;  // zero-count entries are flagged
  double aggregate_mean = 0.0;        // over users with samples
  int users_with_samples = 0;
};

PaoiEstimate empirical_paoi(const EmpiricalReport& report);

std::string task_trace_to_csv(const std::vector<TaskRecord>& trace);

}  // namespace popec

#endif  // POPEC_DES_ORACLE_HPP_
