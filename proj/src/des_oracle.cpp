#include "popec/des_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <sstream>

#include "popec/math_util.hpp"

namespace popec {

namespace {

constexpr double kZ995 = 2.5758293035489004;  // Phi^-1(0.995)

struct Welford {
  long long count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++count;
    const double d = v - mean;
    mean += d / count;
    m2 += d * (v - mean);
  }
  SampleStats stats() const {
    SampleStats s;
    s.count = count;
    s.mean = count > 0 ? mean : 0.0;
    if (count > 1)
      s.half_width99 = kZ995 * std::sqrt(m2 / (count - 1) / count);
    else
      s.half_width99 = kInfiniteTime;
    return s;
  }
};

struct Task {
  int user = 0;
  int cls = 1;
  double generated_at = 0.0;
  int channel = -1;
  bool delivered = false;
  int server = -1;
  double transfer_delay = 0.0;
  double server_arrival = 0.0;
  double service_start = 0.0;
  double service_end = 0.0;
  double transmission = 0.0;
  double peak_age = -1.0;
  bool counted = false;
};

enum class EventKind { kArrival, kChannelDone, kServerArrival, kServerDone };

struct Event {
  double time = 0.0;
  long long seq = 0;
  EventKind kind = EventKind::kArrival;
  int index = 0;       // user or channel or server
  long long task = -1;

  bool operator>(const Event& other) const {
    if (time != other.time) return time > other.time;
    return seq > other.seq;
  }
};

}  // namespace

EmpiricalReport simulate(const SystemInstance& inst, const OffloadPolicy& pol,
                         const CollaborationPolicy& collab,
                         long long horizon_arrivals, std::uint64_t seed,
                         const SimOptions& opts) {
  const int N = inst.num_users;
  const int C = inst.num_channels;
  const int M = inst.num_servers;
  const int num_classes = opts.force_single_class ? 1 : inst.num_classes;

  Rng rng(seed);
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events;
  long long seq = 0;

  std::vector<Task> tasks;
  tasks.reserve(static_cast<std::size_t>(horizon_arrivals));

  std::vector<std::deque<long long>> channel_queue(C);
  std::vector<char> channel_busy(C, 0);
  std::vector<std::vector<std::deque<long long>>> server_queue(
      M, std::vector<std::deque<long long>>(num_classes));
  std::vector<char> server_busy(M, 0);
  std::vector<long long> server_current(M, -1);

  std::vector<double> channel_service_rate(C);
  for (int c = 0; c < C; ++c)
    channel_service_rate[c] = shannon_rate(c, inst) / inst.packet_size;

  std::vector<double> last_delivered_gen(N, -1.0);
  std::vector<double> last_received_gen(N, -1.0);

  std::vector<Welford> w_trans(N), w_inter(N), w_wait(N), w_serv(N), w_peak(N);

  const long long warmup = static_cast<long long>(
      opts.warmup_fraction * static_cast<double>(horizon_arrivals));
  long long generated = 0;
  std::size_t longest_server_queue = 0;

  auto draw_service = [&](int user, int server) {
    // Two-point law matching the first two moments: an atom at zero and one
    // at second/mean (degenerate when nu = 1/mu^2).
    const double mean = 1.0 / inst.mu(user, server);
    const double second = inst.nu(user, server);
    const double q = (mean * mean) / second;
    if (q >= 1.0 - 1e-12) return mean;
    return rng.bernoulli(q) ? second / mean : 0.0;
  };

  auto start_channel = [&](int c, double now) {
    if (channel_busy[c] || channel_queue[c].empty()) return;
    channel_busy[c] = 1;
    const double duration = rng.exponential(channel_service_rate[c]);
    events.push({now + duration, ++seq, EventKind::kChannelDone, c,
                 channel_queue[c].front()});
  };

  auto start_server = [&](int m, double now) {
    if (server_busy[m]) return;
    for (int d = 0; d < num_classes; ++d) {
      if (server_queue[m][d].empty()) continue;
      const long long id = server_queue[m][d].front();
      server_queue[m][d].pop_front();
      Task& task = tasks[id];
      server_busy[m] = 1;
      server_current[m] = id;
      task.service_start = now;
      if (task.counted) w_wait[task.user].add(now - task.server_arrival);
      const double duration = draw_service(task.user, m);
      if (task.counted) w_serv[task.user].add(duration + task.transfer_delay);
      events.push({now + duration, ++seq, EventKind::kServerDone, m, id});
      return;
    }
  };

  for (int n = 0; n < N; ++n)
    events.push(
        {rng.exponential(inst.arrival_rate[n]), ++seq, EventKind::kArrival, n});

  std::vector<double> eta_row(C);
  std::vector<double> collab_row(M);

  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();
    const double now = ev.time;

    switch (ev.kind) {
      case EventKind::kArrival: {
        const int n = ev.index;
        if (generated >= horizon_arrivals) break;
        ++generated;
        if (generated < horizon_arrivals)
          events.push({now + rng.exponential(inst.arrival_rate[n]), ++seq,
                       EventKind::kArrival, n});

        Task task;
        task.user = n;
        task.cls = opts.force_single_class ? 1 : inst.user_class[n];
        task.generated_at = now;
        task.counted = static_cast<long long>(tasks.size()) >= warmup;

        for (int c = 0; c < C; ++c) eta_row[c] = pol.at(n, c);
        const std::size_t pick = rng.pick_or_none(eta_row);
        if (pick < static_cast<std::size_t>(C)) {
          task.channel = static_cast<int>(pick);
          task.delivered = rng.bernoulli(inst.p(n, task.channel));
          if (task.delivered) {
            if (task.counted && last_delivered_gen[n] >= 0.0)
              w_inter[n].add(now - last_delivered_gen[n]);
            last_delivered_gen[n] = now;
          }
        }
        const long long id = static_cast<long long>(tasks.size());
        tasks.push_back(task);
        if (task.channel >= 0) {
          channel_queue[task.channel].push_back(id);
          start_channel(task.channel, now);
        }
        break;
      }

      case EventKind::kChannelDone: {
        const int c = ev.index;
        channel_queue[c].pop_front();
        channel_busy[c] = 0;
        start_channel(c, now);

        Task& task = tasks[ev.task];
        const double hop = inst.hop(task.user, c);
        task.transmission = (now - task.generated_at) + hop;
        if (!task.delivered) break;  // lost in the air
        if (task.counted) w_trans[task.user].add(task.transmission);

        const int home = inst.user_server[task.user];
        int target = home;
        if (!collab.y.empty() && collab.y[home] == 1) {
          for (int m = 0; m < M; ++m) collab_row[m] = collab.at(home, m);
          const std::size_t pick = rng.pick_or_none(collab_row);
          if (pick < static_cast<std::size_t>(M))
            target = static_cast<int>(pick);
        }
        task.server = target;
        task.transfer_delay = inst.server_delay(home, target);
        task.server_arrival = now + hop + task.transfer_delay;
        events.push(
            {task.server_arrival, ++seq, EventKind::kServerArrival, target,
             ev.task});
        break;
      }

      case EventKind::kServerArrival: {
        const int m = ev.index;
        Task& task = tasks[ev.task];
        server_queue[m][task.cls - 1].push_back(ev.task);
        longest_server_queue =
            std::max(longest_server_queue, server_queue[m][task.cls - 1].size());
        start_server(m, now);
        break;
      }

      case EventKind::kServerDone: {
        const int m = ev.index;
        Task& task = tasks[ev.task];
        task.service_end = now;
        server_busy[m] = 0;
        server_current[m] = -1;
        if (task.generated_at > last_received_gen[task.user]) {
          if (last_received_gen[task.user] >= 0.0) {
            task.peak_age = now - last_received_gen[task.user];
            if (task.counted) w_peak[task.user].add(task.peak_age);
          }
          last_received_gen[task.user] = task.generated_at;
        }
        start_server(m, now);
        break;
      }
    }
  }

  EmpiricalReport report;
  report.horizon = horizon_arrivals;
  report.seed = seed;
  report.truncated =
      longest_server_queue >
      std::max<std::size_t>(1000, static_cast<std::size_t>(horizon_arrivals) /
                                      100);
  for (int n = 0; n < N; ++n) {
    report.transmission.push_back(w_trans[n].stats());
    report.interarrival.push_back(w_inter[n].stats());
    report.waiting.push_back(w_wait[n].stats());
    report.service.push_back(w_serv[n].stats());
    report.peak_age.push_back(w_peak[n].stats());
  }

  if (opts.trace != nullptr) {
    opts.trace->clear();
    opts.trace->reserve(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const Task& t = tasks[i];
      TaskRecord rec;
      rec.id = static_cast<long long>(i);
      rec.user = t.user;
      rec.priority_class = t.cls;
      rec.generated_at = t.generated_at;
      rec.channel = t.channel;
      rec.delivered = t.delivered;
      rec.server = t.server;
      rec.service_start = t.service_start;
      rec.service_end = t.service_end;
      rec.peak_age = t.peak_age;
      opts.trace->push_back(rec);
    }
  }
  return report;
}

PaoiEstimate empirical_paoi(const EmpiricalReport& report) {
  PaoiEstimate estimate;
  estimate.per_user = report.peak_age;
  double sum = 0.0;
  for (const auto& s : report.peak_age) {
    if (s.count > 0) {
      sum += s.mean;
      ++estimate.users_with_samples;
    }
  }
  estimate.aggregate_mean =
      estimate.users_with_samples > 0 ? sum / estimate.users_with_samples
                                      : 0.0;
  return estimate;
}

std::string task_trace_to_csv(const std::vector<TaskRecord>& trace) {
  std::ostringstream os;
  os << "id,user,class,generated_at,channel,delivered,server,service_start,"
        "service_end,peak_age\n";
  os.precision(12);
  for (const auto& t : trace)
    os << t.id << ',' << t.user << ',' << t.priority_class << ','
       << t.generated_at << ',' << t.channel << ',' << (t.delivered ? 1 : 0)
       << ',' << t.server << ',' << t.service_start << ',' << t.service_end
       << ',' << t.peak_age << '\n';
  return os.str();
}

}  // namespace popec
