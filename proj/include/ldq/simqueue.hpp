#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "ldq/dist.hpp"
#include "ldq/model.hpp"
#include "ldq/rng.hpp"
#include "ldq/special.hpp"

namespace ldq {

enum class Discipline { fifo, lifo_pr, srpt_pr, srpt_np, prio_pr, prio_np };

inline constexpr Discipline kAllDisciplines[] = {Discipline::fifo,    Discipline::lifo_pr,
                                                 Discipline::srpt_pr, Discipline::srpt_np,
                                                 Discipline::prio_pr, Discipline::prio_np};

inline const char* discipline_name(Discipline d) {
  switch (d) {
    case Discipline::fifo: return "fifo";
    case Discipline::lifo_pr: return "lifo-pr";
    case Discipline::srpt_pr: return "srpt-pr";
    case Discipline::srpt_np: return "srpt-np";
    case Discipline::prio_pr: return "prio-pr";
    case Discipline::prio_np: return "prio-np";
  }
  return "?";
}

inline Discipline parse_discipline(const std::string& name) {
  for (auto d : kAllDisciplines) {
    if (name == discipline_name(d)) return d;
  }
  throw Error(Errc::invalid_argument, "unknown discipline '" + name + "'");
}

inline bool is_priority(Discipline d) {
  return d == Discipline::prio_pr || d == Discipline::prio_np;
}

struct CustomerRecord {
  std::int64_t index;
  double arrival;
  double service;
  int cls;  // 1 or 2 for two-class models, 0 otherwise
  double first_service;
  double departure;
  double workload_at_arrival;

  double sojourn() const { return departure - arrival; }
  double delay() const { return first_service - arrival; }
};

struct BusyPeriod {
  double start;
  double duration;
};

struct SimOutput {
  std::vector<CustomerRecord> records;   // after warmup
  std::vector<BusyPeriod> busy_periods;  // those starting at or after the first kept arrival
  std::int64_t served = 0;
  double simulated_time = 0.0;
  double max_workload_drift = 0.0;  // |state workload - Lindley value| over all arrivals
  double max_busy_drift = 0.0;      // |busy-period length - summed service| over all periods
};

/// Renewal input shared by every discipline: values are quantized to the
/// simulation clock so that event arithmetic is exact.
struct SimInput {
  std::vector<double> interarrival;  // A_k; the first arrival happens at A_1
  std::vector<double> service;
  std::vector<int> cls;
};

namespace sim {

/// Clock resolution 2^-30 time units; event times are integer ticks.
inline constexpr int kTickExponent = 30;

inline std::int64_t to_ticks(double x) {
  const double scaled = std::ldexp(x, kTickExponent);
  if (!(scaled < 0x1.0p62)) throw Error(Errc::overflow, "time value exceeds the clock range");
  return std::llround(scaled);
}

inline double from_ticks(std::int64_t t) { return std::ldexp(static_cast<double>(t), -kTickExponent); }

inline double quantize(double x) { return from_ticks(to_ticks(x)); }

}  // namespace sim

inline SimInput generate_input(const QueueModel& model, std::int64_t n, std::uint64_t seed) {
  detail::require(n >= 1, "number of customers must be positive");
  SimInput in;
  in.interarrival.reserve(n);
  in.service.reserve(n);
  in.cls.reserve(n);
  Rng arrivals(seed, 0);
  Rng services(seed, 1);
  const auto atom = split_endpoint_atom(model.service());
  const bool atom_classes = !model.split() && atom.q > 0.0 && atom.q < 1.0;
  for (std::int64_t i = 0; i < n; ++i) {
    in.interarrival.push_back(sim::quantize(sample(model.arrival(), arrivals)));
    if (const auto& sp = model.split()) {
      const int c = services.uniform() < sp->p ? 1 : 2;
      in.cls.push_back(c);
      in.service.push_back(sim::quantize(sample(c == 1 ? sp->class1 : sp->class2, services)));
    } else {
      const double b = sim::quantize(sample(model.service(), services));
      in.service.push_back(b);
      in.cls.push_back(atom_classes ? (b < atom.x_b ? 1 : 2) : 0);
    }
  }
  return in;
}

/// W_1 = 0, W_{k+1} = max(W_k + B_k - A_{k+1}, 0).
inline std::vector<double> lindley_workload(std::span<const double> interarrival,
                                            std::span<const double> service) {
  detail::require(interarrival.size() == service.size(), "sequences must have equal length");
  std::vector<double> w(service.size(), 0.0);
  for (std::size_t k = 1; k < w.size(); ++k) {
    w[k] = std::max(w[k - 1] + service[k - 1] - interarrival[k], 0.0);
  }
  return w;
}

namespace sim {

struct Job {
  std::int64_t key1;
  std::int64_t key2;
  std::int64_t idx;
  std::int64_t remaining;
};

struct JobAfter {
  bool operator()(const Job& x, const Job& y) const {
    return x.key1 != y.key1 ? x.key1 > y.key1 : x.key2 > y.key2;
  }
};

inline Job make_job(Discipline d, std::int64_t idx, std::int64_t service, std::int64_t remaining,
                    int cls) {
  switch (d) {
    case Discipline::fifo: return {0, idx, idx, remaining};
    case Discipline::lifo_pr: return {0, -idx, idx, remaining};
    case Discipline::srpt_pr: return {remaining, idx, idx, remaining};
    case Discipline::srpt_np: return {service, idx, idx, remaining};
    case Discipline::prio_pr:
    case Discipline::prio_np: return {cls, idx, idx, remaining};
  }
  return {0, idx, idx, remaining};
}

inline bool preempts(Discipline d, std::int64_t new_service, int new_cls,
                     std::int64_t current_remaining, int current_cls) {
  switch (d) {
    case Discipline::lifo_pr: return true;
    case Discipline::srpt_pr: return new_service < current_remaining;
    case Discipline::prio_pr: return new_cls < current_cls;
    default: return false;
  }
}

}  // namespace sim

/// Event-driven simulation of a prepared input. Completions are processed
/// before arrivals at equal times; preemption is preempt-resume.
inline SimOutput simulate(const SimInput& in, Discipline d, double warmup_fraction = 0.0) {
  detail::require(warmup_fraction >= 0.0 && warmup_fraction < 1.0,
                  "warmup fraction must lie in [0, 1)");
  const auto n = static_cast<std::int64_t>(in.service.size());
  detail::require(n >= 1, "input must contain at least one customer");
  if (is_priority(d)) {
    for (int c : in.cls) {
      if (c != 1 && c != 2) {
        throw Error(Errc::invalid_argument, "priority disciplines need a two-class model");
      }
    }
  }

  std::vector<std::int64_t> arrival(n), service(n), first(n, -1), departure(n, -1);
  std::int64_t clock = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    clock += sim::to_ticks(in.interarrival[i]);
    arrival[i] = clock;
    service[i] = sim::to_ticks(in.service[i]);
  }
  const auto lindley = lindley_workload(in.interarrival, in.service);

  SimOutput out;
  std::vector<double> workload(n);
  std::vector<BusyPeriod> periods;
  std::priority_queue<sim::Job, std::vector<sim::Job>, sim::JobAfter> waiting;

  bool busy = false;
  std::int64_t cur = -1, seg_start = 0, seg_rem = 0;
  std::int64_t now = 0, work = 0;  // unfinished work at time `now`
  std::int64_t period_start = 0, period_work = 0;

  auto start = [&](std::int64_t idx, std::int64_t remaining, std::int64_t t) {
    cur = idx;
    seg_start = t;
    seg_rem = remaining;
    if (first[idx] < 0) first[idx] = t;
  };

  std::int64_t next = 0;
  while (next < n || busy) {
    const bool complete_first = busy && (next >= n || seg_start + seg_rem <= arrival[next]);
    if (complete_first) {
      const std::int64_t t = seg_start + seg_rem;
      work -= t - now;
      now = t;
      departure[cur] = t;
      if (!waiting.empty()) {
        const auto job = waiting.top();
        waiting.pop();
        start(job.idx, job.remaining, t);
      } else {
        busy = false;
        const double duration = sim::from_ticks(t - period_start);
        const double accounted = sim::from_ticks(period_work);
        out.max_busy_drift = std::max(out.max_busy_drift, std::abs(duration - accounted));
        periods.push_back({sim::from_ticks(period_start), duration});
      }
      continue;
    }

    const std::int64_t i = next++;
    const std::int64_t t = arrival[i];
    if (busy) work -= t - now;
    now = t;
    workload[i] = sim::from_ticks(work);
    out.max_workload_drift = std::max(out.max_workload_drift, std::abs(workload[i] - lindley[i]));
    work += service[i];
    if (!busy) {
      busy = true;
      period_start = t;
      period_work = service[i];
      start(i, service[i], t);
      continue;
    }
    period_work += service[i];
    const std::int64_t remaining = seg_rem - (t - seg_start);
    if (sim::preempts(d, service[i], in.cls[i], remaining, in.cls[cur])) {
      waiting.push(sim::make_job(d, cur, service[cur], remaining, in.cls[cur]));
      start(i, service[i], t);
    } else {
      waiting.push(sim::make_job(d, i, service[i], service[i], in.cls[i]));
    }
  }

  const auto skip = static_cast<std::int64_t>(std::floor(warmup_fraction * n));
  out.records.reserve(n - skip);
  for (std::int64_t i = skip; i < n; ++i) {
    out.records.push_back({i, sim::from_ticks(arrival[i]), in.service[i], in.cls[i],
                           sim::from_ticks(first[i]), sim::from_ticks(departure[i]),
                           workload[i]});
  }
  const double first_kept = sim::from_ticks(arrival[skip]);
  for (const auto& p : periods) {
    if (p.start >= first_kept) out.busy_periods.push_back(p);
  }
  out.served = n;
  out.simulated_time = sim::from_ticks(now);
  return out;
}

inline SimOutput run(const QueueModel& model, Discipline d, std::int64_t n, std::uint64_t seed,
                     double warmup_fraction = 0.2) {
  model.require_stable();
  return simulate(generate_input(model, n, seed), d, warmup_fraction);
}

/// Busy periods rebuilt from the records alone: a period opens at every
/// arrival that finds zero work and lasts for the work brought in during it.
/// Records preceding the first such arrival are ignored.
inline std::vector<BusyPeriod> busy_periods(const SimOutput& out) {
  std::vector<BusyPeriod> periods;
  for (const auto& r : out.records) {
    if (r.workload_at_arrival == 0.0) periods.push_back({r.arrival, 0.0});
    if (!periods.empty()) periods.back().duration += r.service;
  }
  return periods;
}

// ---------------------------------------------------------------------------
// Empirical busy-period exponent.

enum class PsiEstimator { naive, tilted };

namespace sim {

/// Total work arriving in [0, t].
inline double work_arrived(const QueueModel& m, double t, Rng& arrivals, Rng& services) {
  double clock = sample(m.arrival(), arrivals);
  double x = 0.0;
  while (clock <= t) {
    x += sample(m.service(), services);
    clock += sample(m.arrival(), arrivals);
  }
  return x;
}

inline double naive_log_mean(const QueueModel& m, double s, double t, int reps,
                             std::uint64_t seed, std::uint64_t stream_offset) {
  std::vector<double> logs(reps);
  for (int r = 0; r < reps; ++r) {
    Rng arrivals(seed, stream_offset + 2 * static_cast<std::uint64_t>(r));
    Rng services(seed, stream_offset + 2 * static_cast<std::uint64_t>(r) + 1);
    logs[r] = s * work_arrived(m, t, arrivals, services);
  }
  return special::log_sum_exp(logs) - std::log(static_cast<double>(reps));
}

}  // namespace sim

/// (1/t) log E[e^{s X(t)}], X(t) the work arriving in [0, t].
///
/// The naive mode averages e^{sX(t)} directly. The tilted mode samples
/// arrivals tilted by -theta and services tilted by s up to the first arrival
/// after t, and reweights by the likelihood ratio; theta comes from a short
/// naive pilot run, so the estimate stays unbiased whatever its quality.
inline double empirical_psi(const QueueModel& m, double s, double t, int reps, std::uint64_t seed,
                            PsiEstimator mode = PsiEstimator::tilted) {
  detail::require(t > 0.0 && std::isfinite(t), "horizon must be positive");
  detail::require(reps >= 1, "replications must be positive");
  if (s == 0.0) return 0.0;
  double log_mean = 0.0;
  if (mode == PsiEstimator::naive) {
    log_mean = sim::naive_log_mean(m, s, t, reps, seed, 0);
  } else {
    const double pilot_t = std::min(t, 20.0 * mean(m.arrival()));
    const double theta =
        std::max(0.0, sim::naive_log_mean(m, s, pilot_t, reps, seed, 1ULL << 40) / pilot_t);
    const auto a_tilt = tilt(m.arrival(), -theta);
    const auto b_tilt = tilt(m.service(), s);
    const double step = log_mgf(m.service(), s) + log_mgf(m.arrival(), -theta);
    std::vector<double> logs(reps);
    for (int r = 0; r < reps; ++r) {
      Rng arrivals(seed, 2 * static_cast<std::uint64_t>(r));
      Rng services(seed, 2 * static_cast<std::uint64_t>(r) + 1);
      double clock = 0.0;
      double last_service = 0.0;
      std::int64_t count = 0;
      while (clock <= t) {
        clock += sample(a_tilt, arrivals);
        last_service = sample(b_tilt, services);
        ++count;
      }
      logs[r] = -s * last_service + theta * clock + static_cast<double>(count) * step;
    }
    log_mean = special::log_sum_exp(logs) - std::log(static_cast<double>(reps));
  }
  if (!std::isfinite(log_mean)) throw Error(Errc::overflow, "replication average overflowed");
  return log_mean / t;
}

// ---------------------------------------------------------------------------
// CSV export.

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline void write_customers_csv(std::ostream& os, const SimOutput& out) {
  os << "index,arrival,service,class,first_service,departure,workload_at_arrival\n";
  for (const auto& r : out.records) {
    os << r.index << ',' << format_double(r.arrival) << ',' << format_double(r.service) << ','
       << r.cls << ',' << format_double(r.first_service) << ',' << format_double(r.departure)
       << ',' << format_double(r.workload_at_arrival) << '\n';
  }
}

inline void write_busy_periods_csv(std::ostream& os, const SimOutput& out) {
  os << "start,duration\n";
  for (const auto& p : out.busy_periods) {
    os << format_double(p.start) << ',' << format_double(p.duration) << '\n';
  }
}

}  // namespace ldq
