#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ldq/dist.hpp"
#include "ldq/model.hpp"
#include "ldq/ratecalc.hpp"
#include "ldq/simqueue.hpp"
#include "ldq/tailest.hpp"

namespace ldq::acceptance {

/// Scale of the simulation-based checks. Quick mode trades accuracy for speed:
///
///   check                     full                       quick
///   FIFO customers            10^6, fit tol 10%           10^5, fit tol 35%
///   FIFO importance sampling  10^4 reps, tol 5%           10^3 reps, tol 15%
///   SRPT customers            2*10^6, fit tol 15%         10^5, fit tol 35%
///   SRPT fit window           >= 500 points               >= 100 points
///   sample-path identities    10^6 customers              10^5 customers
///   empirical Psi             t=500, 2000 reps, tol 5%    t=500, 500 reps, tol 10%
///
/// At 10^5 customers the fitted rates scatter with a relative sd of about 11%
/// across seeds, so the quick tolerances sit near three sd.
struct Options {
  bool quick = false;
  std::uint64_t seed = 20240607;
};

struct Result {
  int id;
  std::string name;
  bool pass;
  double seconds;
  double budget;
  std::string detail;
  std::optional<Errc> error;
};

struct Outcome {
  bool pass;
  std::string detail;
};

namespace detail {

using D = DistributionSpec;

inline std::string fmt(double x, int digits = 10) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

inline bool close(double x, double y, double tol) { return std::abs(x - y) <= tol; }

inline Outcome mm1_closed_forms(const Options&) {
  const QueueModel m(D::exponential(0.5), D::exponential(1.0));
  const double gw = gamma_w(m);
  const double gp = gamma_p(m);
  const double gp_exact = std::pow(1.0 - std::sqrt(0.5), 2);
  return {close(gw, 0.5, 1e-9) && close(gp, gp_exact, 1e-9),
          "gamma_w=" + fmt(gw, 12) + " gamma_p=" + fmt(gp, 12) + " (exact " + fmt(gp_exact, 12) +
              ")"};
}

inline Outcome priority_cross_checks(const Options&) {
  const QueueModel interior(D::exponential(1.0),
                            ClassSplit{0.5, D::exponential(4.0), D::exponential(4.0)});
  const auto r1 = gamma_w2(interior);
  const double exact = std::pow(2.0 - std::sqrt(0.5), 2);
  const bool ok1 = close(r1.rate, exact, 1e-7) && r1.regime == Regime::interior && r1.a == 0.0;

  const QueueModel boundary(D::exponential(1.0),
                            ClassSplit{0.5, D::uniform(0.0, 0.5), D::deterministic(1.0)});
  const auto r2 = gamma_w2(boundary);
  const auto closed = poisson_rates(1.0, boundary.service(), boundary.split());
  const bool ok2 = r2.regime == Regime::boundary && closed.guard_holds &&
                   close(r2.rate, *closed.gamma_w2, 1e-7) && r2.a > 0.0 && r2.a < 1.0;
  return {ok1 && ok2, "interior gamma_w2=" + fmt(r1.rate) + " (exact " + fmt(exact) +
                          "); boundary generic=" + fmt(r2.rate, 12) +
                          " closed=" + fmt(*closed.gamma_w2, 12) + " a=" + fmt(r2.a, 6)};
}

/// A service law from a few families, with mean `m`.
inline DistributionSpec random_service(Rng& rng, double m) {
  switch (rng.below(5)) {
    case 0: return D::exponential(1.0 / m);
    case 1: return D::uniform(0.0, 2.0 * m);
    case 2: return D::deterministic(m);
    case 3: {
      const int k = 2 + static_cast<int>(rng.below(4));
      return D::erlang(k, k / m);
    }
    default: {
      const double w = 0.2 + 0.6 * rng.uniform();
      // w * U(0, h) + (1 - w) * delta_h has mean h (w / 2 + 1 - w)
      const double h = m / (1.0 - 0.5 * w);
      return D::mixture({{w, D::uniform(0.0, h)}, {1.0 - w, D::deterministic(h)}});
    }
  }
}

inline Outcome ordering(const Options& opt) {
  Rng rng(opt.seed, 3);
  double worst = kInf;
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    const double lambda = 0.2 + 1.8 * rng.uniform();
    const double p = 0.1 + 0.8 * rng.uniform();
    const double rho = 0.1 + 0.85 * rng.uniform();
    const double share = 0.1 + 0.8 * rng.uniform();  // fraction of load from class 1
    const auto b1 = random_service(rng, rho * share / (lambda * p));
    const auto b2 = random_service(rng, rho * (1.0 - share) / (lambda * (1.0 - p)));
    const QueueModel m(D::exponential(lambda), ClassSplit{p, b1, b2});
    const double gp = gamma_p(m);
    const double gw2 = gamma_w2(m).rate;
    const double gw = gamma_w(m);
    const double margin = std::min(gw2 - gp, gw - gw2);
    worst = std::min(worst, margin);
    if (!(margin > 1e-9)) ++failures;
  }
  return {failures == 0,
          "100 models, violations=" + std::to_string(failures) + " smallest margin=" + fmt(worst, 4)};
}

inline Outcome q_sweep(const Options&) {
  // Atom at c = 1 below E[A] = 5/3. With a base law reaching down to 0 the
  // rate is not monotone in q (it overshoots gamma_w(1)); on [0.5, 1) it is.
  const auto a = D::exponential(0.6);
  const auto base = D::uniform(0.5, 1.0);
  const auto atom = D::deterministic(1.0);
  std::vector<double> gv;
  for (int i = 0; i <= 10; ++i) {
    const double q = i / 10.0;
    const auto b = i == 0 ? base : i == 10 ? atom : make_mixture({{1.0 - q, base}, {q, atom}});
    gv.push_back(gamma_v_srpt(a, b).rate);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < gv.size(); ++i) monotone = monotone && gv[i] >= gv[i - 1];
  const double gp0 = gamma_p(QueueModel(a, base));
  const double gw1 = gamma_w(QueueModel(a, atom));
  const bool ends = close(gv.front(), gp0, 1e-7) && close(gv.back(), gw1, 1e-7);
  std::string curve;
  for (double g : gv) curve += (curve.empty() ? "" : ",") + fmt(g, 5);
  return {monotone && ends, "gamma_v(q)=[" + curve + "] gamma_p(0)=" + fmt(gp0, 8) +
                                " gamma_w(1)=" + fmt(gw1, 8)};
}

inline Outcome fifo_simulation(const Options& opt) {
  const QueueModel m(D::exponential(0.5), D::exponential(1.0));
  const std::int64_t n = opt.quick ? 100000 : 1000000;
  const double fit_tol = opt.quick ? 0.35 : 0.10;
  const int reps = opt.quick ? 1000 : 10000;
  const double is_tol = opt.quick ? 0.15 : 0.05;
  const auto out = run(m, Discipline::fifo, n, opt.seed);
  std::vector<double> waits;
  waits.reserve(out.records.size());
  for (const auto& r : out.records) waits.push_back(r.delay());
  const auto cmp = compare_rates(0.5, fit_decay(std::move(waits)), fit_tol);
  const double exact = 0.5 * std::exp(-10.0);
  const auto is = is_workload_tail(m, 20.0, reps, opt.seed);
  const double is_err = std::abs(is.estimate - exact) / exact;
  return {cmp.pass && is_err <= is_tol,
          "waiting fit=" + fmt(cmp.fitted, 5) + " rel_err=" + fmt(cmp.rel_error, 3) +
              "; P(W>20) IS=" + fmt(is.estimate, 5) + " exact=" + fmt(exact, 5) +
              " rel_err=" + fmt(is_err, 3)};
}

inline Outcome srpt_simulation(const Options& opt) {
  const QueueModel m(D::exponential(1.0),
                     D::mixture({{0.5, D::uniform(0.0, 0.5)}, {0.5, D::deterministic(1.0)}}));
  const std::int64_t n = opt.quick ? 100000 : 2000000;
  const double tol = opt.quick ? 0.35 : 0.15;
  FitWindow window;
  if (opt.quick) window.min_points = 100;
  const auto report = analyze(m);
  const auto input = generate_input(m, n, opt.seed);

  auto sojourns = [&](Discipline d) {
    const auto out = simulate(input, d, 0.2);
    std::vector<double> v;
    v.reserve(out.records.size());
    for (const auto& r : out.records) v.push_back(r.sojourn());
    return v;
  };
  const auto pr = sojourns(Discipline::srpt_pr);
  const auto np = sojourns(Discipline::srpt_np);
  FitWindow batch_window = window;
  batch_window.min_points = opt.quick ? 20 : 100;
  const double se_pr = batch_means_std_error(pr, 10, batch_window);
  const double se_np = batch_means_std_error(np, 10, batch_window);
  const auto fit_pr = fit_decay(pr, window);
  const auto fit_np = fit_decay(np, window);
  const auto cmp = compare_rates(*report.gamma_v, fit_pr, tol);
  const bool inside = fit_pr.rate > report.gamma_p && fit_pr.rate < report.gamma_w;
  const double joint = 1.96 * std::hypot(se_pr, se_np);
  const bool agree = std::abs(fit_pr.rate - fit_np.rate) <= joint;
  return {cmp.pass && inside && agree,
          "gamma_v=" + fmt(*report.gamma_v, 6) + " fit_pr=" + fmt(fit_pr.rate, 5) + "+-" +
              fmt(se_pr, 2) + " fit_np=" + fmt(fit_np.rate, 5) + "+-" + fmt(se_np, 2) +
              " rel_err=" + fmt(cmp.rel_error, 3) + " in (" + fmt(report.gamma_p, 4) + ", " +
              fmt(report.gamma_w, 4) + ")=" + (inside ? "yes" : "no") +
              " |pr-np|=" + fmt(std::abs(fit_pr.rate - fit_np.rate), 2) + " <= " + fmt(joint, 2)};
}

inline Outcome sample_paths(const Options& opt) {
  const std::int64_t n = opt.quick ? 100000 : 1000000;
  const QueueModel det(D::exponential(0.5), D::deterministic(1.0));
  const auto det_in = generate_input(det, n, opt.seed);
  const auto fifo = simulate(det_in, Discipline::fifo);
  const auto srpt = simulate(det_in, Discipline::srpt_pr);
  std::int64_t departure_mismatch = 0;
  for (std::size_t i = 0; i < fifo.records.size(); ++i) {
    if (fifo.records[i].departure != srpt.records[i].departure) ++departure_mismatch;
  }

  const QueueModel two(D::exponential(1.0),
                       ClassSplit{0.5, D::uniform(0.0, 0.5), D::deterministic(1.0)});
  const auto in = generate_input(two, n, opt.seed + 1);
  std::vector<SimOutput> outs;
  for (auto d : kAllDisciplines) outs.push_back(simulate(in, d));
  const auto& ppr = outs[4];
  const auto& pnp = outs[5];
  std::int64_t first_mismatch = 0;
  for (std::size_t i = 0; i < ppr.records.size(); ++i) {
    if (ppr.records[i].cls == 2 && ppr.records[i].first_service != pnp.records[i].first_service) {
      ++first_mismatch;
    }
  }
  const auto lindley = lindley_workload(in.interarrival, in.service);
  std::int64_t workload_mismatch = 0;
  for (const auto& o : outs) {
    for (std::size_t i = 0; i < o.records.size(); ++i) {
      if (o.records[i].workload_at_arrival != lindley[i]) ++workload_mismatch;
    }
  }
  return {departure_mismatch == 0 && first_mismatch == 0 && workload_mismatch == 0,
          "srpt/fifo departure mismatches=" + std::to_string(departure_mismatch) +
              " prio class-2 first-service mismatches=" + std::to_string(first_mismatch) +
              " workload mismatches=" + std::to_string(workload_mismatch)};
}

/// P(B > y*) along the M/M/1 family with E[B] = 1 and arrival rate rho.
inline std::vector<std::pair<double, YStar>> ystar_curve(double lo, double hi, double step) {
  std::vector<std::pair<double, YStar>> rows;
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) {
    const double rho = lo + i * step;
    rows.emplace_back(rho, y_star(QueueModel(D::exponential(rho), D::exponential(1.0))));
  }
  return rows;
}

inline Outcome figure_one(const Options&) {
  const auto rows = ystar_curve(0.05, 0.95, 0.05);
  double peak = 0.0, peak_rho = 0.0;
  for (const auto& [rho, ys] : rows) {
    if (ys.tail > peak) {
      peak = ys.tail;
      peak_rho = rho;
    }
  }
  const double first = rows.front().second.tail;
  const double last = rows.back().second.tail;
  return {first < peak && last < peak && peak >= 0.10 && peak <= 0.22,
          "P(B>y*): rho=0.05 " + fmt(first, 5) + ", peak " + fmt(peak, 5) + " at rho=" +
              fmt(peak_rho, 3) + ", rho=0.95 " + fmt(last, 5)};
}

inline Outcome heavy_traffic_check(const Options&) {
  const QueueModel mm1(D::exponential(0.99), D::exponential(1.0));
  const double mm1_ratio = gamma_w(mm1) / heavy_traffic(mm1).gamma_w;
  std::vector<double> ratios;
  for (double rho : {0.9, 0.99, 0.999}) {
    const QueueModel m(D::exponential(1.0),
                       ClassSplit{0.5, D::uniform(0.0, 0.5), D::deterministic(2.0 * (rho - 0.125))});
    ratios.push_back(gamma_w2(m).rate / *heavy_traffic(m).gamma_w2);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    monotone = monotone && std::abs(ratios[i] - 1.0) < std::abs(ratios[i - 1] - 1.0) &&
               (ratios[i] - 1.0) * (ratios[i - 1] - 1.0) >= 0.0;
  }
  return {std::abs(mm1_ratio - 1.0) <= 0.03 && monotone,
          "M/M/1 ratio at 0.99=" + fmt(mm1_ratio, 6) + "; priority ratios=" + fmt(ratios[0], 6) +
              "," + fmt(ratios[1], 6) + "," + fmt(ratios[2], 6)};
}

inline Outcome psi_consistency(const Options& opt) {
  const QueueModel m(D::exponential(0.5), D::exponential(1.0));
  const int reps = opt.quick ? 500 : 2000;
  const double tol = opt.quick ? 0.10 : 0.05;
  const double est = empirical_psi(m, 0.25, 500.0, reps, opt.seed);
  const double exact = 0.5 * 0.25 / 0.75;
  const double err = std::abs(est - exact) / exact;
  return {err <= tol, "empirical=" + fmt(est, 6) + " exact=" + fmt(exact, 6) +
                          " rel_err=" + fmt(err, 3)};
}

}  // namespace detail

struct Criterion {
  int id;
  const char* name;
  double budget;  // seconds
  Outcome (*check)(const Options&);
};

inline const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "M/M/1 closed forms", 1.0, detail::mm1_closed_forms},
      {2, "priority cross-checks", 1.0, detail::priority_cross_checks},
      {3, "strict ordering gamma_p < gamma_w2 < gamma_w", 10.0, detail::ordering},
      {4, "SRPT rate monotone in atom mass q", 5.0, detail::q_sweep},
      {5, "FIFO simulation vs theory", 60.0, detail::fifo_simulation},
      {6, "SRPT atom-case simulation vs theory", 180.0, detail::srpt_simulation},
      {7, "exact sample-path identities", 30.0, detail::sample_paths},
      {8, "critical job size curve", 60.0, detail::figure_one},
      {9, "heavy-traffic approximations", 5.0, detail::heavy_traffic_check},
      {10, "busy-period exponent by simulation", 60.0, detail::psi_consistency},
  };
  return all;
}

inline Result run_one(const Criterion& c, const Options& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  Result r{c.id, c.name, false, 0.0, c.budget, "", std::nullopt};
  try {
    const auto o = c.check(opt);
    r.pass = o.pass;
    r.detail = o.detail;
  } catch (const Error& e) {
    r.detail = e.what();
    r.error = e.code();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.seconds > r.budget) {
    r.pass = false;
    r.detail += " [over time budget]";
  }
  return r;
}

inline std::vector<Result> run_all(const Options& opt) {
  std::vector<Result> out;
  for (const auto& c : criteria()) out.push_back(run_one(c, opt));
  return out;
}

inline std::string format_line(const Result& r) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << (r.pass ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << " (" << r.seconds
     << " s, budget " << r.budget << " s): " << r.detail;
  return os.str();
}

}  // namespace ldq::acceptance
