#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "ldq/dist.hpp"
#include "ldq/model.hpp"
#include "ldq/search.hpp"

namespace ldq {

inline constexpr double kRootTolerance = 1e-12;
inline constexpr double kDomainMargin = 1e-9;

/// Largest s used inside the MGF domain of d.
inline double domain_cap(const DistributionSpec& d) {
  const double s_max = mgf_abscissa(d).s_max;
  return std::isfinite(s_max) ? s_max * (1.0 - kDomainMargin) : kInf;
}

// ---------------------------------------------------------------------------
// Busy-period exponent Psi and its class-1 analogue.

/// Psi(s) = -Phi_A^{-1}(1 / Phi_B(s)).
inline double psi(const DistributionSpec& a, const DistributionSpec& b, double s) {
  if (s == 0.0) return 0.0;
  return inverse_log_mgf_neg(a, -log_mgf(b, s));
}

namespace detail {

/// Psi extended by +inf where 1/Phi_B(s) drops below the range of Phi_A(-u).
inline double psi_or_inf(const DistributionSpec& a, const DistributionSpec& b, double s) {
  try {
    return psi(a, b, s);
  } catch (const Error& e) {
    if (e.code() == Errc::out_of_range) return kInf;
    throw;
  }
}

/// log Phi_{A_1}(-u) for the geometric(p) sum of inter-arrival times.
inline double log_thinned_mgf_neg(const DistributionSpec& a, double p, double u) {
  const double log_phi = log_mgf(a, -u);
  return std::log(p) + log_phi - std::log1p(-(1.0 - p) * std::exp(log_phi));
}

}  // namespace detail

/// Psi_1(s) = -Phi_{A_1}^{-1}(1 / Phi_{B_1}(s)), solved on the thinned MGF.
inline double psi1(const DistributionSpec& a, double p, const DistributionSpec& b1, double s) {
  detail::require(p > 0.0 && p <= 1.0, "class-1 probability must lie in (0, 1]");
  if (s == 0.0) return 0.0;
  const double log_v = -log_mgf(b1, s);
  if (log_v > 0.0) throw Error(Errc::out_of_range, "Psi_1 needs s >= 0");
  const double p0 = mass_at_zero(a);
  const double log_floor = std::log(p * p0) - std::log1p(-(1.0 - p) * p0);
  if (log_v <= log_floor) throw Error(Errc::out_of_range, "Psi_1 target below the range");
  auto above = [&](double u) { return detail::log_thinned_mgf_neg(a, p, u) > log_v; };
  const double hi = search::expand_upper(above, 1.0);
  return search::bisect(above, 0.0, hi, kInverseTolerance);
}

/// Same quantity through the full arrival stream with B_p = B_1 w.p. p, else 0.
inline double psi1_via_bp(const DistributionSpec& a, double p, const DistributionSpec& b1,
                          double s) {
  if (p == 1.0) return psi(a, b1, s);
  const auto bp = make_mixture({{p, b1}, {1.0 - p, DistributionSpec::deterministic(0.0)}});
  return psi(a, bp, s);
}

/// Psi_1'(s) by implicit differentiation of Phi_{A_1}(-Psi_1(s)) Phi_{B_1}(s) = 1.
inline double psi1_deriv(const DistributionSpec& a, double p, const DistributionSpec& b1,
                         double s) {
  const double u = psi1(a, p, b1, s);
  const double phi_a = mgf(a, -u);
  const double num = mgf_deriv(b1, s) / mgf(b1, s);
  const double den = mgf_deriv(a, -u) / (phi_a * (1.0 - (1.0 - p) * phi_a));
  return num / den;
}

// ---------------------------------------------------------------------------
// Workload and busy-period decay rates.

struct WorkloadRate {
  double value;
  bool boundary;  // no root below s_max(B); value is s_max(B)
};

inline void require_regular(const DistributionSpec& a, const DistributionSpec& b) {
  QueueModel m(a, b);
  m.require_stable();
  m.require_delays();
}

/// gamma_w = sup{s : Phi_A(-s) Phi_B(s) <= 1}.
inline WorkloadRate gamma_w_info(const DistributionSpec& a, const DistributionSpec& b) {
  require_regular(a, b);
  auto g = [&](double s) { return log_mgf(a, -s) + log_mgf(b, s); };
  auto inside = [&](double s) { return g(s) < 0.0; };
  const double cap = domain_cap(b);
  double hi = 1.0;
  while (hi < cap && inside(hi)) {
    hi *= 2.0;
    if (hi > 1e300) throw Error(Errc::numerical_failure, "gamma_w bracket diverged");
  }
  if (hi >= cap) {
    if (inside(cap)) return {mgf_abscissa(b).s_max, true};
    hi = cap;
  }
  return {search::bisect(inside, 0.0, hi, kRootTolerance), false};
}

inline double gamma_w(const QueueModel& m) {
  return gamma_w_info(m.arrival(), m.service()).value;
}

/// sup_{s >= 0} {s - Psi(s)} with its maximizer.
inline search::Maximum busy_decay(const DistributionSpec& a, const DistributionSpec& b) {
  QueueModel(a, b).require_stable();
  return search::maximize_concave([&](double s) { return s - detail::psi_or_inf(a, b, s); },
                                  domain_cap(b));
}

inline double gamma_p(const QueueModel& m) {
  m.require_stable();
  m.require_delays();
  return busy_decay(m.arrival(), m.service()).value;
}

/// Busy-period decay rate with service B*1(B < y); +inf when that work never
/// exceeds an inter-arrival time.
inline double gamma_p_trunc(const DistributionSpec& a, const DistributionSpec& b, double y) {
  const auto by = truncate_below(b, y);
  if (!(upper_endpoint(by) > lower_endpoint(a))) return kInf;
  return busy_decay(a, by).value;
}

inline double gamma_p_trunc(const QueueModel& m, double y) {
  m.require_stable();
  return gamma_p_trunc(m.arrival(), m.service(), y);
}

// ---------------------------------------------------------------------------
// Two-class priority queue: waiting time of the low class.

enum class Regime { interior, boundary };

inline const char* regime_name(Regime r) { return r == Regime::interior ? "interior" : "boundary"; }

struct PriorityRate {
  double rate;
  Regime regime;
  double s_opt;
  double a;             // 1 - Psi_1'(gamma_w) in the boundary regime, else 0
  double gamma_w;       // of the full system
  double s1;            // unconstrained maximizer of s - Psi_1(s)
  bool s1_at_cap;       // s1 hit the edge of the B_1 MGF domain
};

/// sup over [0, gamma_w] of s - Psi_1(s).
inline PriorityRate gamma_w2(const DistributionSpec& a, double p, const DistributionSpec& b1,
                             const DistributionSpec& b2) {
  detail::require(p > 0.0 && p < 1.0, "class-1 probability must lie in (0, 1)");
  const auto b = make_mixture({{p, b1}, {1.0 - p, b2}});
  const auto gw = gamma_w_info(a, b);
  const double edge = gw.boundary ? gw.value * (1.0 - kDomainMargin) : gw.value;
  auto f1 = [&](double s) {
    try {
      return s - psi1(a, p, b1, s);
    } catch (const Error& e) {
      if (e.code() == Errc::out_of_range) return -kInf;
      throw;
    }
  };
  const auto m1 = search::maximize_concave(f1, domain_cap(b1));
  if (m1.arg <= edge) {
    return {m1.value, Regime::interior, m1.arg, 0.0, gw.value, m1.arg, m1.at_cap};
  }
  const double rate = edge - psi1(a, p, b1, edge);
  const double slope = psi1_deriv(a, p, b1, edge);
  return {rate, Regime::boundary, edge, 1.0 - slope, gw.value, m1.arg, m1.at_cap};
}

inline PriorityRate gamma_w2(const QueueModel& m) {
  if (!m.split()) throw Error(Errc::invalid_argument, "gamma_w2 needs a two-class split");
  const auto& sp = *m.split();
  return gamma_w2(m.arrival(), sp.p, sp.class1, sp.class2);
}

// ---------------------------------------------------------------------------
// SRPT sojourn time.

enum class SrptCase { no_atom, atom, deterministic };

inline const char* srpt_case_name(SrptCase c) {
  switch (c) {
    case SrptCase::no_atom: return "no-atom";
    case SrptCase::atom: return "atom";
    case SrptCase::deterministic: return "deterministic";
  }
  return "?";
}

struct SrptRate {
  double rate;
  SrptCase kase;
  Regime regime;
  double s_opt;
  double a;
  double q;
  double x_b;
};

inline SrptRate gamma_v_srpt(const DistributionSpec& a, const DistributionSpec& b) {
  require_regular(a, b);
  const auto split = split_endpoint_atom(b);
  if (split.q == 0.0) {
    const auto m = busy_decay(a, b);
    return {m.value, SrptCase::no_atom, Regime::interior, m.arg, 0.0, 0.0, split.x_b};
  }
  if (split.q == 1.0) {
    const double gw = gamma_w_info(a, b).value;
    return {gw, SrptCase::deterministic, Regime::boundary, gw, 1.0, 1.0, split.x_b};
  }
  const auto pr =
      gamma_w2(a, 1.0 - split.q, *split.lower, DistributionSpec::deterministic(split.x_b));
  return {pr.rate, SrptCase::atom, pr.regime, pr.s_opt, pr.a, split.q, split.x_b};
}

inline SrptRate gamma_v_srpt(const QueueModel& m) {
  return gamma_v_srpt(m.arrival(), m.service());
}

// ---------------------------------------------------------------------------
// Closed forms for Poisson arrivals.

struct PoissonRates {
  double gamma_w;
  std::optional<double> guard{};   // lambda_1 Phi'_{B_1}(gamma_w)
  bool guard_holds = false;
  std::optional<double> gamma_w2{};  // class-2 waiting (split or atom-derived classes)
  std::optional<double> gamma_v{};   // SRPT atom case
};

/// lambda: Poisson rate; class data taken from the split, else from the endpoint atom of B.
inline PoissonRates poisson_rates(double lambda, const DistributionSpec& b,
                                  const std::optional<ClassSplit>& split = std::nullopt) {
  detail::require(std::isfinite(lambda) && lambda > 0.0, "arrival rate must be positive");
  const auto a = DistributionSpec::exponential(lambda);
  require_regular(a, b);

  auto h = [&](double g) { return lambda * std::expm1(log_mgf(b, g)) - g; };
  auto inside = [&](double g) { return h(g) < 0.0; };
  const double cap = domain_cap(b);
  double hi = 1.0;
  while (hi < cap && inside(hi)) hi *= 2.0;
  if (hi >= cap) {
    if (inside(cap)) throw Error(Errc::numerical_failure, "no root of the Poisson workload equation");
    hi = cap;
  }
  PoissonRates out{search::bisect(inside, 0.0, hi, kRootTolerance)};

  std::optional<double> p;
  std::optional<DistributionSpec> b1;
  const auto atom = split_endpoint_atom(b);
  if (split) {
    p = split->p;
    b1 = split->class1;
  } else if (atom.q > 0.0 && atom.q < 1.0) {
    p = 1.0 - atom.q;
    b1 = atom.lower;
  }
  if (!p) return out;

  const double lambda1 = *p * lambda;
  const double gw = out.gamma_w;
  out.guard = lambda1 * mgf_deriv(*b1, gw);
  out.guard_holds = *out.guard < 1.0;
  if (out.guard_holds) {
    out.gamma_w2 = gw - lambda1 * std::expm1(log_mgf(*b1, gw));
  } else {
    out.gamma_w2 = search::maximize_concave(
                       [&](double s) { return s - lambda1 * std::expm1(log_mgf(*b1, s)); }, gw)
                       .value;
  }
  if (!split) {
    out.gamma_v = out.guard_holds ? lambda * atom.q * std::expm1(atom.x_b * gw) : *out.gamma_w2;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Critical job size.

struct YStar {
  double y;
  double tail;  // P(B > y*)
};

/// y* = sup{y : gamma_p^y >= gamma_w}.
inline YStar y_star(const DistributionSpec& a, const DistributionSpec& b) {
  const double gw = gamma_w_info(a, b).value;
  const auto atom = split_endpoint_atom(b);
  if (atom.q == 1.0) return {atom.x_b, 0.0};

  auto above = [&](double y) { return gamma_p_trunc(a, b, y) >= gw; };
  double lo = mean(b);
  int steps = 0;
  while (!above(lo)) {
    lo *= 0.5;
    if (++steps > search::kMaxIterations) {
      throw Error(Errc::numerical_failure, "y* lower bracket not found");
    }
  }
  const double cap = std::isfinite(atom.x_b) ? std::nextafter(atom.x_b, kInf) : kInf;
  double hi = lo;
  steps = 0;
  while (hi < cap && above(hi)) {
    hi = std::min(2.0 * hi, cap);
    if (++steps > search::kMaxIterations) {
      throw Error(Errc::numerical_failure, "y* upper bracket exceeded 200 doublings");
    }
  }
  if (hi >= cap && above(hi)) return {atom.x_b, 0.0};
  const double y = search::bisect(above, lo, hi, 1e-13 * std::max(1.0, hi));
  return {y, ccdf(b, y)};
}

inline YStar y_star(const QueueModel& m) {
  m.require_stable();
  return y_star(m.arrival(), m.service());
}

// ---------------------------------------------------------------------------
// Heavy-traffic approximations.

struct HeavyTraffic {
  double K;
  double gamma_w;                  // K (1 - rho)
  std::optional<double> rho1;      // class-1 load
  std::optional<double> gamma_w2;  // K (1 - rho1) (1 - rho)
};

inline HeavyTraffic heavy_traffic(const QueueModel& m) {
  const double var = variance(m.arrival()) + variance(m.service());
  detail::require(var > 0.0, "heavy-traffic constant needs positive total variance");
  HeavyTraffic out{2.0 / var, 2.0 / var * (1.0 - m.rho()), std::nullopt, std::nullopt};
  if (m.split()) {
    out.rho1 = m.split()->p * mean(m.split()->class1) / mean(m.arrival());
    out.gamma_w2 = out.K * (1.0 - *out.rho1) * (1.0 - m.rho());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregate report.

struct DecayReport {
  double gamma_w;
  bool gamma_w_boundary;
  double gamma_p;
  std::optional<double> gamma_w2;
  std::optional<double> gamma_v;
  Regime regime;
  double s_opt;
  double a;
  std::optional<double> K;
  double rho;
  double q;
  double x_b;
  std::optional<SrptCase> kase;
};

inline DecayReport analyze(const QueueModel& m) {
  m.require_stable();
  m.require_delays();
  const auto& a = m.arrival();
  const auto& b = m.service();
  DecayReport r{};
  const auto gw = gamma_w_info(a, b);
  r.gamma_w = gw.value;
  r.gamma_w_boundary = gw.boundary;
  r.gamma_p = busy_decay(a, b).value;
  r.rho = m.rho();
  const auto atom = split_endpoint_atom(b);
  r.q = atom.q;
  r.x_b = atom.x_b;
  const double var = variance(a) + variance(b);
  if (var > 0.0) r.K = 2.0 / var;

  const auto v = gamma_v_srpt(a, b);
  r.gamma_v = v.rate;
  r.kase = v.kase;
  r.regime = v.regime;
  r.s_opt = v.s_opt;
  r.a = v.a;
  if (m.split()) {
    const auto w2 = gamma_w2(m);
    r.gamma_w2 = w2.rate;
    r.regime = w2.regime;
    r.s_opt = w2.s_opt;
    r.a = w2.a;
  }
  return r;
}

}  // namespace ldq
