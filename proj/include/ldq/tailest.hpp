#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ldq/dist.hpp"
#include "ldq/model.hpp"
#include "ldq/ratecalc.hpp"
#include "ldq/rng.hpp"

namespace ldq {

struct FitWindow {
  double lo_quantile = 0.99;  // window starts at this empirical quantile
  int top_drop = 10;          // order statistics left above the window
  int min_points = 500;       // distinct values required inside the window
  std::int64_t min_samples = 5000;
  int bootstrap = 0;  // resamples for a percentile CI; 0 disables it
  std::uint64_t seed = 1;
};

struct TailFit {
  double rate;
  double std_error;
  double x_lo;
  double x_hi;
  std::int64_t points;
  std::optional<std::pair<double, double>> ci;
};

namespace detail {

/// Weighted least-squares fit of log ccdf against x over the quantile window
/// of an ascending sample.
inline TailFit fit_sorted(const std::vector<double>& x, const FitWindow& cfg) {
  const auto n = static_cast<std::int64_t>(x.size());
  if (n < cfg.min_samples) {
    throw Error(Errc::degenerate_tail, "need at least " + std::to_string(cfg.min_samples) +
                                           " samples, got " + std::to_string(n));
  }
  const auto lo_idx = std::min<std::int64_t>(
      n - 1, static_cast<std::int64_t>(std::floor(cfg.lo_quantile * static_cast<double>(n))));
  const std::int64_t hi_idx = n - 1 - cfg.top_drop;
  if (hi_idx <= lo_idx) throw Error(Errc::degenerate_tail, "fitting window is empty");
  const double x_lo = x[lo_idx];
  const double x_hi = x[hi_idx];

  // One point per distinct value v in [x_lo, x_hi]: (v, log #{> v} / n),
  // weighted by #{> v}, the inverse of the point's approximate variance.
  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  std::int64_t m = 0;
  const double shift = x_lo;  // centre for conditioning
  auto i = static_cast<std::int64_t>(std::lower_bound(x.begin(), x.end(), x_lo) - x.begin());
  while (i < n && x[i] <= x_hi) {
    std::int64_t j = i;
    while (j + 1 < n && x[j + 1] == x[i]) ++j;
    const double above = static_cast<double>(n - 1 - j);
    if (above > 0.0) {
      const double u = x[i] - shift;
      const double v = std::log(above / static_cast<double>(n));
      sw += above;
      sx += above * u;
      sy += above * v;
      sxx += above * u * u;
      sxy += above * u * v;
      syy += above * v * v;
      ++m;
    }
    i = j + 1;
  }
  if (m < cfg.min_points) {
    throw Error(Errc::degenerate_tail, "only " + std::to_string(m) +
                                           " distinct values in the fitting window");
  }
  const double cxx = sxx - sx * sx / sw;
  const double cxy = sxy - sx * sy / sw;
  const double cyy = syy - sy * sy / sw;
  if (!(cxx > 0.0)) throw Error(Errc::degenerate_tail, "fitting window has zero width");
  const double slope = cxy / cxx;
  const double ssr = std::max(0.0, cyy - slope * cxy);
  const double se = std::sqrt(ssr / (static_cast<double>(m) - 2.0) / cxx);
  if (!(slope < 0.0)) throw Error(Errc::degenerate_tail, "empirical tail is not decreasing");
  return {-slope, se, x_lo, x_hi, m, std::nullopt};
}

}  // namespace detail

/// Fitted logarithmic decay rate of the empirical tail of `samples`.
inline TailFit fit_decay(std::vector<double> samples, const FitWindow& cfg = {}) {
  std::sort(samples.begin(), samples.end());
  auto fit = detail::fit_sorted(samples, cfg);
  if (cfg.bootstrap > 0) {
    Rng rng(cfg.seed, 0x626f6f74ULL);
    std::vector<double> rates;
    std::vector<double> resample(samples.size());
    for (int b = 0; b < cfg.bootstrap; ++b) {
      for (auto& v : resample) v = samples[rng.below(samples.size())];
      std::sort(resample.begin(), resample.end());
      try {
        rates.push_back(detail::fit_sorted(resample, cfg).rate);
      } catch (const Error&) {
        // a degenerate resample carries no information about the spread
      }
    }
    if (rates.size() >= 2) {
      std::sort(rates.begin(), rates.end());
      auto at = [&](double q) {
        const double pos = q * static_cast<double>(rates.size() - 1);
        const auto k = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(k);
        return k + 1 < rates.size() ? rates[k] * (1.0 - frac) + rates[k + 1] * frac : rates[k];
      };
      fit.ci = std::make_pair(at(0.025), at(0.975));
    }
  }
  return fit;
}

/// Standard error of the fitted rate from `batches` contiguous batches of a
/// (possibly autocorrelated) sample path: sd of the batch rates / sqrt(batches).
inline double batch_means_std_error(const std::vector<double>& samples, int batches,
                                    const FitWindow& cfg = {}) {
  detail::require(batches >= 2, "need at least two batches");
  const std::size_t size = samples.size() / static_cast<std::size_t>(batches);
  std::vector<double> rates;
  for (int b = 0; b < batches; ++b) {
    std::vector<double> part(samples.begin() + static_cast<std::ptrdiff_t>(b * size),
                             samples.begin() + static_cast<std::ptrdiff_t>((b + 1) * size));
    std::sort(part.begin(), part.end());
    rates.push_back(detail::fit_sorted(part, cfg).rate);
  }
  double mean = 0.0;
  for (double r : rates) mean += r;
  mean /= batches;
  double ss = 0.0;
  for (double r : rates) ss += (r - mean) * (r - mean);
  return std::sqrt(ss / (batches - 1.0) / batches);
}

// ---------------------------------------------------------------------------
// Importance sampling of the workload tail.

struct TiltedMeasure {
  double nu;
  double psi_nu;
  DistributionSpec arrival;
  DistributionSpec service;
};

/// Tilt at the root of Phi_A(-s) Phi_B(s) = 1, under which the walk
/// sum(B_i - A_i) drifts upward.
inline TiltedMeasure workload_tilt(const QueueModel& m) {
  WorkloadRate gw{};
  try {
    gw = gamma_w_info(m.arrival(), m.service());
  } catch (const Error& e) {
    if (e.code() == Errc::no_delays) {
      throw Error(Errc::tilt_unavailable, "no delays, so no workload tilt exists");
    }
    throw;
  }
  if (gw.boundary) {
    throw Error(Errc::tilt_unavailable, "gamma_w sits on the MGF-domain boundary");
  }
  const double nu = gw.value;
  const double psi_nu = psi(m.arrival(), m.service(), nu);
  return {nu, psi_nu, tilt(m.arrival(), -nu), tilt(m.service(), nu)};
}

struct TailEstimate {
  double estimate;
  double std_error;
  double rel_std_error;
};

/// P(W > x) from first passage of the tilted walk over x, weighted by
/// exp(-nu S_tau). One RNG stream per replication index.
inline TailEstimate is_workload_tail(const QueueModel& m, double x, int reps, std::uint64_t seed) {
  detail::require(x >= 0.0 && std::isfinite(x), "level must be nonnegative");
  detail::require(reps >= 2, "need at least two replications");
  m.require_stable();
  const auto tm = workload_tilt(m);
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    Rng rng(seed, static_cast<std::uint64_t>(r));
    double s = 0.0;
    while (!(s > x)) s += sample(tm.service, rng) - sample(tm.arrival, rng);
    const double w = std::exp(-tm.nu * s);
    sum += w;
    sum_sq += w * w;
  }
  const double n = reps;
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  const double se = std::sqrt(var / n);
  return {mean, se, mean > 0.0 ? se / mean : kInf};
}

// ---------------------------------------------------------------------------

struct RateComparison {
  double analytic;
  double fitted;
  double std_error;
  double rel_error;
  double z;
  double tolerance;
  bool pass;
};

inline RateComparison compare_rates(double analytic, const TailFit& fit, double tolerance) {
  const double rel = std::abs(fit.rate - analytic) / std::abs(analytic);
  const double z = fit.std_error > 0.0 ? (fit.rate - analytic) / fit.std_error : kInf;
  return {analytic, fit.rate, fit.std_error, rel, z, tolerance, rel <= tolerance};
}

}  // namespace ldq
