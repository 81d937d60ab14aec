#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace ldq::special {

inline double log_sum_exp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

/// log of  K_k(z) = int_0^1 t^(k-1)/(k-1)! e^(-z t) dt,  k >= 1, any real z.
///
/// Every truncated/shifted Erlang quantity in the library is a ratio of these
/// kernels: for a segment of width w, P(Y < w) ~ w^k K_k(rate w) and the MGF
/// is K_k((rate - s) w) / K_k(rate w). The three branches all sum positive
/// (or rapidly decaying) series, so there is no cancellation near z = 0.
inline double log_erlang_kernel(int k, double z) {
  const double log_fact_km1 = std::lgamma(static_cast<double>(k));
  if (std::abs(z) <= 1.0) {
    // sum_m (-z)^m / (m! (k+m)) / (k-1)!
    double power = 1.0;
    double sum = 0.0;
    for (int m = 0; m < 400; ++m) {
      const double term = power / (k + m);
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      power *= -z / (m + 1);
    }
    return std::log(sum) - log_fact_km1;
  }
  if (z > 0.0) {
    const double log_z = std::log(z);
    if (z > 2.0 * k + 10.0) {
      // z^-k (1 - Q), Q = P(Poisson(z) < k) is small here.
      double q = 0.0;
      double log_term = -z;  // j = 0
      for (int j = 0; j < k; ++j) {
        q += std::exp(log_term);
        log_term += log_z - std::log(j + 1.0);
      }
      return -k * log_z + std::log1p(-q);
    }
    // z^-k e^-z sum_{j>=k} z^j / j!, summed relative to the j = k term.
    double rel = 1.0;
    double sum = 1.0;
    for (int j = k + 1; j < k + 100000; ++j) {
      rel *= z / j;
      sum += rel;
      if (j > z && rel <= 1e-18 * sum) break;
    }
    const double log_first = k * log_z - std::lgamma(k + 1.0);
    return -k * log_z - z + log_first + std::log(sum);
  }
  // z < -1: all terms a^m / (m! (k+m)) positive, a = -z. Rescaled to avoid overflow.
  const double a = -z;
  double term = 1.0 / k;
  double sum = term;
  double log_scale = 0.0;
  for (int m = 0; m < 10000000; ++m) {
    term *= a / (m + 1) * (k + m) / (k + m + 1.0);
    sum += term;
    if (sum > 1e280) {
      sum *= 1e-280;
      term *= 1e-280;
      log_scale += 280.0 * std::log(10.0);
    }
    if (m + 1 > a && term <= 1e-18 * sum) break;
  }
  return std::log(sum) + log_scale - log_fact_km1;
}

}  // namespace ldq::special
