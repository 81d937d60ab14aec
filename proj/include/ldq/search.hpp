#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "ldq/error.hpp"

namespace ldq::search {

inline constexpr int kMaxIterations = 200;

/// Bisection on a monotone predicate. `lower(x)` must hold at `lo` and fail at
/// `hi`; returns the midpoint of the final bracket.
template <class Pred>
double bisect(Pred lower, double lo, double hi, double tol) {
  for (int it = 0; it < kMaxIterations && hi - lo > tol; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (lower(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

/// Doubles `hi` from `start` until `lower(hi)` fails. Throws after
/// kMaxIterations doublings.
template <class Pred>
double expand_upper(Pred lower, double start) {
  double hi = start;
  for (int it = 0; it < kMaxIterations; ++it) {
    if (!lower(hi)) return hi;
    hi *= 2.0;
  }
  throw Error(Errc::numerical_failure, "bracket expansion exceeded 200 doublings");
}

struct Maximum {
  double value;
  double arg;
  bool at_cap;  // the maximizer sits on the right end of the search domain
};

/// Golden-section maximization of a concave f on [0, cap] (cap may be +inf).
/// f may return -inf where it is undefined, provided that set is a right tail.
template <class F>
Maximum maximize_concave(F f, double cap, double tol = 1e-10) {
  double b = std::min(1.0, cap);
  double fb = f(b);
  double f_half = f(0.5 * b);
  int expansions = 0;
  while (fb >= f_half && b < cap) {
    if (++expansions > kMaxIterations) {
      throw Error(Errc::numerical_failure, "could not bracket the maximum in 200 expansions");
    }
    const double next = std::min(2.0 * b, cap);
    f_half = next == 2.0 * b ? fb : f(0.5 * next);
    b = next;
    fb = f(b);
  }

  constexpr double kInvPhi = 0.6180339887498949;
  double lo = 0.0;
  double hi = b;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  const double width_tol = tol * std::max(1.0, b);
  for (int it = 0; it < kMaxIterations && hi - lo > width_tol; ++it) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
  }
  Maximum best{f1 >= f2 ? f1 : f2, f1 >= f2 ? x1 : x2, false};
  const double f0 = f(0.0);
  if (f0 > best.value) best = {f0, 0.0, false};
  if (std::isfinite(cap) && b == cap) {
    if (fb >= best.value) best = {fb, cap, true};
    best.at_cap = best.at_cap || cap - best.arg <= 10.0 * width_tol;
  }
  return best;
}

}  // namespace ldq::search
