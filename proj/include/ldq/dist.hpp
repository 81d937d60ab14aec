#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ldq/error.hpp"
#include "ldq/rng.hpp"
#include "ldq/search.hpp"
#include "ldq/special.hpp"

namespace ldq {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Exponential {
  double rate;
  bool operator==(const Exponential&) const = default;
};

struct Deterministic {
  double value;
  bool operator==(const Deterministic&) const = default;
};

struct UniformInterval {
  double lo;
  double hi;
  bool operator==(const UniformInterval&) const = default;
};

struct Erlang {
  int shape;
  double rate;
  bool operator==(const Erlang&) const = default;
};

/// X = lo + Y, where Y has density proportional to y^(shape-1) e^(-rate y) on
/// [0, hi - lo). The rate may be zero or negative. This is the form taken by
/// exponential/Erlang laws after truncation, and by uniforms after tilting.
struct TruncatedErlang {
  int shape;
  double rate;
  double lo;
  double hi;
  bool operator==(const TruncatedErlang&) const = default;
};

class DistributionSpec;
struct MixtureComponent;

struct Mixture {
  std::vector<MixtureComponent> components;
  bool operator==(const Mixture&) const;
};

/// Declarative nonnegative law. Construct through the static factories,
/// which enforce the parameter invariants.
class DistributionSpec {
 public:
  using Variant =
      std::variant<Exponential, Deterministic, UniformInterval, Erlang, TruncatedErlang, Mixture>;

  static DistributionSpec exponential(double rate);
  static DistributionSpec deterministic(double value);
  static DistributionSpec uniform(double lo, double hi);
  static DistributionSpec erlang(int shape, double rate);
  static DistributionSpec truncated_erlang(int shape, double rate, double lo, double hi);
  static DistributionSpec mixture(std::vector<MixtureComponent> components);

  const Variant& variant() const { return v_; }
  bool operator==(const DistributionSpec& other) const { return v_ == other.v_; }

 private:
  explicit DistributionSpec(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

struct MixtureComponent {
  double weight;
  DistributionSpec dist;
  bool operator==(const MixtureComponent&) const = default;
};

inline bool Mixture::operator==(const Mixture& other) const {
  return components == other.components;
}

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::invalid_argument, what);
}

inline bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace detail

inline DistributionSpec DistributionSpec::exponential(double rate) {
  detail::require(std::isfinite(rate) && rate > 0.0, "exponential rate must be positive");
  return DistributionSpec(Exponential{rate});
}

inline DistributionSpec DistributionSpec::deterministic(double value) {
  detail::require(detail::finite_nonneg(value), "deterministic value must be nonnegative");
  return DistributionSpec(Deterministic{value});
}

inline DistributionSpec DistributionSpec::uniform(double lo, double hi) {
  detail::require(detail::finite_nonneg(lo) && std::isfinite(hi) && lo < hi,
                  "uniform needs 0 <= lo < hi");
  return DistributionSpec(UniformInterval{lo, hi});
}

inline DistributionSpec DistributionSpec::erlang(int shape, double rate) {
  detail::require(shape >= 1, "erlang shape must be a positive integer");
  detail::require(std::isfinite(rate) && rate > 0.0, "erlang rate must be positive");
  return DistributionSpec(Erlang{shape, rate});
}

inline DistributionSpec DistributionSpec::truncated_erlang(int shape, double rate, double lo,
                                                           double hi) {
  detail::require(shape >= 1, "truncated_erlang shape must be a positive integer");
  detail::require(std::isfinite(rate), "truncated_erlang rate must be finite");
  detail::require(detail::finite_nonneg(lo) && std::isfinite(hi) && lo < hi,
                  "truncated_erlang needs 0 <= lo < hi");
  return DistributionSpec(TruncatedErlang{shape, rate, lo, hi});
}

inline DistributionSpec DistributionSpec::mixture(std::vector<MixtureComponent> components) {
  detail::require(!components.empty(), "mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components) {
    detail::require(c.weight > 0.0 && c.weight <= 1.0, "mixture weights must lie in (0, 1]");
    total += c.weight;
  }
  detail::require(std::abs(total - 1.0) <= 1e-12, "mixture weights must sum to 1");
  return DistributionSpec(Mixture{std::move(components)});
}

// ---------------------------------------------------------------------------
// Segment helpers (Erlang-shaped density on [lo, lo + width)).

namespace detail {

using special::log_erlang_kernel;

inline double segment_log_mgf(int k, double rate, double lo, double width, double s) {
  return s * lo + log_erlang_kernel(k, (rate - s) * width) - log_erlang_kernel(k, rate * width);
}

inline double segment_mgf_deriv(int k, double rate, double lo, double width, double s) {
  const double log_norm = log_erlang_kernel(k, rate * width);
  const double theta_w = (rate - s) * width;
  const double mgf_y = std::exp(log_erlang_kernel(k, theta_w) - log_norm);
  const double deriv_y = k * width * std::exp(log_erlang_kernel(k + 1, theta_w) - log_norm);
  return std::exp(s * lo) * (lo * mgf_y + deriv_y);
}

inline double segment_mean(int k, double rate, double lo, double width) {
  const double log_norm = log_erlang_kernel(k, rate * width);
  return lo + k * width * std::exp(log_erlang_kernel(k + 1, rate * width) - log_norm);
}

inline double segment_variance(int k, double rate, double width) {
  const double log_norm = log_erlang_kernel(k, rate * width);
  const double m1 = k * width * std::exp(log_erlang_kernel(k + 1, rate * width) - log_norm);
  const double m2 =
      k * (k + 1.0) * width * width * std::exp(log_erlang_kernel(k + 2, rate * width) - log_norm);
  return std::max(0.0, m2 - m1 * m1);
}

/// P(Y <= y) for the segment variable Y in [0, width).
inline double segment_cdf(int k, double rate, double width, double y) {
  if (y <= 0.0) return 0.0;
  if (y >= width) return 1.0;
  return std::exp(k * std::log(y / width) + log_erlang_kernel(k, rate * y) -
                  log_erlang_kernel(k, rate * width));
}

/// Exponential(rate > 0) conditioned on [0, width).
inline double sample_truncated_exponential(double rate, double width, double u) {
  if (rate * width < 1e-12) return u * width;
  return std::min(-std::log1p(u * std::expm1(-rate * width)) / rate, std::nextafter(width, 0.0));
}

inline double sample_segment(int k, double rate, double width, double u, Rng& rng) {
  if (k == 1) {
    if (std::abs(rate) * width < 1e-12) return u * width;
    if (rate > 0.0) return sample_truncated_exponential(rate, width, u);
    return width - sample_truncated_exponential(-rate, width, u);
  }
  (void)rng;
  return search::bisect([&](double y) { return segment_cdf(k, rate, width, y) < u; }, 0.0, width,
                        1e-15 * width);
}

inline double erlang_ccdf(int k, double rate, double x) {
  if (x <= 0.0) return 1.0;
  const double z = rate * x;
  double log_term = -z;
  double sum = 0.0;
  for (int j = 0; j < k; ++j) {
    sum += std::exp(log_term);
    log_term += std::log(z) - std::log(j + 1.0);
  }
  return std::min(1.0, sum);
}

inline double erlang_cdf(int k, double rate, double x) {
  if (x <= 0.0) return 0.0;
  const double upper = erlang_ccdf(k, rate, x);
  if (upper < 0.5) return 1.0 - upper;
  return std::exp(k * std::log(rate * x) + log_erlang_kernel(k, rate * x));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Structure: endpoints, atoms, flattening.

/// Essential supremum x_B (possibly +inf).
inline double upper_endpoint(const DistributionSpec& d) {
  return std::visit(
      detail::overloaded{
          [](const Exponential&) { return kInf; },
          [](const Deterministic& x) { return x.value; },
          [](const UniformInterval& x) { return x.hi; },
          [](const Erlang&) { return kInf; },
          [](const TruncatedErlang& x) { return x.hi; },
          [](const Mixture& m) {
            double hi = 0.0;
            for (const auto& c : m.components) hi = std::max(hi, upper_endpoint(c.dist));
            return hi;
          },
      },
      d.variant());
}

/// Essential infimum.
inline double lower_endpoint(const DistributionSpec& d) {
  return std::visit(
      detail::overloaded{
          [](const Exponential&) { return 0.0; },
          [](const Deterministic& x) { return x.value; },
          [](const UniformInterval& x) { return x.lo; },
          [](const Erlang&) { return 0.0; },
          [](const TruncatedErlang& x) { return x.lo; },
          [](const Mixture& m) {
            double lo = kInf;
            for (const auto& c : m.components) lo = std::min(lo, lower_endpoint(c.dist));
            return lo;
          },
      },
      d.variant());
}

/// P(X = 0).
inline double mass_at_zero(const DistributionSpec& d) {
  return std::visit(
      detail::overloaded{
          [](const Deterministic& x) { return x.value == 0.0 ? 1.0 : 0.0; },
          [](const Mixture& m) {
            double p = 0.0;
            for (const auto& c : m.components) p += c.weight * mass_at_zero(c.dist);
            return p;
          },
          [](const auto&) { return 0.0; },
      },
      d.variant());
}

/// Leaves of the variant tree with absolute weights; equal-valued
/// Deterministic leaves are merged.
inline std::vector<MixtureComponent> flatten(const DistributionSpec& d, double weight = 1.0) {
  std::vector<MixtureComponent> out;
  auto push = [&out](double w, const DistributionSpec& leaf) {
    if (w <= 0.0) return;
    if (const auto* det = std::get_if<Deterministic>(&leaf.variant())) {
      for (auto& c : out) {
        const auto* other = std::get_if<Deterministic>(&c.dist.variant());
        if (other != nullptr && other->value == det->value) {
          c.weight += w;
          return;
        }
      }
    }
    out.push_back({w, leaf});
  };
  if (const auto* m = std::get_if<Mixture>(&d.variant())) {
    for (const auto& c : m->components) {
      for (auto& leaf : flatten(c.dist, weight * c.weight)) push(leaf.weight, leaf.dist);
    }
  } else {
    push(weight, d);
  }
  return out;
}

/// Builds a law from weighted parts, renormalizing; a single part collapses
/// to itself.
inline DistributionSpec make_mixture(const std::vector<MixtureComponent>& parts) {
  std::vector<MixtureComponent> leaves;
  for (const auto& p : parts) {
    for (auto& leaf : flatten(p.dist, p.weight)) leaves.push_back(std::move(leaf));
  }
  auto merged = flatten(DistributionSpec::mixture([&] {
    double total = 0.0;
    for (const auto& l : leaves) total += l.weight;
    detail::require(total > 0.0, "make_mixture needs positive total weight");
    std::vector<MixtureComponent> norm;
    for (const auto& l : leaves) norm.push_back({l.weight / total, l.dist});
    // Tolerate accumulated rounding before validation.
    double sum = 0.0;
    for (const auto& n : norm) sum += n.weight;
    norm.back().weight += 1.0 - sum;
    return norm;
  }()));
  if (merged.size() == 1) return merged.front().dist;
  double sum = 0.0;
  for (const auto& c : merged) sum += c.weight;
  merged.back().weight += 1.0 - sum;
  return DistributionSpec::mixture(std::move(merged));
}

// ---------------------------------------------------------------------------
// Moment generating function.

struct MgfDomain {
  double s_max;  // abscissa of convergence
  bool finite_at_boundary;
};

inline MgfDomain mgf_abscissa(const DistributionSpec& d) {
  return std::visit(
      detail::overloaded{
          [](const Exponential& x) { return MgfDomain{x.rate, false}; },
          [](const Erlang& x) { return MgfDomain{x.rate, false}; },
          [](const Mixture& m) {
            MgfDomain dom{kInf, false};
            for (const auto& c : m.components) {
              const auto sub = mgf_abscissa(c.dist);
              if (sub.s_max < dom.s_max) dom = sub;
            }
            return dom;
          },
          [](const auto&) { return MgfDomain{kInf, false}; },
      },
      d.variant());
}

namespace detail {
inline void check_domain(const DistributionSpec& d, double s) {
  if (!(s < mgf_abscissa(d).s_max)) {
    throw Error(Errc::out_of_domain,
                "MGF evaluated at s=" + std::to_string(s) + " beyond its abscissa");
  }
}
}  // namespace detail

/// log E[e^{sX}]. Evaluated in log space so that large |s| neither overflows
/// nor loses the relative precision of tiny values.
inline double log_mgf(const DistributionSpec& d, double s) {
  detail::check_domain(d, s);
  return std::visit(
      detail::overloaded{
          [s](const Exponential& x) { return -std::log1p(-s / x.rate); },
          [s](const Deterministic& x) { return s * x.value; },
          [s](const UniformInterval& x) {
            return detail::segment_log_mgf(1, 0.0, x.lo, x.hi - x.lo, s);
          },
          [s](const Erlang& x) { return -x.shape * std::log1p(-s / x.rate); },
          [s](const TruncatedErlang& x) {
            return detail::segment_log_mgf(x.shape, x.rate, x.lo, x.hi - x.lo, s);
          },
          [s](const Mixture& m) {
            std::vector<double> terms;
            terms.reserve(m.components.size());
            for (const auto& c : m.components) {
              terms.push_back(std::log(c.weight) + log_mgf(c.dist, s));
            }
            return special::log_sum_exp(terms);
          },
      },
      d.variant());
}

inline double mgf(const DistributionSpec& d, double s) { return std::exp(log_mgf(d, s)); }

/// E[X e^{sX}].
inline double mgf_deriv(const DistributionSpec& d, double s) {
  detail::check_domain(d, s);
  return std::visit(
      detail::overloaded{
          [s](const Exponential& x) { return x.rate / ((x.rate - s) * (x.rate - s)); },
          [s](const Deterministic& x) { return x.value * std::exp(s * x.value); },
          [s](const UniformInterval& x) {
            return detail::segment_mgf_deriv(1, 0.0, x.lo, x.hi - x.lo, s);
          },
          [s](const Erlang& x) {
            return x.shape / (x.rate - s) * std::pow(x.rate / (x.rate - s), x.shape);
          },
          [s](const TruncatedErlang& x) {
            return detail::segment_mgf_deriv(x.shape, x.rate, x.lo, x.hi - x.lo, s);
          },
          [s](const Mixture& m) {
            double acc = 0.0;
            for (const auto& c : m.components) acc += c.weight * mgf_deriv(c.dist, s);
            return acc;
          },
      },
      d.variant());
}

// ---------------------------------------------------------------------------
// Moments and distribution functions.

struct Moments {
  double mean;
  double variance;
};

inline Moments moments(const DistributionSpec& d) {
  return std::visit(
      detail::overloaded{
          [](const Exponential& x) { return Moments{1.0 / x.rate, 1.0 / (x.rate * x.rate)}; },
          [](const Deterministic& x) { return Moments{x.value, 0.0}; },
          [](const UniformInterval& x) {
            const double w = x.hi - x.lo;
            return Moments{0.5 * (x.lo + x.hi), w * w / 12.0};
          },
          [](const Erlang& x) { return Moments{x.shape / x.rate, x.shape / (x.rate * x.rate)}; },
          [](const TruncatedErlang& x) {
            const double w = x.hi - x.lo;
            return Moments{detail::segment_mean(x.shape, x.rate, x.lo, w),
                           detail::segment_variance(x.shape, x.rate, w)};
          },
          [](const Mixture& m) {
            double mean = 0.0;
            double second = 0.0;
            for (const auto& c : m.components) {
              const auto sub = moments(c.dist);
              mean += c.weight * sub.mean;
              second += c.weight * (sub.variance + sub.mean * sub.mean);
            }
            return Moments{mean, std::max(0.0, second - mean * mean)};
          },
      },
      d.variant());
}

inline double mean(const DistributionSpec& d) { return moments(d).mean; }
inline double variance(const DistributionSpec& d) { return moments(d).variance; }

/// P(X > x).
inline double ccdf(const DistributionSpec& d, double x) {
  return std::visit(
      detail::overloaded{
          [x](const Exponential& e) { return x < 0.0 ? 1.0 : std::exp(-e.rate * x); },
          [x](const Deterministic& e) { return x < e.value ? 1.0 : 0.0; },
          [x](const UniformInterval& e) {
            if (x <= e.lo) return 1.0;
            if (x >= e.hi) return 0.0;
            return (e.hi - x) / (e.hi - e.lo);
          },
          [x](const Erlang& e) { return detail::erlang_ccdf(e.shape, e.rate, x); },
          [x](const TruncatedErlang& e) {
            return 1.0 - detail::segment_cdf(e.shape, e.rate, e.hi - e.lo, x - e.lo);
          },
          [x](const Mixture& m) {
            double acc = 0.0;
            for (const auto& c : m.components) acc += c.weight * ccdf(c.dist, x);
            return std::min(1.0, acc);
          },
      },
      d.variant());
}

/// P(X <= x).
inline double cdf(const DistributionSpec& d, double x) {
  return std::visit(
      detail::overloaded{
          [x](const Exponential& e) { return x <= 0.0 ? 0.0 : -std::expm1(-e.rate * x); },
          [x](const Erlang& e) { return detail::erlang_cdf(e.shape, e.rate, x); },
          [x](const TruncatedErlang& e) {
            return detail::segment_cdf(e.shape, e.rate, e.hi - e.lo, x - e.lo);
          },
          [x](const Mixture& m) {
            double acc = 0.0;
            for (const auto& c : m.components) acc += c.weight * cdf(c.dist, x);
            return std::min(1.0, acc);
          },
          [&d, x](const auto&) { return 1.0 - ccdf(d, x); },
      },
      d.variant());
}

// ---------------------------------------------------------------------------
// Transforms.

/// Law of X * 1(X < y): the mass at or above y moves to an atom at 0.
inline DistributionSpec truncate_below(const DistributionSpec& d, double y) {
  detail::require(y > 0.0, "truncation level must be positive");
  if (y == kInf) return d;
  const auto zero = DistributionSpec::deterministic(0.0);
  std::vector<MixtureComponent> parts;
  for (const auto& leaf : flatten(d)) {
    const double w = leaf.weight;
    std::visit(
        detail::overloaded{
            [&](const Exponential& e) {
              const double below = -std::expm1(-e.rate * y);
              parts.push_back({w * below, DistributionSpec::truncated_erlang(1, e.rate, 0.0, y)});
              parts.push_back({w * std::exp(-e.rate * y), zero});
            },
            [&](const Erlang& e) {
              parts.push_back({w * detail::erlang_cdf(e.shape, e.rate, y),
                               DistributionSpec::truncated_erlang(e.shape, e.rate, 0.0, y)});
              parts.push_back({w * detail::erlang_ccdf(e.shape, e.rate, y), zero});
            },
            [&](const Deterministic& e) { parts.push_back({w, e.value < y ? leaf.dist : zero}); },
            [&](const UniformInterval& e) {
              if (y >= e.hi) {
                parts.push_back({w, leaf.dist});
              } else if (y <= e.lo) {
                parts.push_back({w, zero});
              } else {
                const double below = (y - e.lo) / (e.hi - e.lo);
                parts.push_back({w * below, DistributionSpec::uniform(e.lo, y)});
                parts.push_back({w * (1.0 - below), zero});
              }
            },
            [&](const TruncatedErlang& e) {
              if (y >= e.hi) {
                parts.push_back({w, leaf.dist});
              } else if (y <= e.lo) {
                parts.push_back({w, zero});
              } else {
                const double below = detail::segment_cdf(e.shape, e.rate, e.hi - e.lo, y - e.lo);
                parts.push_back(
                    {w * below, DistributionSpec::truncated_erlang(e.shape, e.rate, e.lo, y)});
                parts.push_back({w * (1.0 - below), zero});
              }
            },
            [&](const Mixture&) {},  // flatten() never yields mixtures
        },
        leaf.dist.variant());
  }
  std::erase_if(parts, [](const MixtureComponent& c) { return !(c.weight > 0.0); });
  return make_mixture(parts);
}

struct EndpointSplit {
  double q;    // P(B = x_B)
  double x_b;  // right endpoint, possibly +inf
  std::optional<DistributionSpec> lower;  // B | B < x_B, present iff 0 < q < 1
};

/// Structural atom detection: only Deterministic leaves located exactly at the
/// right endpoint contribute to q.
inline EndpointSplit split_endpoint_atom(const DistributionSpec& d) {
  const double x_b = upper_endpoint(d);
  double q = 0.0;
  std::vector<MixtureComponent> rest;
  for (const auto& leaf : flatten(d)) {
    const auto* det = std::get_if<Deterministic>(&leaf.dist.variant());
    if (det != nullptr && det->value == x_b) {
      q += leaf.weight;
    } else {
      rest.push_back(leaf);
    }
  }
  if (rest.empty()) return {1.0, x_b, std::nullopt};
  if (q == 0.0) return {0.0, x_b, std::nullopt};
  q = std::min(q, 1.0);
  return {q, x_b, make_mixture(rest)};
}

/// MGF of the class-1 inter-arrival time: a geometric(p) sum of A's.
inline double thinned_arrival_mgf(const DistributionSpec& arrival, double p, double s) {
  detail::require(p > 0.0 && p <= 1.0, "thinning probability must lie in (0, 1]");
  const double phi = mgf(arrival, s);
  const double denom = 1.0 - (1.0 - p) * phi;
  if (!(denom > 0.0)) {
    throw Error(Errc::out_of_domain, "geometric sum MGF diverges at s=" + std::to_string(s));
  }
  return p * phi / denom;
}

/// Exponentially tilted law: density proportional to e^{theta x} dF(x).
inline DistributionSpec tilt(const DistributionSpec& d, double theta) {
  detail::check_domain(d, theta);
  return std::visit(
      detail::overloaded{
          [&](const Exponential& e) { return DistributionSpec::exponential(e.rate - theta); },
          [&](const Deterministic&) { return d; },
          [&](const UniformInterval& e) {
            if (theta == 0.0) return d;
            return DistributionSpec::truncated_erlang(1, -theta, e.lo, e.hi);
          },
          [&](const Erlang& e) { return DistributionSpec::erlang(e.shape, e.rate - theta); },
          [&](const TruncatedErlang& e) {
            return DistributionSpec::truncated_erlang(e.shape, e.rate - theta, e.lo, e.hi);
          },
          [&](const Mixture& m) {
            const double log_total = log_mgf(d, theta);
            std::vector<MixtureComponent> parts;
            for (const auto& c : m.components) {
              const double w = std::exp(std::log(c.weight) + log_mgf(c.dist, theta) - log_total);
              if (w > 0.0) parts.push_back({w, tilt(c.dist, theta)});
            }
            return make_mixture(parts);
          },
      },
      d.variant());
}

/// Law of c * X for c > 0.
inline DistributionSpec scale(const DistributionSpec& d, double c) {
  detail::require(std::isfinite(c) && c > 0.0, "scale factor must be positive");
  return std::visit(
      detail::overloaded{
          [c](const Exponential& e) { return DistributionSpec::exponential(e.rate / c); },
          [c](const Deterministic& e) { return DistributionSpec::deterministic(e.value * c); },
          [c](const UniformInterval& e) { return DistributionSpec::uniform(e.lo * c, e.hi * c); },
          [c](const Erlang& e) { return DistributionSpec::erlang(e.shape, e.rate / c); },
          [c](const TruncatedErlang& e) {
            return DistributionSpec::truncated_erlang(e.shape, e.rate / c, e.lo * c, e.hi * c);
          },
          [c](const Mixture& m) {
            std::vector<MixtureComponent> parts;
            for (const auto& comp : m.components) parts.push_back({comp.weight, scale(comp.dist, c)});
            return DistributionSpec::mixture(std::move(parts));
          },
      },
      d.variant());
}

// ---------------------------------------------------------------------------
// Inverse of u -> Phi(-u).

inline constexpr double kInverseTolerance = 1e-12;

/// Unique u >= 0 with log Phi_d(-u) = log_v.
inline double inverse_log_mgf_neg(const DistributionSpec& d, double log_v) {
  if (std::isnan(log_v) || log_v > 1e-12) {
    throw Error(Errc::out_of_range, "inverse MGF target exceeds 1");
  }
  if (log_v >= 0.0) return 0.0;
  const double p0 = mass_at_zero(d);
  if (log_v <= std::log(p0)) {
    throw Error(Errc::out_of_range, "inverse MGF target at or below P(X=0)");
  }
  auto above = [&](double u) { return log_mgf(d, -u) > log_v; };
  const double hi = search::expand_upper(above, 1.0);
  return search::bisect(above, 0.0, hi, kInverseTolerance);
}

inline double inverse_mgf_neg(const DistributionSpec& d, double v) {
  if (!(v > 0.0)) throw Error(Errc::out_of_range, "inverse MGF target must be positive");
  return inverse_log_mgf_neg(d, std::log(v));
}

// ---------------------------------------------------------------------------
// Sampling.

inline double sample(const DistributionSpec& d, Rng& rng) {
  return std::visit(
      detail::overloaded{
          [&](const Exponential& e) { return -std::log(rng.uniform()) / e.rate; },
          [&](const Deterministic& e) { return e.value; },
          [&](const UniformInterval& e) { return e.lo + (e.hi - e.lo) * rng.uniform(); },
          [&](const Erlang& e) {
            double acc = 0.0;
            for (int i = 0; i < e.shape; ++i) acc -= std::log(rng.uniform());
            return acc / e.rate;
          },
          [&](const TruncatedErlang& e) {
            return e.lo + detail::sample_segment(e.shape, e.rate, e.hi - e.lo, rng.uniform(), rng);
          },
          [&](const Mixture& m) {
            const double u = rng.uniform();
            double acc = 0.0;
            for (const auto& c : m.components) {
              acc += c.weight;
              if (u < acc) return sample(c.dist, rng);
            }
            return sample(m.components.back().dist, rng);
          },
      },
      d.variant());
}

}  // namespace ldq
