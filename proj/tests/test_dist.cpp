#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ldq/dist.hpp"
#include "ldq/json_io.hpp"
#include "ldq/special.hpp"

using namespace ldq;
using D = DistributionSpec;

namespace {

std::vector<D> all_variants() {
  return {
      D::exponential(1.5),
      D::deterministic(0.7),
      D::uniform(0.2, 1.3),
      D::erlang(3, 2.0),
      D::truncated_erlang(1, 2.0, 0.0, 1.0),
      D::truncated_erlang(3, -1.5, 0.5, 2.0),
      D::mixture({{0.3, D::exponential(4.0)}, {0.7, D::uniform(0.0, 0.5)}}),
      D::mixture({{0.5, D::uniform(0.0, 0.5)}, {0.5, D::deterministic(1.0)}}),
  };
}

/// In-domain evaluation points on both sides of zero.
std::vector<double> probe_points(const D& d, int count, std::uint64_t seed) {
  Rng rng(seed);
  const double s_max = mgf_abscissa(d).s_max;
  const double hi = std::isfinite(s_max) ? 0.9 * s_max : 3.0;
  std::vector<double> s;
  for (int i = 0; i < count; ++i) s.push_back(-3.0 + (hi + 3.0) * rng.uniform());
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Examples

TEST(Mgf, Examples) {
  EXPECT_EQ(mgf(D::exponential(1.0), 0.0), 1.0);
  EXPECT_NEAR(mgf(D::exponential(1.0), 0.5), 2.0, 1e-15);
  EXPECT_NEAR(mgf(D::deterministic(1.0), 1.2564), std::exp(1.2564), 1e-14);
  EXPECT_NEAR(mgf(D::erlang(3, 2.0), 0.5), std::pow(2.0 / 1.5, 3), 1e-14);
}

TEST(Mgf, OutOfDomainAtAbscissa) {
  try {
    mgf(D::exponential(1.0), 1.0);
    FAIL() << "expected OutOfDomain";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::out_of_domain);
  }
  EXPECT_THROW(mgf_deriv(D::exponential(1.0), 1.5), Error);
}

TEST(MgfDeriv, Examples) {
  EXPECT_NEAR(mgf_deriv(D::exponential(1.0), 0.0), 1.0, 1e-15);
  EXPECT_NEAR(mgf_deriv(D::exponential(1.0), 0.5), 4.0, 1e-14);
  EXPECT_NEAR(mgf_deriv(D::deterministic(2.0), 0.3), 2.0 * std::exp(0.6), 1e-14);
}

TEST(MgfAbscissa, Examples) {
  EXPECT_EQ(mgf_abscissa(D::exponential(3.0)).s_max, 3.0);
  EXPECT_EQ(mgf_abscissa(D::deterministic(1.0)).s_max, kInf);
  EXPECT_EQ(
      mgf_abscissa(D::mixture({{0.5, D::exponential(4.0)}, {0.5, D::exponential(2.0)}})).s_max,
      2.0);
  for (const auto& d : all_variants()) EXPECT_GT(mgf_abscissa(d).s_max, 0.0);
}

TEST(InverseMgfNeg, Examples) {
  EXPECT_EQ(inverse_mgf_neg(D::exponential(0.5), 1.0), 0.0);
  EXPECT_NEAR(inverse_mgf_neg(D::exponential(0.5), 0.5), 0.5, 1e-11);
  EXPECT_NEAR(inverse_mgf_neg(D::deterministic(2.0), std::exp(-2.0)), 1.0, 1e-11);
}

TEST(InverseMgfNeg, RangeErrors) {
  const auto with_zero = D::mixture({{0.3, D::deterministic(0.0)}, {0.7, D::exponential(1.0)}});
  for (double v : {1.5, 0.3, 0.2, 0.0}) {
    try {
      inverse_mgf_neg(v == 0.3 || v == 0.2 ? with_zero : D::exponential(1.0), v);
      FAIL() << "expected OutOfRange for v=" << v;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::out_of_range);
    }
  }
  const double u = inverse_mgf_neg(with_zero, 0.31);
  EXPECT_NEAR(mgf(with_zero, -u), 0.31, 1e-12);
}

TEST(Moments, Examples) {
  const auto m = moments(D::exponential(2.0));
  EXPECT_DOUBLE_EQ(m.mean, 0.5);
  EXPECT_DOUBLE_EQ(m.variance, 0.25);
  EXPECT_EQ(moments(D::deterministic(1.0)).mean, 1.0);
  EXPECT_EQ(moments(D::deterministic(1.0)).variance, 0.0);
  EXPECT_DOUBLE_EQ(
      mean(D::mixture({{0.5, D::uniform(0.0, 0.5)}, {0.5, D::deterministic(1.0)}})), 0.625);
}

TEST(Moments, AgreeWithMgfDerivatives) {
  for (const auto& d : all_variants()) {
    const double h = 1e-4;
    const double m1 = mgf_deriv(d, 0.0);
    const double m2 = (mgf_deriv(d, h) - mgf_deriv(d, -h)) / (2 * h);
    EXPECT_NEAR(mean(d), m1, 1e-12);
    EXPECT_NEAR(variance(d), m2 - m1 * m1, 1e-6);
  }
}

TEST(TruncateBelow, Examples) {
  EXPECT_EQ(truncate_below(D::exponential(1.0), kInf), D::exponential(1.0));
  EXPECT_EQ(truncate_below(D::deterministic(1.0), 2.0), D::deterministic(1.0));
  EXPECT_NEAR(mean(truncate_below(D::exponential(1.0), 1.0)), 0.26424111765711533, 1e-15);
  EXPECT_EQ(truncate_below(D::deterministic(1.0), 1.0), D::deterministic(0.0));
}

TEST(TruncateBelow, ExponentialClosedForm) {
  const double rate = 1.3, y = 0.8;
  const auto by = truncate_below(D::exponential(rate), y);
  for (double s : {-2.0, 0.4, 1.0, 2.5, 7.0}) {
    const double expected =
        (1.0 - std::exp(-(rate - s) * y)) * rate / (rate - s) + std::exp(-rate * y);
    EXPECT_NEAR(mgf(by, s), expected, 1e-13 * expected);
  }
  // Removable singularity at s = rate: limit rate * y + e^{-rate y}.
  const double limit = rate * y + std::exp(-rate * y);
  EXPECT_NEAR(mgf(by, rate), limit, 1e-14);
  EXPECT_NEAR(mgf(by, rate + 1e-10), limit, 1e-9);
  EXPECT_NEAR(mgf(by, rate - 1e-10), limit, 1e-9);
}

TEST(TruncateBelow, MassOneAndMonotoneInY) {
  for (const auto& d : all_variants()) {
    const double top = std::isfinite(upper_endpoint(d)) ? upper_endpoint(d) : 30.0;
    double prev = 0.0;
    for (int i = 1; i <= 40; ++i) {
      const double y = top * i / 40.0;
      const auto by = truncate_below(d, y);
      EXPECT_NEAR(mgf(by, 0.0), 1.0, 1e-14);
      const double s = std::min(1.0, 0.5 * mgf_abscissa(d).s_max);
      const double phi = mgf(by, s);
      EXPECT_GE(phi, prev - 1e-14);
      EXPECT_LE(phi, mgf(d, s) + 1e-12);
      prev = phi;
    }
    const double s = std::min(1.0, 0.5 * mgf_abscissa(d).s_max);
    const double y_end = std::isfinite(upper_endpoint(d)) ? std::nextafter(upper_endpoint(d), kInf)
                                                          : 60.0;
    EXPECT_NEAR(mgf(truncate_below(d, y_end), s), mgf(d, s), 1e-10);
  }
}

TEST(SplitEndpointAtom, Examples) {
  const auto mixed = D::mixture({{0.5, D::uniform(0.0, 0.5)}, {0.5, D::deterministic(1.0)}});
  const auto s = split_endpoint_atom(mixed);
  EXPECT_EQ(s.q, 0.5);
  EXPECT_EQ(s.x_b, 1.0);
  ASSERT_TRUE(s.lower.has_value());
  EXPECT_EQ(*s.lower, D::uniform(0.0, 0.5));

  const auto e = split_endpoint_atom(D::exponential(1.0));
  EXPECT_EQ(e.q, 0.0);
  EXPECT_EQ(e.x_b, kInf);
  EXPECT_FALSE(e.lower.has_value());

  const auto d = split_endpoint_atom(D::deterministic(1.0));
  EXPECT_EQ(d.q, 1.0);
  EXPECT_EQ(d.x_b, 1.0);
  EXPECT_FALSE(d.lower.has_value());
}

TEST(SplitEndpointAtom, StructuralOnly) {
  // A continuous part reaching the endpoint contributes no atom.
  const auto b = D::mixture({{0.25, D::uniform(0.0, 1.0)},
                             {0.5, D::deterministic(1.0)},
                             {0.25, D::deterministic(1.0)}});
  EXPECT_EQ(split_endpoint_atom(b).q, 0.75);
  EXPECT_EQ(split_endpoint_atom(D::uniform(0.0, 1.0)).q, 0.0);
}

TEST(SplitEndpointAtom, RemixReproducesMgf) {
  const auto b = D::mixture({{0.2, D::uniform(0.0, 0.5)},
                             {0.3, D::erlang(2, 5.0)},
                             {0.1, D::deterministic(0.4)},
                             {0.4, D::deterministic(3.0)}});
  // Erlang is unbounded, so no atom sits at the endpoint.
  EXPECT_EQ(split_endpoint_atom(b).q, 0.0);

  const auto bounded = D::mixture({{0.2, D::uniform(0.0, 0.5)},
                                   {0.3, D::truncated_erlang(2, 5.0, 0.0, 2.0)},
                                   {0.1, D::deterministic(0.4)},
                                   {0.4, D::deterministic(3.0)}});
  const auto s = split_endpoint_atom(bounded);
  ASSERT_NEAR(s.q, 0.4, 1e-15);
  const auto remix = make_mixture({{s.q, D::deterministic(s.x_b)}, {1.0 - s.q, *s.lower}});
  for (int i = 0; i < 10; ++i) {
    const double x = -2.0 + 0.5 * i;
    EXPECT_NEAR(mgf(remix, x), mgf(bounded, x), 1e-10 * mgf(bounded, x));
  }
}

TEST(ThinnedArrivalMgf, Examples) {
  EXPECT_NEAR(thinned_arrival_mgf(D::deterministic(1.0), 0.5, -1.0), 0.2253996735605641, 1e-15);
  const auto a = D::uniform(0.5, 2.0);
  EXPECT_DOUBLE_EQ(thinned_arrival_mgf(a, 1.0, -0.7), mgf(a, -0.7));
}

TEST(ThinnedArrivalMgf, PoissonThinningIsPoisson) {
  const double lambda = 1.7, p = 0.35;
  for (int i = 0; i < 10; ++i) {
    const double s = -3.0 + 0.35 * i;
    EXPECT_NEAR(thinned_arrival_mgf(D::exponential(lambda), p, s),
                mgf(D::exponential(p * lambda), s), 1e-12);
  }
}

TEST(ThinnedArrivalMgf, DivergenceIsOutOfDomain) {
  try {
    thinned_arrival_mgf(D::deterministic(1.0), 0.5, 1.0);  // 0.5 e > 1
    FAIL() << "expected OutOfDomain";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::out_of_domain);
  }
}

TEST(Sample, Deterministic) {
  Rng rng(7);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sample(D::deterministic(1.0), rng), 1.0);
}

TEST(Sample, ExponentialMean) {
  Rng rng(11);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sample(D::exponential(2.0), rng);
  EXPECT_NEAR(sum / n, 0.5, 0.002);
}

TEST(Sample, SameSeedSameStream) {
  for (const auto& d : all_variants()) {
    Rng r1(42, 3), r2(42, 3), r3(42, 4);
    bool differs = false;
    for (int i = 0; i < 1000; ++i) {
      const double x = sample(d, r1);
      EXPECT_EQ(x, sample(d, r2));
      if (x != sample(d, r3)) differs = true;
    }
    if (!std::holds_alternative<Deterministic>(d.variant())) {
      EXPECT_TRUE(differs);
    }
  }
}

// ---------------------------------------------------------------------------
// Properties

TEST(MgfProperties, JensenAndStrictConvexity) {
  for (const auto& d : all_variants()) {
    const bool degenerate = std::holds_alternative<Deterministic>(d.variant());
    for (double s : probe_points(d, 3, 5)) {
      EXPECT_GE(mgf(d, s), std::exp(s * mean(d)) * (1.0 - 1e-14));
      const double h = 1e-3;
      const double second = mgf(d, s + h) - 2.0 * mgf(d, s) + mgf(d, s - h);
      if (!degenerate) {
        EXPECT_GT(second, 0.0) << "s=" << s;
      }
    }
  }
}

TEST(MgfProperties, DerivativeMatchesFiniteDifferences) {
  for (const auto& d : all_variants()) {
    for (double s : probe_points(d, 20, 9)) {
      const double h = 1e-5 * std::max(1.0, std::abs(s));
      const double fd = (mgf(d, s + h) - mgf(d, s - h)) / (2.0 * h);
      const double exact = mgf_deriv(d, s);
      EXPECT_NEAR(fd, exact, 1e-6 * std::abs(exact) + 1e-12) << "s=" << s;
    }
  }
}

TEST(MgfProperties, InverseRoundTrip) {
  // Laws without an atom at zero, so Phi(-u) stays strictly decreasing in u.
  for (const auto& d : all_variants()) {
    ASSERT_EQ(mass_at_zero(d), 0.0);
    for (int i = 0; i <= 50; ++i) {
      const double u = i;
      EXPECT_NEAR(inverse_log_mgf_neg(d, log_mgf(d, -u)), u, 1e-10) << "u=" << u;
    }
  }
}

TEST(MgfProperties, TiltAndScale) {
  for (const auto& d : all_variants()) {
    const double theta = std::isfinite(mgf_abscissa(d).s_max) ? 0.4 * mgf_abscissa(d).s_max : 1.3;
    const auto t = tilt(d, theta);
    const auto c = scale(d, 2.5);
    for (double s : probe_points(d, 5, 13)) {
      if (s + theta < mgf_abscissa(d).s_max) {
        EXPECT_NEAR(log_mgf(t, s), log_mgf(d, s + theta) - log_mgf(d, theta), 1e-11);
      }
      EXPECT_NEAR(log_mgf(c, s / 2.5), log_mgf(d, s), 1e-11);
    }
    EXPECT_NEAR(mean(t), mgf_deriv(d, theta) / mgf(d, theta), 1e-11);
  }
}

TEST(Special, ErlangKernelClosedForms) {
  for (double z : {-700.0, -50.0, -3.0, -1.0, -0.3, -1e-9, 0.0, 1e-9, 0.3, 1.0, 3.0, 20.0, 800.0}) {
    const double k1 = z == 0.0 ? 1.0 : -std::expm1(-z) / z;
    const double k2 = z == 0.0 ? 0.5 : (std::abs(z) < 1e-6 ? 0.5 - z / 3.0
                                                            : (1.0 - std::exp(-z) * (1.0 + z)) / (z * z));
    EXPECT_NEAR(special::log_erlang_kernel(1, z), std::log(k1), 1e-12) << z;
    if (std::abs(z) < 100) {
      EXPECT_NEAR(special::log_erlang_kernel(2, z), std::log(k2), 1e-10) << z;
    }
  }
}

TEST(Sample, KolmogorovSmirnov) {
  const std::vector<D> continuous = {
      D::exponential(1.5),
      D::uniform(0.2, 1.3),
      D::erlang(3, 2.0),
      D::truncated_erlang(1, 2.0, 0.0, 1.0),
      D::truncated_erlang(1, -3.0, 0.0, 1.0),
      D::truncated_erlang(3, -1.5, 0.5, 2.0),
      D::mixture({{0.3, D::exponential(4.0)}, {0.7, D::uniform(0.0, 0.5)}}),
      tilt(D::uniform(0.0, 2.0), 1.7),
  };
  const int n = 100000;
  for (std::size_t k = 0; k < continuous.size(); ++k) {
    const auto& d = continuous[k];
    Rng rng(1234, k);
    std::vector<double> xs(n);
    for (auto& x : xs) x = sample(d, rng);
    std::sort(xs.begin(), xs.end());
    double dist = 0.0;
    for (int i = 0; i < n; ++i) {
      const double f = cdf(d, xs[i]);
      dist = std::max({dist, std::abs(f - (i + 1.0) / n), std::abs(f - static_cast<double>(i) / n)});
    }
    EXPECT_LE(dist, 1.95 / std::sqrt(n)) << "variant " << k;
  }
  // Atom frequencies for the mixed law.
  const auto mixed = D::mixture({{0.5, D::uniform(0.0, 0.5)}, {0.5, D::deterministic(1.0)}});
  Rng rng(99);
  int atoms = 0;
  for (int i = 0; i < n; ++i) atoms += sample(mixed, rng) == 1.0;
  EXPECT_NEAR(atoms / static_cast<double>(n), 0.5, 1.95 / std::sqrt(n));
}

TEST(Cdf, ComplementsAndEndpoints) {
  for (const auto& d : all_variants()) {
    for (double x : {0.0, 0.3, 0.9, 1.7, 4.0}) EXPECT_NEAR(cdf(d, x) + ccdf(d, x), 1.0, 1e-14);
    EXPECT_EQ(cdf(d, -1.0), 0.0);
  }
  EXPECT_NEAR(cdf(D::erlang(2, 1.0), 1.0), 1.0 - 2.0 * std::exp(-1.0), 1e-15);
  EXPECT_EQ(upper_endpoint(D::uniform(0.2, 1.3)), 1.3);
  EXPECT_EQ(lower_endpoint(D::uniform(0.2, 1.3)), 0.2);
  EXPECT_EQ(upper_endpoint(D::erlang(2, 1.0)), kInf);
  EXPECT_EQ(mass_at_zero(truncate_below(D::exponential(1.0), 1.0)), std::exp(-1.0));
}

TEST(Validation, RejectsBadParameters) {
  auto expect_invalid = [](auto&& make) {
    try {
      make();
      FAIL() << "expected InvalidArgument";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::invalid_argument);
    }
  };
  expect_invalid([] { D::exponential(0.0); });
  expect_invalid([] { D::exponential(-1.0); });
  expect_invalid([] { D::deterministic(-0.1); });
  expect_invalid([] { D::uniform(1.0, 1.0); });
  expect_invalid([] { D::uniform(-1.0, 1.0); });
  expect_invalid([] { D::erlang(0, 1.0); });
  expect_invalid([] { D::mixture({}); });
  expect_invalid([] { D::mixture({{0.5, D::exponential(1.0)}, {0.4, D::exponential(2.0)}}); });
  expect_invalid([] { D::mixture({{1.5, D::exponential(1.0)}, {-0.5, D::exponential(2.0)}}); });
  expect_invalid([] { truncate_below(D::exponential(1.0), 0.0); });
}

TEST(Json, RoundTripIsLossless) {
  for (const auto& d : all_variants()) {
    const auto text = to_json(d).dump();
    const auto back = dist_from_json(json::parse(text));
    EXPECT_EQ(back, d) << text;
  }
  const auto weird = D::mixture({{0.1, D::exponential(1.0 / 3.0)}, {0.9, D::uniform(0.1, 0.7)}});
  EXPECT_EQ(dist_from_json(json::parse(to_json(weird).dump())), weird);
}

TEST(Json, SchemaErrors) {
  EXPECT_THROW(dist_from_json(json::parse(R"({"type":"gamma","rate":1})")), Error);
  EXPECT_THROW(dist_from_json(json::parse(R"({"type":"exponential"})")), Error);
  EXPECT_THROW(dist_from_json(json::parse(R"({"type":"erlang","shape":1.5,"rate":1})")), Error);
  EXPECT_THROW(dist_from_json(json::parse(R"({"type":"exponential","rate":"fast"})")), Error);
}
