#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ldq/json_io.hpp"
#include "ldq/ratecalc.hpp"
#include "ldq/simqueue.hpp"
#include "ldq/tailest.hpp"

using namespace ldq;
using D = DistributionSpec;

namespace {

const QueueModel kMM1(D::exponential(0.5), D::exponential(1.0));

std::vector<double> exp_draws(double rate, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> xs(n);
  for (auto& x : xs) x = sample(D::exponential(rate), rng);
  return xs;
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::overflow;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tail fitting

TEST(FitDecay, ExponentialSample) {
  const auto fit = fit_decay(exp_draws(2.0, 100000, 1));
  EXPECT_NEAR(fit.rate, 2.0, 0.05 * 2.0);
  EXPECT_GT(fit.std_error, 0.0);
  EXPECT_LT(fit.x_lo, fit.x_hi);
  EXPECT_GE(fit.points, 500);
  EXPECT_FALSE(fit.ci.has_value());
}

TEST(FitDecay, CalibratedAcrossSeeds) {
  double sum = 0.0, sq = 0.0;
  const int seeds = 20;
  for (int k = 0; k < seeds; ++k) {
    const double e = fit_decay(exp_draws(2.0, 100000, 100 + k)).rate / 2.0 - 1.0;
    sum += e;
    sq += e * e;
  }
  EXPECT_LT(std::abs(sum / seeds), 0.02);
  EXPECT_LT(std::sqrt(sq / seeds), 0.05);
}

TEST(FitDecay, DegenerateInputs) {
  EXPECT_EQ(code_of([] { fit_decay(std::vector<double>(10000, 1.0)); }), Errc::degenerate_tail);
  EXPECT_EQ(code_of([] { fit_decay(exp_draws(1.0, 4999, 2)); }), Errc::degenerate_tail);
  std::vector<double> few(20000, 0.0);
  for (int i = 0; i < 20000; ++i) few[i] = i % 7;
  EXPECT_EQ(code_of([&] { fit_decay(few); }), Errc::degenerate_tail);
}

TEST(FitDecay, ScaleEquivariance) {
  const auto xs = exp_draws(1.3, 100000, 3);
  const auto base = fit_decay(xs);
  for (double c : {2.0, 3.0, 0.37}) {
    auto scaled = xs;
    for (auto& x : scaled) x *= c;
    const auto fit = fit_decay(scaled);
    EXPECT_NEAR(fit.rate, base.rate / c, 1e-9 * base.rate / c);
    EXPECT_NEAR(fit.std_error, base.std_error / c, 1e-9 * base.std_error / c);
    EXPECT_EQ(fit.points, base.points);
  }
}

TEST(FitDecay, BootstrapInterval) {
  FitWindow cfg;
  cfg.bootstrap = 200;
  cfg.seed = 5;
  const auto fit = fit_decay(exp_draws(2.0, 100000, 4), cfg);
  ASSERT_TRUE(fit.ci.has_value());
  EXPECT_LT(fit.ci->first, fit.rate);
  EXPECT_GT(fit.ci->second, fit.rate);
  EXPECT_LT(fit.ci->first, 2.0);
  EXPECT_GT(fit.ci->second, 2.0);
  const auto again = fit_decay(exp_draws(2.0, 100000, 4), cfg);
  EXPECT_EQ(again.ci, fit.ci);
}

TEST(FitDecay, FifoWaitingMatchesGammaW) {
  const auto out = run(kMM1, Discipline::fifo, 1000000, 21);
  std::vector<double> waits;
  for (const auto& r : out.records) waits.push_back(r.delay());
  const auto cmp = compare_rates(gamma_w(kMM1), fit_decay(waits), 0.10);
  EXPECT_TRUE(cmp.pass) << "fitted " << cmp.fitted;
}

TEST(FitDecay, BatchMeansErrorExceedsNaiveError) {
  const auto out = run(kMM1, Discipline::fifo, 1000000, 22);
  std::vector<double> waits;
  for (const auto& r : out.records) waits.push_back(r.delay());
  FitWindow cfg;
  cfg.min_points = 100;
  const double batch = batch_means_std_error(waits, 10, cfg);
  EXPECT_GT(batch, fit_decay(waits).std_error);
  EXPECT_THROW(batch_means_std_error(waits, 1, cfg), Error);
}

TEST(FitDecay, Class2SojournDecaysLikeWaiting) {
  const QueueModel m(D::exponential(1.0),
                     ClassSplit{0.5, D::uniform(0.0, 0.5), D::deterministic(1.0)});
  const auto out = run(m, Discipline::prio_pr, 2000000, 23);
  std::vector<double> wait, soj;
  for (const auto& r : out.records) {
    if (r.cls != 2) continue;
    wait.push_back(r.delay());
    soj.push_back(r.sojourn());
  }
  FitWindow cfg;
  cfg.min_points = 100;
  const double fw = fit_decay(wait, cfg).rate;
  const double fs = fit_decay(soj, cfg).rate;
  const double se = std::hypot(batch_means_std_error(wait, 10, cfg), batch_means_std_error(soj, 10, cfg));
  EXPECT_LE(std::abs(fw - fs), 1.96 * se) << fw << " vs " << fs;
  EXPECT_NEAR(fw, gamma_w2(m).rate, 0.15 * gamma_w2(m).rate);
}

// ---------------------------------------------------------------------------
// Importance sampling

TEST(WorkloadTilt, MeasureProperties) {
  const auto tm = workload_tilt(kMM1);
  EXPECT_NEAR(tm.nu, 0.5, 1e-9);
  EXPECT_NEAR(log_mgf(kMM1.arrival(), -tm.nu) + log_mgf(kMM1.service(), tm.nu), 0.0, 1e-11);
  EXPECT_GT(mean(tm.service) - mean(tm.arrival), 0.0);
  EXPECT_NEAR(tm.psi_nu, tm.nu, 1e-9);
}

TEST(WorkloadTilt, UnavailableWithoutDelays) {
  const QueueModel dd(D::deterministic(2.0), D::deterministic(1.0));
  EXPECT_EQ(code_of([&] { workload_tilt(dd); }), Errc::tilt_unavailable);
  EXPECT_EQ(code_of([&] { is_workload_tail(dd, 1.0, 10, 1); }), Errc::tilt_unavailable);
}

TEST(IsWorkloadTail, MM1Examples) {
  const auto far = is_workload_tail(kMM1, 20.0, 10000, 1);
  const double exact = 0.5 * std::exp(-10.0);
  EXPECT_NEAR(far.estimate, exact, 0.05 * exact);
  EXPECT_LT(far.rel_std_error, 0.05);

  const auto zero = is_workload_tail(kMM1, 0.0, 10000, 2);
  EXPECT_NEAR(zero.estimate, 0.5, 3.0 * zero.std_error);
}

TEST(IsWorkloadTail, DeterministicInSeed) {
  const auto a = is_workload_tail(kMM1, 5.0, 500, 7);
  const auto b = is_workload_tail(kMM1, 5.0, 500, 7);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(IsWorkloadTail, DecreasingInLevel) {
  const auto near = is_workload_tail(kMM1, 5.0, 5000, 3);
  const auto far = is_workload_tail(kMM1, 25.0, 5000, 4);
  EXPECT_LT(far.estimate + 1.96 * far.std_error, near.estimate - 1.96 * near.std_error);
}

TEST(IsWorkloadTail, AgreesWithDirectSimulation) {
  const QueueModel m(D::uniform(0.5, 1.5), D::erlang(2, 2.5));
  const double x = 3.0;
  const auto in = generate_input(m, 2000000, 31);
  const auto w = lindley_workload(in.interarrival, in.service);
  // Batch means of the exceedance frequency.
  const int batches = 20;
  const std::size_t size = w.size() / batches;
  std::vector<double> freq;
  for (int b = 0; b < batches; ++b) {
    const auto begin = w.begin() + static_cast<std::ptrdiff_t>(b * size);
    freq.push_back(static_cast<double>(std::count_if(begin, begin + static_cast<std::ptrdiff_t>(size),
                                                     [&](double v) { return v > x; })) /
                   static_cast<double>(size));
  }
  double fm = 0.0, fs = 0.0;
  for (double f : freq) fm += f;
  fm /= batches;
  for (double f : freq) fs += (f - fm) * (f - fm);
  const double fse = std::sqrt(fs / (batches - 1) / batches);
  ASSERT_GT(fm, 1e-3);

  const auto is = is_workload_tail(m, x, 20000, 32);
  EXPECT_LE(std::abs(is.estimate - fm), 1.96 * std::hypot(is.std_error, fse))
      << is.estimate << " vs " << fm;
}

// ---------------------------------------------------------------------------
// Rate comparison and output

TEST(CompareRates, Examples) {
  const TailFit good{0.52, 0.02, 1.0, 10.0, 600, std::nullopt};
  const auto a = compare_rates(0.5, good, 0.10);
  EXPECT_NEAR(a.rel_error, 0.04, 1e-12);
  EXPECT_NEAR(a.z, 1.0, 1e-12);
  EXPECT_TRUE(a.pass);

  const TailFit bad{0.12, 0.01, 1.0, 10.0, 600, std::nullopt};
  const auto b = compare_rates(0.0858, bad, 0.15);
  EXPECT_FALSE(b.pass);
  EXPECT_NEAR(b.rel_error, (0.12 - 0.0858) / 0.0858, 1e-12);

  EXPECT_FALSE(compare_rates(0.5, good, 0.0).pass);
  const TailFit exact{0.5, 0.01, 1.0, 10.0, 600, std::nullopt};
  EXPECT_TRUE(compare_rates(0.5, exact, 0.0).pass);
}

TEST(Json, TailFitAndComparison) {
  const TailFit fit{0.52, 0.02, 1.5, 10.0, 600, std::make_pair(0.48, 0.56)};
  const auto j = to_json(fit);
  EXPECT_EQ(j["rate"], 0.52);
  EXPECT_EQ(j["stderr"], 0.02);
  EXPECT_EQ(j["window"], json::array({1.5, 10.0}));
  EXPECT_EQ(j["points"], 600);
  EXPECT_EQ(j["ci"], json::array({0.48, 0.56}));
  EXPECT_TRUE(to_json(TailFit{1.0, 0.1, 0.0, 1.0, 500, std::nullopt})["ci"].is_null());

  const auto c = to_json(compare_rates(0.5, fit, 0.1));
  EXPECT_EQ(c["pass"], true);
  EXPECT_EQ(c["tolerance"], 0.1);
}
