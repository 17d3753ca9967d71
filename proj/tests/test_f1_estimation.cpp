#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "ppest/error.hpp"
#include "ppest/estimators.hpp"
#include "ppest/f1_estimation.hpp"

using namespace ppest;

TEST_CASE("F1 of counts") {
  CHECK(f1_of(50, 10, 70) == doctest::Approx(100.0 / 130.0));
  CHECK_THROWS_AS(f1_of(0, 0, 0), UndefinedMetricError);
  CHECK_THROWS_AS(f1_gradient(0, 0, 0), UndefinedMetricError);
}

TEST_CASE("analytic gradient matches central differences") {
  struct Point {
    double tp, fn, c;
  };
  for (const Point p : {Point{5139, 137, 8840}, Point{10, 3, 25}, Point{400, 900, 420}, Point{1, 0, 1}}) {
    const F1Gradient g = f1_gradient(p.tp, p.fn, p.c);
    const double h_tp = 1e-4 * std::max(1.0, p.tp);
    const double h_fn = 1e-4 * std::max(1.0, p.fn);
    const double fd_tp = oracle::derivative([&](double x) { return oracle::f1(x, p.fn, p.c); }, p.tp, h_tp);
    const double fd_fn = oracle::derivative([&](double x) { return oracle::f1(p.tp, x, p.c); }, p.fn, h_fn);
    CHECK(g.d_tp == doctest::Approx(fd_tp).epsilon(1e-6));
    CHECK(g.d_fn == doctest::Approx(fd_fn).epsilon(1e-6));
  }
}

TEST_CASE("delta_f1 input validation") {
  CHECK_THROWS_AS(delta_f1({-1, 0, 0, 0, 10}), ArgumentError);
  CHECK_THROWS_AS(delta_f1({1, -1, 0, 0, 10}), ArgumentError);
  CHECK_THROWS_AS(delta_f1({11, 0, 0, 0, 10}), ArgumentError);
  CHECK_THROWS_AS(delta_f1({0, 0, 0, 0, 0}), UndefinedMetricError);
  const F1Estimate zero_var = delta_f1({10, 0, 5, 0, 20});
  CHECK(zero_var.variance == 0.0);
  CHECK(zero_var.f1 == doctest::Approx(20.0 / 35.0));
}

TEST_CASE("two-stratum assembly") {
  const Estimate s1 = srs_estimate(testing::srs_sample(200, 104, 4964), 4964);
  const Estimate s0 = census_estimate(0, 1000);
  ConfusionCounts flagged;
  flagged.tp = 2558;
  flagged.fn = 137;
  const F1Estimate r = estimate_f1_two_stratum(s1, s0, flagged, 8840);
  const double tp = 2558 + 4964.0 * 104 / 200;
  CHECK(r.f1 == doctest::Approx(oracle::f1(tp, 137, 8840)));
  const double d = tp + 137 + 8840;
  const double g = 2 * (137 + 8840) / (d * d);
  CHECK(r.variance == doctest::Approx(g * g * s1.var()));
}

TEST_CASE("delta SE agrees with a parametric bootstrap") {
  struct Setup {
    double N1;
    int n1, k1;
    double N0;
    int n0, k0;
    double ftp, ffn, c;
  };
  for (const Setup s : {Setup{5000, 200, 100, 50000, 400, 20, 1000, 50, 7000},
                        Setup{2000, 300, 240, 20000, 300, 30, 300, 40, 2600}}) {
    const Estimate e1 = srs_estimate(testing::srs_sample(s.n1, s.k1, s.N1), s.N1);
    const Estimate e0 = srs_estimate(testing::srs_sample(s.n0, s.k0, s.N0), s.N0);
    ConfusionCounts flagged;
    flagged.tp = s.ftp;
    flagged.fn = s.ffn;
    const F1Estimate r = estimate_f1_two_stratum(e1, e0, flagged, static_cast<std::int64_t>(s.c));
    // The bootstrap resamples binomially (no finite-population correction), so
    // compare against the delta SE with the correction removed.
    const double fpc1 = 1 - s.n1 / s.N1, fpc0 = 1 - s.n0 / s.N0;
    const F1Gradient g = f1_gradient(flagged.tp + e1.total, flagged.fn + e0.total, s.c);
    const double se_nofpc =
        std::sqrt(g.d_tp * g.d_tp * e1.var() / fpc1 * (s.n1 - 1.0) / s.n1 +
                  g.d_fn * g.d_fn * e0.var() / fpc0 * (s.n0 - 1.0) / s.n0);
    const double boot = oracle::bootstrap_f1_sd(s.N1, s.n1, s.k1, s.N0, s.n0, s.k0, s.ftp, s.ffn, s.c, 40000, 77);
    CHECK(se_nofpc == doctest::Approx(boot).epsilon(0.10));
    CHECK(r.se() == doctest::Approx(se_nofpc).epsilon(0.10));
  }
}
