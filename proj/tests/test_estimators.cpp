#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "ppest/error.hpp"
#include "ppest/estimators.hpp"

using namespace ppest;

namespace {

Sample pps_sample(const std::vector<std::pair<double, int>>& pi_y) {
  Sample s;
  s.design = Design::kPpsWr;
  for (const auto& [pi, y] : pi_y) {
    Draw d;
    d.pi = pi;
    d.label = static_cast<std::uint8_t>(y);
    s.draws.push_back(d);
  }
  return s;
}

}  // namespace

TEST_CASE("HH estimate by hand") {
  // z = y/pi = (10, 0, 20): total 10, variance (1/3) * 200/2.
  const Estimate e = hh_estimate(pps_sample({{0.1, 1}, {0.3, 0}, {0.05, 1}}));
  CHECK(e.total == doctest::Approx(10.0));
  CHECK(e.var() == doctest::Approx(100.0 / 3.0));
  CHECK(e.n == 3);
}

TEST_CASE("HH with one draw has no variance") {
  const Estimate e = hh_estimate(pps_sample({{0.5, 1}}));
  CHECK(e.total == doctest::Approx(2.0));
  CHECK_FALSE(e.has_variance());
  CHECK_THROWS_AS(e.se(), VarianceUndefinedError);
  CHECK_THROWS_AS(hh_estimate(testing::srs_sample(5, 1, 10)), ArgumentError);
  CHECK_THROWS_AS(hh_estimate(pps_sample({{0.0, 1}})), ArgumentError);
}

TEST_CASE("exact HH design variance by hand and by enumeration") {
  // pi = (0.4, 0.1) for the two positives, t = 2, n = 5: (2.5 + 10 - 4)/5.
  const Frame f = testing::frame_of({1, 1, 0, 0}, {0.4, 0.1, 0.3, 0.2});
  CHECK(exact_hh_design_variance(f, 5) == doctest::Approx(1.7));
  CHECK(exact_hh_design_variance(f, 5) ==
        doctest::Approx(oracle::hh_variance_by_enumeration({0.4, 0.1, 0.3, 0.2}, {1, 1, 0, 0}, 5)));
  CHECK_THROWS_AS(exact_hh_design_variance(f, 0), ArgumentError);
}

TEST_CASE("HH estimator and its variance estimator are unbiased over all ordered pairs") {
  const std::vector<double> p{0.05, 0.3, 0.2, 0.15, 0.1, 0.2};
  const std::vector<int> y{1, 0, 1, 1, 0, 0};
  const Frame f = testing::frame_of(y, p);
  double mean = 0.0, mean_v = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double prob = p[i] * p[j];
      const Estimate e = hh_estimate(pps_sample({{p[i], y[i]}, {p[j], y[j]}}));
      mean += prob * e.total;
      mean_v += prob * e.var();
    }
  }
  CHECK(mean == doctest::Approx(3.0));
  CHECK(mean_v == doctest::Approx(exact_hh_design_variance(f, 2)));
}

TEST_CASE("SRS expansion estimator is unbiased over every subset") {
  const std::vector<int> y{1, 0, 0, 1, 1, 0, 0, 0};
  const std::int64_t N = 8;
  const int n = 3;
  double mean = 0.0, mean_v = 0.0, mean_sq = 0.0;
  int subsets = 0;
  for (int a = 0; a < N; ++a) {
    for (int b = a + 1; b < N; ++b) {
      for (int c = b + 1; c < N; ++c) {
        Sample s = testing::srs_sample(3, 0, N);
        s.draws[0].label = y[a];
        s.draws[1].label = y[b];
        s.draws[2].label = y[c];
        const Estimate e = srs_estimate(s, N);
        mean += e.total;
        mean_sq += e.total * e.total;
        mean_v += e.var();
        ++subsets;
      }
    }
  }
  mean /= subsets;
  mean_v /= subsets;
  const double true_var = mean_sq / subsets - mean * mean;
  CHECK(subsets == 56);
  CHECK(mean == doctest::Approx(3.0));
  CHECK(mean_v == doctest::Approx(true_var));
  CHECK(true_var == doctest::Approx(N * N * (1.0 - double(n) / N) * oracle::binary_s2(8, 3) / n));
}

TEST_CASE("SRS estimator closed form") {
  const Estimate e = srs_estimate(testing::srs_sample(200, 99, 4964), 4964);
  CHECK(e.total == doctest::Approx(4964.0 * 99 / 200));
  CHECK(e.se() == doctest::Approx(oracle::srs_total_se(4964, 200, 99)));
  CHECK_THROWS_AS(srs_estimate(testing::srs_sample(10, 1, 20), 5), ArgumentError);
  Sample unlabeled = testing::srs_sample(3, 1, 10);
  unlabeled.draws[1].label.reset();
  CHECK_THROWS_AS(srs_estimate(unlabeled, 10), ArgumentError);
}

TEST_CASE("difference estimator") {
  // y = 0 and p_hat = 0.04 on all 100 draws: 5 + (100/100) * 100 * (-0.04).
  Sample s = testing::srs_sample(100, 0, 100, 0.04);
  const Estimate e = difference_estimate(s, 5.0, 100);
  CHECK(e.total == doctest::Approx(5.0 + 100 * (-0.04)));
  CHECK(e.var() == doctest::Approx(0.0));

  // Perfect proxy: p_hat equal to y makes the estimate exact.
  Sample perfect = testing::srs_sample(10, 4, 50);
  for (auto& d : perfect.draws) d.aux_prob = *d.label;
  const Estimate p = difference_estimate(perfect, 17.0, 50);
  CHECK(p.total == 17.0);
  CHECK(p.var() == 0.0);
}

TEST_CASE("stratified and census estimates add up") {
  std::vector<Estimate::Component> parts;
  parts.push_back({"one", srs_estimate(testing::srs_sample(200, 99, 4964), 4964)});
  parts.push_back({"flagged", census_estimate(1775, 1912)});
  const Estimate e = stratified_estimate(parts);
  CHECK(e.total == doctest::Approx(4964.0 * 99 / 200 + 1775));
  CHECK(e.var() == doctest::Approx(parts[0].estimate.var()));
  CHECK(e.N == 4964 + 1912);
  CHECK(e.n == 200 + 1912);
  CHECK(e.components.size() == 2);

  std::vector<Estimate::Component> dup{{"a", census_estimate(1, 2)}, {"a", census_estimate(1, 2)}};
  CHECK_THROWS_AS(stratified_estimate(dup), ArgumentError);

  std::vector<Estimate::Component> undefined{{"a", srs_estimate(testing::srs_sample(1, 1, 5), 5)},
                                             {"b", census_estimate(1, 2)}};
  CHECK_FALSE(stratified_estimate(undefined).has_variance());
}

TEST_CASE("interval, design effect and under-reporting") {
  Estimate e;
  e.total = 6051;
  e.variance = 548.0 * 548.0;
  const Interval ci = confidence_interval(e, 2.0);
  CHECK(ci.lo == doctest::Approx(4955));
  CHECK(ci.hi == doctest::Approx(7147));
  const UnderReporting u = under_reporting(e, 2695, 2.0);
  CHECK(u.point == doctest::Approx(3356));
  CHECK(u.lo == doctest::Approx(2260));
  CHECK(u.hi == doctest::Approx(4452));
  CHECK_FALSE(u.truncated);

  const UnderReporting all_confirmed = under_reporting(e, 8000, 2.0);
  CHECK(all_confirmed.lo == 0.0);
  CHECK(all_confirmed.hi == 0.0);
  CHECK(all_confirmed.truncated);
  CHECK(all_confirmed.point == doctest::Approx(6051 - 8000));

  CHECK(design_effect(e, 1096.0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(design_effect(1.0, 0.0), ArgumentError);
}

TEST_CASE("srs_se_for_total and equivalent_srs_n invert each other") {
  const std::int64_t N = 1463762;
  const double p = 6051.0 / N;
  const double Nd = static_cast<double>(N);
  CHECK(srs_se_for_total(N, p, 200) == doctest::Approx(Nd * std::sqrt((1 - 200 / Nd) * p * (1 - p) * Nd / (Nd - 1) / 200)));
  const std::int64_t n = equivalent_srs_n(N, p, 548.0);
  CHECK(srs_se_for_total(N, p, n) <= 548.0);
  CHECK(srs_se_for_total(N, p, n - 1) > 548.0);
  CHECK_THROWS_AS(srs_se_for_total(N, 0.0, 10), ArgumentError);
}

TEST_CASE("estimate records round trip") {
  testing::TempDir dir;
  std::vector<Estimate::Component> parts;
  parts.push_back({"one", srs_estimate(testing::srs_sample(200, 99, 4964), 4964)});
  parts.push_back({"flagged", census_estimate(1775, 1912)});
  const Estimate e = stratified_estimate(parts);
  const auto recs = make_records(e, 1.96, default_design_effect(e));
  REQUIRE(recs.size() == 3);
  CHECK(recs[1].estimator == "one/srs");
  CHECK(recs[2].estimator == "flagged/census");
  write_records(dir.file("r.csv"), recs, {{"command", "estimate"}});
  Metadata meta;
  const auto back = load_records(dir.file("r.csv"), &meta);
  REQUIRE(back.size() == 3);
  CHECK(back[0].total == recs[0].total);
  CHECK(back[0].se == recs[0].se);
  CHECK(back[0].deff == recs[0].deff);
  CHECK(meta.at(0).second == "estimate");
  const Estimate again = estimate_from_record(back[1]);
  CHECK(again.estimator == EstimatorKind::kSrs);
  CHECK(again.var() == doctest::Approx(parts[0].estimate.var()));

  const auto hh = make_records(hh_estimate(pps_sample({{0.5, 1}})), 1.96);
  CHECK_FALSE(hh[0].se.has_value());
  CHECK_FALSE(hh[0].ci_lo.has_value());
}
