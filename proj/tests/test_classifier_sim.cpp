#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "ppest/classifier_sim.hpp"
#include "ppest/error.hpp"

using namespace ppest;

TEST_CASE("beta_variate follows the Beta CDF") {
  // Empirical CDF at a few points against numeric integration of the density.
  struct Shape {
    double a, b;
  };
  for (const Shape s : {Shape{2.0, 5.0}, Shape{1.0, 1.0}, Shape{3.5, 1.2}}) {
    Rng rng = make_rng(99, static_cast<std::uint64_t>(s.a * 10));
    const int draws = 40000;
    std::vector<double> v(draws);
    for (auto& x : v) x = beta_variate(s.a, s.b, rng);
    for (double x : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const double empirical =
          static_cast<double>(std::count_if(v.begin(), v.end(), [&](double y) { return y <= x; })) / draws;
      CHECK(std::abs(empirical - oracle::beta_cdf(x, s.a, s.b)) < 0.012);
    }
  }
}

TEST_CASE("beta_variate with tiny shapes stays finite and near the mean") {
  Rng rng = make_rng(5);
  double sum = 0.0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) {
    const double x = beta_variate(0.05, 0.2, rng);
    REQUIRE(std::isfinite(x));
    REQUIRE(x >= 0.0);
    REQUIRE(x <= 1.0);
    sum += x;
  }
  CHECK(sum / draws == doctest::Approx(0.05 / 0.25).epsilon(0.03));
}

TEST_CASE("profile validation and the sharpness family") {
  CHECK_THROWS_AS((QualityProfile{0.0, 1, 1, 1}.validate()), ArgumentError);
  CHECK_THROWS_AS((QualityProfile{1, -1, 1, 1}.validate()), ArgumentError);
  CHECK_THROWS_AS((QualityProfile{1, 1, NAN, 1}.validate()), ArgumentError);
  const QualityProfile s = QualityProfile{}.sharpened(4.0);
  CHECK(s == QualityProfile{4.0, 0.25, 0.25, 4.0});
  const QualityProfile base{2.0, 0.15, 0.025, 2.0};
  CHECK(base.sharpened(1.0) == base);
  CHECK(base.sharpened(2.0) == QualityProfile{4.0, 0.075, 0.0125, 4.0});
}

TEST_CASE("simulate_predictions keeps labels and is seed deterministic") {
  const Frame f = synthesize_frame(500, 40, QualityProfile{}, 3);
  CHECK(f.size() == 500);
  CHECK(*f.true_total() == 40);
  const Frame a = simulate_predictions(f, QualityProfile{}.sharpened(3), 11);
  const Frame b = simulate_predictions(f, QualityProfile{}.sharpened(3), 11);
  const Frame c = simulate_predictions(f, QualityProfile{}.sharpened(3), 12);
  bool differs = false;
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(a[i].label == f[i].label);
    CHECK(a[i].id == f[i].id);
    CHECK(a[i].aux_prob == b[i].aux_prob);
    CHECK(a[i].aux_prob >= kAuxFloor);
    CHECK(a[i].aux_prob <= kAuxCeil);
    differs = differs || a[i].aux_prob != c[i].aux_prob;
  }
  CHECK(differs);
  CHECK(f[0].id == "u0000001");
}

TEST_CASE("population loss and confusion counts by hand") {
  const Frame f = testing::frame_of({1, 0, 1, 0}, {0.8, 0.1, 0.4, 0.6});
  CHECK(population_loss(f) ==
        doctest::Approx(-std::log(0.8) - std::log(0.9) - std::log(0.4) - std::log(0.4)));
  const ConfusionCounts c = confusion_counts(f, 0.5);
  CHECK(c.tp == 1);
  CHECK(c.fn == 1);
  CHECK(c.fp == 1);
  CHECK(c.tn == 1);
  CHECK(f1_from_counts(c) == doctest::Approx(0.5));
  CHECK_THROWS_AS(f1_from_counts(ConfusionCounts{0, 0, 0, 10}), UndefinedMetricError);

  const Frame two = testing::frame_of({1, 0}, {0.8, 0.1});
  CHECK(population_loss(two) == doctest::Approx(0.3285).epsilon(1e-3));
}

TEST_CASE("calibration hits an F1 target within 2%") {
  const Frame f = synthesize_frame(20000, 400, QualityProfile{}, 8);
  const CalibrationResult r = calibrate_profile(f, {CalibrationTarget::Kind::kF1, 0.9, 0.5}, 21);
  CHECK(r.sharpness >= 1.0);
  CHECK(std::abs(r.realized - 0.9) <= 0.02 * 0.9);
  const Frame g = simulate_predictions(f, r.profile, 21);
  CHECK(f1_from_counts(confusion_counts(g, 0.5)) == doctest::Approx(r.realized));
}

TEST_CASE("calibration on mean loss and unreachable targets") {
  const Frame f = synthesize_frame(5000, 100, QualityProfile{}, 8);
  const CalibrationResult r = calibrate_profile(f, {CalibrationTarget::Kind::kMeanLoss, 0.05, 0.5}, 2);
  CHECK(std::abs(r.realized - 0.05) <= 0.02 * 0.05);
  CHECK_THROWS_AS(calibrate_profile(f, {CalibrationTarget::Kind::kMeanLoss, 5.0, 0.5}, 2), CalibrationError);
  CHECK_THROWS_AS(calibrate_profile(f, {CalibrationTarget::Kind::kMeanLoss, -1.0, 0.5}, 2), ArgumentError);
}

TEST_CASE("profile file round trip") {
  testing::TempDir dir;
  const QualityProfile p{2.0, 0.15, 1.0 / 3.0, 7.5};
  write_profile(dir.file("p.txt"), p, 42);
  std::optional<std::uint64_t> seed;
  CHECK(load_profile(dir.file("p.txt"), &seed) == p);
  CHECK(seed == std::optional<std::uint64_t>(42));
  testing::spit(dir.file("bad.txt"), "a1=1\nb1=x\n");
  CHECK_THROWS(load_profile(dir.file("bad.txt")));
}
