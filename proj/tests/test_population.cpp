#include <doctest.h>

#include "helpers.hpp"
#include "ppest/error.hpp"
#include "ppest/population.hpp"

using namespace ppest;

TEST_CASE("clamp_aux keeps predictions inside the open interval") {
  CHECK(clamp_aux(0.0) == kAuxFloor);
  CHECK(clamp_aux(1.0) == kAuxCeil);
  CHECK(clamp_aux(0.25) == 0.25);
  CHECK(clamp_aux(clamp_aux(0.0)) == clamp_aux(0.0));
}

TEST_CASE("frame aggregates") {
  const Frame f = testing::frame_of({1, 0, 1, 0}, {0.9, 0.1, 0.0, 1.0});
  CHECK(f.size() == 4);
  CHECK(f.fully_labeled());
  CHECK(*f.true_total() == 2);
  CHECK(f.aux_total() == doctest::Approx(0.9 + 0.1 + kAuxFloor + kAuxCeil));

  const Frame partial = testing::frame_of({1, -1, 0}, {0.5, 0.5, 0.5});
  CHECK_FALSE(partial.fully_labeled());
  CHECK_FALSE(partial.true_total().has_value());
  CHECK(partial.labeled_positives() == 1);
}

TEST_CASE("frame rejects bad input") {
  CHECK_THROWS_AS(Frame(std::vector<Unit>{}), ArgumentError);
  Unit u;
  u.id = "a";
  u.label = 2;
  CHECK_THROWS_AS(Frame({u}), ArgumentError);
}

TEST_CASE("stratify_by_prediction sends ties to the positive stratum") {
  const Frame f = testing::frame_of({1, 0, 0, 1, 0}, {0.5, 0.49, 0.8, 0.1, 0.2});
  const StratifiedFrame s = stratify_by_prediction(f, 0.5);
  REQUIRE(s.strata().size() == 2);
  CHECK(s.stratum(kStratumOne).size() == 2);
  CHECK(s.stratum(kStratumZero).size() == 3);
  CHECK(s.stratum(kStratumOne).parent_index == std::vector<std::size_t>{0, 2});
  CHECK(s.stratum(kStratumOne).size() + s.stratum(kStratumZero).size() == f.size());
  CHECK_THROWS_AS(s.stratum("other"), ArgumentError);
  CHECK_THROWS_AS(stratify_by_prediction(f, 0.0), ArgumentError);
  CHECK_THROWS_AS(stratify_by_prediction(f, 1.0), ArgumentError);
}

TEST_CASE("an empty stratum is present with size 0") {
  const Frame f = testing::frame_of({0, 0}, {0.1, 0.2});
  const StratifiedFrame s = stratify_by_prediction(f, 0.5);
  CHECK(s.stratum(kStratumOne).size() == 0);
  CHECK_FALSE(s.stratum(kStratumOne).frame.has_value());
  CHECK(s.stratum(kStratumZero).frame->size() == 2);
}

TEST_CASE("frame CSV round trip keeps every value bit for bit") {
  testing::TempDir dir;
  const Frame f = testing::frame_of({1, 0, -1}, {0.1234567890123456789, 1.0 / 3.0, 0.999});
  write_frame(dir.file("f.csv"), f, {{"seed", "7"}});
  Metadata meta;
  const Frame g = load_frame(dir.file("f.csv"), {}, &meta);
  REQUIRE(g.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(g[i].id == f[i].id);
    CHECK(g[i].aux_prob == f[i].aux_prob);
    CHECK(g[i].label == f[i].label);
  }
  REQUIRE(meta.size() == 1);
  CHECK(meta[0].first == "seed");
  CHECK(meta[0].second == "7");
}

TEST_CASE("load_frame reports the offending line") {
  testing::TempDir dir;
  const auto expect_error = [&](const std::string& body, const std::string& fragment) {
    testing::spit(dir.file("bad.csv"), body);
    try {
      load_frame(dir.file("bad.csv"));
      FAIL("expected an ingestion error");
    } catch (const IngestionError& e) {
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };
  expect_error("id,label,p_hat\na,1,0.5\na,0,0.5\n", ":3: duplicate id");
  expect_error("id,label,p_hat\na,1,1.5\n", ":2: p_hat");
  expect_error("id,label,p_hat\na,1,abc\n", ":2: p_hat");
  expect_error("id,label,p_hat\na,7,0.5\n", ":2: label");
  expect_error("id,label,p_hat\n,1,0.5\n", ":2: missing id");
  expect_error("id,label\na,1\n", "missing column 'p_hat'");
  expect_error("id,label,p_hat\n", "no units");
  CHECK_THROWS_AS(load_frame(dir.file("missing.csv")), IoError);
}

TEST_CASE("load_frame honours a custom schema and skips comments") {
  testing::TempDir dir;
  testing::spit(dir.file("f.csv"), "# note\nkey,score,truth\n\"k,1\",0.7,1\nk2,0.2,\n");
  FrameSchema schema{"key", "truth", "score"};
  const Frame f = load_frame(dir.file("f.csv"), schema);
  REQUIRE(f.size() == 2);
  CHECK(f[0].id == "k,1");
  CHECK(f[0].label == std::optional<std::uint8_t>(1));
  CHECK_FALSE(f[1].label.has_value());
}
