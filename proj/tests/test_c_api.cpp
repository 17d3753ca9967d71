// Exercises the shared library through the C header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>

#include <unistd.h>

#include "ppest/ppest.h"

namespace {

std::string temp_path(const char* name) {
  return std::string(P_tmpdir) + "/ppest_capi_" + std::to_string(::getpid()) + "_" + name;
}

}  // namespace

TEST_CASE("status names and last error") {
  CHECK(std::string(ppest_status_name(PPEST_OK)) == "ok");
  CHECK(std::string(ppest_status_name(PPEST_E_VARIANCE_UNDEFINED)) == "variance_undefined");
  CHECK(std::string(ppest_status_name(PPEST_E_INTERNAL)) == "internal");
  ppest_frame* f = nullptr;
  CHECK(ppest_frame_load("/nonexistent/frame.csv", nullptr, nullptr, nullptr, &f, nullptr) == PPEST_E_IO);
  CHECK(f == nullptr);
  CHECK(std::string(ppest_last_error()).find("nonexistent") != std::string::npos);
  CHECK(ppest_frame_info_get(nullptr, nullptr) == PPEST_E_ARGUMENT);
}

TEST_CASE("frame, sample and estimate through handles") {
  const ppest_profile prof{2.0, 0.15, 0.025, 2.0};
  ppest_frame* frame = nullptr;
  REQUIRE(ppest_frame_synthesize(20000, 100, &prof, 5, &frame) == PPEST_OK);
  ppest_frame_info info{};
  REQUIRE(ppest_frame_info_get(frame, &info) == PPEST_OK);
  CHECK(info.size == 20000);
  CHECK(info.fully_labeled == 1);
  CHECK(info.true_total == 100);

  const char* id = nullptr;
  int label = 0;
  double p = 0;
  REQUIRE(ppest_frame_unit(frame, 0, &id, &label, &p) == PPEST_OK);
  CHECK(std::string(id) == "u0000001");
  CHECK(ppest_frame_unit(frame, 20000, &id, &label, &p) == PPEST_E_ARGUMENT);

  ppest_sample* s = nullptr;
  REQUIRE(ppest_sample_pps(frame, 300, 9, &s) == PPEST_OK);
  ppest_estimate* e = nullptr;
  REQUIRE(ppest_estimate_hh(s, &e) == PPEST_OK);
  ppest_estimate_info ei{};
  REQUIRE(ppest_estimate_info_get(e, &ei) == PPEST_OK);
  CHECK(ei.estimator == PPEST_EST_HH);
  CHECK(ei.has_variance == 1);
  CHECK(ei.n == 300);
  double se = 0;
  REQUIRE(ppest_estimate_se(e, &se) == PPEST_OK);
  CHECK(se == doctest::Approx(std::sqrt(ei.variance)));

  // SRS estimation of a PPS sample is rejected.
  ppest_estimate* bad = nullptr;
  CHECK(ppest_estimate_srs(s, 20000, &bad) == PPEST_E_ARGUMENT);

  const std::string path = temp_path("sample.csv");
  ppest_meta* meta = nullptr;
  REQUIRE(ppest_meta_create(&meta) == PPEST_OK);
  REQUIRE(ppest_meta_set(meta, "seed", "9") == PPEST_OK);
  REQUIRE(ppest_sample_write(path.c_str(), s, frame, meta) == PPEST_OK);
  ppest_sample* back = nullptr;
  ppest_meta* back_meta = nullptr;
  REQUIRE(ppest_sample_load(path.c_str(), &back, &back_meta) == PPEST_OK);
  const char* seed = nullptr;
  REQUIRE(ppest_meta_get(back_meta, "seed", &seed) == PPEST_OK);
  CHECK(std::string(seed) == "9");
  ppest_estimate* e2 = nullptr;
  REQUIRE(ppest_estimate_hh(back, &e2) == PPEST_OK);
  ppest_estimate_info ei2{};
  ppest_estimate_info_get(e2, &ei2);
  CHECK(ei2.total == ei.total);
  CHECK(ei2.variance == ei.variance);
  std::remove(path.c_str());

  ppest_estimate_free(e2);
  ppest_sample_free(back);
  ppest_meta_free(back_meta);
  ppest_meta_free(meta);
  ppest_estimate_free(e);
  ppest_sample_free(s);
  ppest_frame_free(frame);
}

TEST_CASE("stratification, allocation and stratified estimates") {
  const ppest_profile prof{2.0, 0.15, 0.025, 2.0};
  ppest_frame* frame = nullptr;
  REQUIRE(ppest_frame_synthesize(10000, 80, &prof, 3, &frame) == PPEST_OK);
  ppest_strata* strata = nullptr;
  REQUIRE(ppest_stratify(frame, 0.5, &strata) == PPEST_OK);
  REQUIRE(ppest_strata_count(strata) == 2);
  size_t sizes[2] = {0, 0};
  REQUIRE(ppest_allocate(strata, 200, PPEST_ALLOC_NEYMAN_ORACLE, sizes, 2) == PPEST_OK);
  CHECK(sizes[0] + sizes[1] == 200);
  CHECK(ppest_allocate(strata, 200, PPEST_ALLOC_EQUAL, sizes, 1) == PPEST_E_ARGUMENT);

  ppest_estimate* parts[2] = {nullptr, nullptr};
  const char* ids[2] = {nullptr, nullptr};
  for (size_t i = 0; i < 2; ++i) {
    ppest_frame* sub = nullptr;
    REQUIRE(ppest_strata_frame(strata, i, &sub) == PPEST_OK);
    REQUIRE(sub != nullptr);
    REQUIRE(ppest_strata_at(strata, i, &ids[i], nullptr) == PPEST_OK);
    ppest_sample* s = nullptr;
    REQUIRE(ppest_sample_srs(sub, sizes[i], 10 + i, &s) == PPEST_OK);
    ppest_frame_info fi{};
    ppest_frame_info_get(sub, &fi);
    REQUIRE(ppest_estimate_difference(s, fi.aux_total, static_cast<int64_t>(fi.size), &parts[i]) == PPEST_OK);
    ppest_sample_free(s);
    ppest_frame_free(sub);
  }
  ppest_estimate* total = nullptr;
  const ppest_estimate* const cparts[2] = {parts[0], parts[1]};
  REQUIRE(ppest_estimate_stratified(ids, cparts, 2, &total) == PPEST_OK);
  ppest_estimate_info ti{};
  ppest_estimate_info_get(total, &ti);
  CHECK(ti.components == 2);
  const ppest_estimate* c0 = nullptr;
  const char* c0_id = nullptr;
  REQUIRE(ppest_estimate_component(total, 0, &c0_id, &c0) == PPEST_OK);
  ppest_estimate_info ci0{}, p0{};
  ppest_estimate_info_get(c0, &ci0);
  ppest_estimate_info_get(parts[0], &p0);
  CHECK(ci0.total == p0.total);
  CHECK(std::string(c0_id) == ids[0]);

  const std::string path = temp_path("records.csv");
  REQUIRE(ppest_records_write(path.c_str(), total, 1.96, nullptr, nullptr) == PPEST_OK);
  ppest_records* recs = nullptr;
  REQUIRE(ppest_records_load(path.c_str(), &recs, nullptr) == PPEST_OK);
  CHECK(ppest_records_count(recs) == 3);
  ppest_record r{};
  REQUIRE(ppest_records_at(recs, 0, &r) == PPEST_OK);
  CHECK(std::string(r.estimator) == "strat");
  CHECK(r.total == ti.total);
  CHECK(r.has_deff == 1);
  ppest_records_free(recs);
  std::remove(path.c_str());

  const char* dup_ids[2] = {"a", "a"};
  ppest_estimate* dup = nullptr;
  CHECK(ppest_estimate_stratified(dup_ids, cparts, 2, &dup) == PPEST_E_ARGUMENT);

  ppest_estimate_free(total);
  ppest_estimate_free(parts[0]);
  ppest_estimate_free(parts[1]);
  ppest_strata_free(strata);
  ppest_frame_free(frame);
}

TEST_CASE("closed forms and F1 via the C API") {
  double se = 0;
  REQUIRE(ppest_srs_se_for_total(1463762, 6051.0 / 1463762, 200, &se) == PPEST_OK);
  CHECK(se == doctest::Approx(6640.6).epsilon(1e-4));
  int64_t n = 0;
  REQUIRE(ppest_equivalent_srs_n(1463762, 6051.0 / 1463762, 548, &n) == PPEST_OK);
  CHECK(n > 27000);
  double deff = 0;
  REQUIRE(ppest_design_effect(548, se, &deff) == PPEST_OK);
  CHECK(deff == doctest::Approx(0.00681).epsilon(0.01));

  ppest_f1_inputs in{5139, 29662, 137, 0, 8840};
  ppest_f1_result out{};
  REQUIRE(ppest_delta_f1(&in, &out) == PPEST_OK);
  CHECK(out.f1 == doctest::Approx(0.728).epsilon(0.001));
  CHECK(out.se == doctest::Approx(std::sqrt(out.variance)));
  in.c = 0;
  CHECK(ppest_delta_f1(&in, &out) == PPEST_E_ARGUMENT);

  ppest_estimate* one = nullptr;
  REQUIRE(ppest_estimate_census(10, 10, &one) == PPEST_OK);
  ppest_under_reporting u{};
  REQUIRE(ppest_under_reporting_get(one, 20, 2.0, &u) == PPEST_OK);
  CHECK(u.truncated == 1);
  CHECK(u.hi == 0.0);
  ppest_estimate_free(one);

  double h = 0;
  REQUIRE(ppest_hypergeometric_zero_probability(100, 0, 10, &h) == PPEST_OK);
  CHECK(h == 1.0);
}

TEST_CASE("simulation through the C API") {
  const ppest_profile prof{2.0, 0.15, 0.025, 2.0};
  ppest_frame* frame = nullptr;
  REQUIRE(ppest_frame_synthesize(5000, 50, &prof, 1, &frame) == PPEST_OK);
  ppest_sim_config cfg{};
  ppest_sim_config_default(&cfg);
  CHECK(cfg.n == 500);
  CHECK(cfg.R == 10000);
  cfg.n = 100;
  cfg.R = 200;
  cfg.seed = 4;
  cfg.estimator = PPEST_SIM_STRAT_SRS;
  ppest_sim_report* rep = nullptr;
  REQUIRE(ppest_simulate(frame, &cfg, &rep) == PPEST_OK);
  cfg.estimator = PPEST_SIM_EST_SRS;
  ppest_sim_report* srs = nullptr;
  REQUIRE(ppest_simulate(frame, &cfg, &srs) == PPEST_OK);
  REQUIRE(ppest_sim_attach_baseline(rep, srs) == PPEST_OK);
  ppest_sim_summary s{};
  REQUIRE(ppest_sim_summary_get(rep, &s) == PPEST_OK);
  CHECK(s.stratified == 1);
  CHECK(s.n_one + s.n_zero == 100);
  CHECK(s.has_deff == 1);
  const double* est = nullptr;
  const double* zero = nullptr;
  size_t count = 0;
  REQUIRE(ppest_sim_estimates(rep, &est, &zero, &count) == PPEST_OK);
  CHECK(count == 200);
  CHECK(zero != nullptr);
  CHECK(ppest_sim_write_histogram(temp_path("h.csv").c_str(), srs, 1, nullptr) == PPEST_E_ARGUMENT);

  ppest_sim_estimator e{};
  CHECK(ppest_parse_sim_estimator("strat-diff", &e) == PPEST_OK);
  CHECK(e == PPEST_SIM_STRAT_DIFF);
  CHECK(ppest_parse_sim_estimator("nope", &e) == PPEST_E_CONFIG);

  ppest_bimodality b{};
  REQUIRE(ppest_zero_stratum_bimodality(frame, 0.5, 100, PPEST_ALLOC_NEYMAN_ORACLE, 500, 3, 2, &b) == PPEST_OK);
  CHECK(b.R == 500);
  CHECK(b.n0 + s.n_one == 100);

  ppest_sim_report_free(srs);
  ppest_sim_report_free(rep);
  ppest_frame_free(frame);
}
