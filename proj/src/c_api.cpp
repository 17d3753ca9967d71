#include "ppest/ppest.h"

#include <memory>
#include <new>
#include <string>
#include <vector>

#include "ppest/classifier_sim.hpp"
#include "ppest/designs.hpp"
#include "ppest/error.hpp"
#include "ppest/estimators.hpp"
#include "ppest/f1_estimation.hpp"
#include "ppest/montecarlo.hpp"
#include "ppest/population.hpp"

using namespace ppest;

struct ppest_meta {
  Metadata pairs;
};

struct ppest_frame {
  Frame frame;
};

struct ppest_strata {
  StratifiedFrame strata;
};

struct ppest_sample {
  Sample sample;
  std::vector<std::string> unit_ids;
};

struct ppest_estimate {
  Estimate e;
  std::vector<std::unique_ptr<ppest_estimate>> parts;
};

struct ppest_records {
  std::vector<EstimateRecord> rows;
};

struct ppest_sim_report {
  SimReport report;
};

namespace {

thread_local std::string g_last_error;

ppest_status fail(ppest_status s, const char* what) {
  g_last_error = what;
  return s;
}

template <typename Fn>
ppest_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PPEST_OK;
  } catch (const Error& e) {
    return fail(static_cast<ppest_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(PPEST_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PPEST_E_INTERNAL, e.what());
  } catch (...) {
    return fail(PPEST_E_INTERNAL, "unknown failure");
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) throw ArgumentError(std::string("null argument: ") + name);
}

const Metadata& meta_of(const ppest_meta* m) {
  static const Metadata empty;
  return m ? m->pairs : empty;
}

void hand_out_meta(Metadata meta, ppest_meta** meta_out) {
  if (meta_out) *meta_out = new ppest_meta{std::move(meta)};
}

QualityProfile to_profile(const ppest_profile& p) { return {p.a1, p.b1, p.a0, p.b0}; }
ppest_profile from_profile(const QualityProfile& p) { return {p.a1, p.b1, p.a0, p.b0}; }

std::unique_ptr<ppest_estimate> wrap(Estimate e) {
  auto h = std::make_unique<ppest_estimate>();
  for (const auto& c : e.components) h->parts.push_back(wrap(c.estimate));
  h->e = std::move(e);
  return h;
}

std::vector<std::string> ids_for(const Sample& s, const Frame& f) {
  std::vector<std::string> ids;
  ids.reserve(s.n());
  for (const auto& d : s.draws) ids.push_back(f[d.unit].id);
  return ids;
}

AllocationRule to_rule(ppest_allocation_rule r) {
  switch (r) {
    case PPEST_ALLOC_NEYMAN_ORACLE: return AllocationRule::kNeymanOracle;
    case PPEST_ALLOC_NEYMAN_PROXY: return AllocationRule::kNeymanProxy;
    case PPEST_ALLOC_PROPORTIONAL: return AllocationRule::kProportional;
    case PPEST_ALLOC_EQUAL: return AllocationRule::kEqual;
  }
  throw ArgumentError("unknown allocation rule");
}

SimEstimator to_sim_estimator(ppest_sim_estimator e) {
  switch (e) {
    case PPEST_SIM_HH: return SimEstimator::kHh;
    case PPEST_SIM_EST_SRS: return SimEstimator::kSrs;
    case PPEST_SIM_DIFF: return SimEstimator::kDiff;
    case PPEST_SIM_STRAT_SRS: return SimEstimator::kStratSrs;
    case PPEST_SIM_STRAT_DIFF: return SimEstimator::kStratDiff;
  }
  throw ArgumentError("unknown simulation estimator");
}

}  // namespace

extern "C" {

const char* ppest_last_error(void) { return g_last_error.c_str(); }

const char* ppest_status_name(ppest_status status) {
  if (status == PPEST_OK) return "ok";
  if (status == PPEST_E_INTERNAL) return "internal";
  if (status >= PPEST_E_ARGUMENT && status <= PPEST_E_VARIANCE_UNDEFINED) {
    return error_code_name(static_cast<ErrorCode>(status));
  }
  return "unknown";
}

ppest_status ppest_meta_create(ppest_meta** out) {
  return guarded([&] {
    require(out, "out");
    *out = new ppest_meta{};
  });
}

void ppest_meta_free(ppest_meta* meta) { delete meta; }

ppest_status ppest_meta_set(ppest_meta* meta, const char* key, const char* value) {
  return guarded([&] {
    require(meta, "meta");
    require(key, "key");
    require(value, "value");
    for (auto& [k, v] : meta->pairs) {
      if (k == key) {
        v = value;
        return;
      }
    }
    meta->pairs.emplace_back(key, value);
  });
}

size_t ppest_meta_count(const ppest_meta* meta) { return meta ? meta->pairs.size() : 0; }

ppest_status ppest_meta_at(const ppest_meta* meta, size_t i, const char** key, const char** value) {
  return guarded([&] {
    require(meta, "meta");
    if (i >= meta->pairs.size()) throw ArgumentError("metadata index out of range");
    if (key) *key = meta->pairs[i].first.c_str();
    if (value) *value = meta->pairs[i].second.c_str();
  });
}

ppest_status ppest_meta_get(const ppest_meta* meta, const char* key, const char** value) {
  return guarded([&] {
    require(meta, "meta");
    require(key, "key");
    require(value, "value");
    *value = nullptr;
    for (const auto& [k, v] : meta->pairs) {
      if (k == key) *value = v.c_str();
    }
  });
}

ppest_status ppest_frame_load(const char* path, const char* id_col, const char* label_col, const char* aux_col,
                              ppest_frame** out, ppest_meta** meta_out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    FrameSchema schema;
    if (id_col) schema.id_column = id_col;
    if (label_col) schema.label_column = label_col;
    if (aux_col) schema.aux_column = aux_col;
    Metadata meta;
    auto h = std::make_unique<ppest_frame>(ppest_frame{load_frame(path, schema, &meta)});
    hand_out_meta(std::move(meta), meta_out);
    *out = h.release();
  });
}

ppest_status ppest_frame_write(const char* path, const ppest_frame* frame, const ppest_meta* meta) {
  return guarded([&] {
    require(path, "path");
    require(frame, "frame");
    write_frame(path, frame->frame, meta_of(meta));
  });
}

ppest_status ppest_frame_synthesize(size_t N, size_t positives, const ppest_profile* profile, uint64_t seed,
                                    ppest_frame** out) {
  return guarded([&] {
    require(profile, "profile");
    require(out, "out");
    *out = new ppest_frame{synthesize_frame(N, positives, to_profile(*profile), seed)};
  });
}

ppest_status ppest_frame_simulate_predictions(const ppest_frame* frame, const ppest_profile* profile, uint64_t seed,
                                              ppest_frame** out) {
  return guarded([&] {
    require(frame, "frame");
    require(profile, "profile");
    require(out, "out");
    *out = new ppest_frame{simulate_predictions(frame->frame, to_profile(*profile), seed)};
  });
}

ppest_status ppest_frame_info_get(const ppest_frame* frame, ppest_frame_info* out) {
  return guarded([&] {
    require(frame, "frame");
    require(out, "out");
    const Frame& f = frame->frame;
    out->size = f.size();
    out->aux_total = f.aux_total();
    out->fully_labeled = f.fully_labeled() ? 1 : 0;
    out->true_total = f.true_total().value_or(0);
    out->labeled_positives = f.labeled_positives();
  });
}

ppest_status ppest_frame_unit(const ppest_frame* frame, size_t i, const char** id, int* label, double* aux_prob) {
  return guarded([&] {
    require(frame, "frame");
    if (i >= frame->frame.size()) throw ArgumentError("unit index out of range");
    const Unit& u = frame->frame[i];
    if (id) *id = u.id.c_str();
    if (label) *label = u.label ? *u.label : -1;
    if (aux_prob) *aux_prob = u.aux_prob;
  });
}

void ppest_frame_free(ppest_frame* frame) { delete frame; }

ppest_status ppest_population_loss(const ppest_frame* frame, double* total) {
  return guarded([&] {
    require(frame, "frame");
    require(total, "total");
    *total = population_loss(frame->frame);
  });
}

ppest_status ppest_confusion_counts(const ppest_frame* frame, double tau, ppest_confusion* out) {
  return guarded([&] {
    require(frame, "frame");
    require(out, "out");
    const ConfusionCounts c = confusion_counts(frame->frame, tau);
    *out = {c.tp, c.fp, c.fn, c.tn};
  });
}

ppest_status ppest_f1_from_counts(const ppest_confusion* counts, double* f1) {
  return guarded([&] {
    require(counts, "counts");
    require(f1, "f1");
    *f1 = f1_from_counts({counts->tp, counts->fp, counts->fn, counts->tn});
  });
}

ppest_status ppest_calibrate(const ppest_frame* frame, ppest_target_kind kind, double value, double tau,
                             uint64_t seed, const ppest_profile* base, ppest_calibration* out) {
  return guarded([&] {
    require(frame, "frame");
    require(out, "out");
    CalibrationTarget target;
    target.kind = kind == PPEST_TARGET_F1 ? CalibrationTarget::Kind::kF1 : CalibrationTarget::Kind::kMeanLoss;
    target.value = value;
    target.tau = tau;
    const CalibrationResult r = calibrate_profile(frame->frame, target, seed, base ? to_profile(*base) : QualityProfile{});
    *out = {from_profile(r.profile), r.sharpness, r.realized, r.steps};
  });
}

ppest_status ppest_profile_write(const char* path, const ppest_profile* profile, uint64_t seed) {
  return guarded([&] {
    require(path, "path");
    require(profile, "profile");
    write_profile(path, to_profile(*profile), seed);
  });
}

ppest_status ppest_profile_load(const char* path, ppest_profile* out, int* has_seed, uint64_t* seed) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    std::optional<std::uint64_t> s;
    *out = from_profile(load_profile(path, &s));
    if (has_seed) *has_seed = s ? 1 : 0;
    if (seed) *seed = s.value_or(0);
  });
}

ppest_status ppest_parse_allocation_rule(const char* name, ppest_allocation_rule* out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = static_cast<ppest_allocation_rule>(parse_allocation_rule(name));
  });
}

const char* ppest_allocation_rule_name(ppest_allocation_rule rule) {
  try {
    return allocation_rule_name(to_rule(rule));
  } catch (...) {
    return "unknown";
  }
}

ppest_status ppest_stratify(const ppest_frame* frame, double tau, ppest_strata** out) {
  return guarded([&] {
    require(frame, "frame");
    require(out, "out");
    *out = new ppest_strata{stratify_by_prediction(frame->frame, tau)};
  });
}

size_t ppest_strata_count(const ppest_strata* strata) { return strata ? strata->strata.strata().size() : 0; }

ppest_status ppest_strata_at(const ppest_strata* strata, size_t i, const char** id, size_t* size) {
  return guarded([&] {
    require(strata, "strata");
    if (i >= strata->strata.strata().size()) throw ArgumentError("stratum index out of range");
    const auto& s = strata->strata.strata()[i];
    if (id) *id = s.id.c_str();
    if (size) *size = s.size();
  });
}

ppest_status ppest_strata_frame(const ppest_strata* strata, size_t i, ppest_frame** out) {
  return guarded([&] {
    require(strata, "strata");
    require(out, "out");
    if (i >= strata->strata.strata().size()) throw ArgumentError("stratum index out of range");
    const auto& s = strata->strata.strata()[i];
    *out = s.frame ? new ppest_frame{*s.frame} : nullptr;
  });
}

ppest_status ppest_allocate(const ppest_strata* strata, size_t n, ppest_allocation_rule rule, size_t* sizes,
                            size_t capacity) {
  return guarded([&] {
    require(strata, "strata");
    require(sizes, "sizes");
    const auto& all = strata->strata.strata();
    if (capacity < all.size()) throw ArgumentError("allocation output buffer too small");
    const AllocationPlan plan = allocate(strata->strata, n, to_rule(rule));
    for (size_t k = 0; k < all.size(); ++k) sizes[k] = plan.size_of(all[k].id);
  });
}

void ppest_strata_free(ppest_strata* strata) { delete strata; }

ppest_status ppest_sample_srs(const ppest_frame* frame, size_t n, uint64_t seed, ppest_sample** out) {
  return guarded([&] {
    require(frame, "frame");
    require(out, "out");
    Sample s = srs_wor(frame->frame, n, seed);
    auto ids = ids_for(s, frame->frame);
    *out = new ppest_sample{std::move(s), std::move(ids)};
  });
}

ppest_status ppest_sample_pps(const ppest_frame* frame, size_t n, uint64_t seed, ppest_sample** out) {
  return guarded([&] {
    require(frame, "frame");
    require(out, "out");
    Sample s = pps_wr(frame->frame, n, seed);
    auto ids = ids_for(s, frame->frame);
    *out = new ppest_sample{std::move(s), std::move(ids)};
  });
}

ppest_status ppest_sample_write(const char* path, const ppest_sample* sample, const ppest_frame* frame,
                                const ppest_meta* meta) {
  return guarded([&] {
    require(path, "path");
    require(sample, "sample");
    require(frame, "frame");
    write_sample(path, sample->sample, frame->frame, meta_of(meta));
  });
}

ppest_status ppest_sample_load(const char* path, ppest_sample** out, ppest_meta** meta_out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    LoadedSample loaded = load_sample(path);
    auto h = std::make_unique<ppest_sample>(ppest_sample{std::move(loaded.sample), std::move(loaded.unit_ids)});
    hand_out_meta(std::move(loaded.meta), meta_out);
    *out = h.release();
  });
}

ppest_status ppest_sample_info_get(const ppest_sample* sample, ppest_sample_info* out) {
  return guarded([&] {
    require(sample, "sample");
    require(out, "out");
    const Sample& s = sample->sample;
    out->design = s.design == Design::kPpsWr ? PPEST_DESIGN_PPS_WR : PPEST_DESIGN_SRS_WOR;
    out->n = s.n();
    out->parent_N = s.parent_N;
    out->parent_aux_total = s.parent_aux_total;
  });
}

ppest_status ppest_sample_draw(const ppest_sample* sample, size_t i, const char** unit_id, double* pi, int* label,
                               double* aux_prob) {
  return guarded([&] {
    require(sample, "sample");
    if (i >= sample->sample.n()) throw ArgumentError("draw index out of range");
    const Draw& d = sample->sample.draws[i];
    if (unit_id) *unit_id = sample->unit_ids[i].c_str();
    if (pi) *pi = d.pi;
    if (label) *label = d.label ? *d.label : -1;
    if (aux_prob) *aux_prob = d.aux_prob;
  });
}

void ppest_sample_free(ppest_sample* sample) { delete sample; }

ppest_status ppest_parse_estimator(const char* name, ppest_estimator* out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = static_cast<ppest_estimator>(parse_estimator(name));
  });
}

const char* ppest_estimator_name(ppest_estimator kind) {
  if (kind < PPEST_EST_HH || kind > PPEST_EST_CENSUS) return "unknown";
  return estimator_name(static_cast<EstimatorKind>(kind));
}

ppest_status ppest_estimate_hh(const ppest_sample* sample, ppest_estimate** out) {
  return guarded([&] {
    require(sample, "sample");
    require(out, "out");
    *out = wrap(hh_estimate(sample->sample)).release();
  });
}

ppest_status ppest_estimate_srs(const ppest_sample* sample, int64_t N, ppest_estimate** out) {
  return guarded([&] {
    require(sample, "sample");
    require(out, "out");
    *out = wrap(srs_estimate(sample->sample, N)).release();
  });
}

ppest_status ppest_estimate_difference(const ppest_sample* sample, double aux_total, int64_t N,
                                       ppest_estimate** out) {
  return guarded([&] {
    require(sample, "sample");
    require(out, "out");
    *out = wrap(difference_estimate(sample->sample, aux_total, N)).release();
  });
}

ppest_status ppest_estimate_census(double total, int64_t N, ppest_estimate** out) {
  return guarded([&] {
    require(out, "out");
    *out = wrap(census_estimate(total, N)).release();
  });
}

ppest_status ppest_estimate_stratified(const char* const* stratum_ids, const ppest_estimate* const* parts,
                                       size_t count, ppest_estimate** out) {
  return guarded([&] {
    require(stratum_ids, "stratum_ids");
    require(parts, "parts");
    require(out, "out");
    std::vector<Estimate::Component> comps;
    for (size_t k = 0; k < count; ++k) {
      require(stratum_ids[k], "stratum id");
      require(parts[k], "part");
      comps.push_back({stratum_ids[k], parts[k]->e});
    }
    *out = wrap(stratified_estimate(std::move(comps))).release();
  });
}

ppest_status ppest_estimate_info_get(const ppest_estimate* e, ppest_estimate_info* out) {
  return guarded([&] {
    require(e, "estimate");
    require(out, "out");
    out->estimator = static_cast<ppest_estimator>(e->e.estimator);
    out->total = e->e.total;
    out->has_variance = e->e.variance ? 1 : 0;
    out->variance = e->e.variance.value_or(0.0);
    out->n = e->e.n;
    out->N = e->e.N;
    out->components = e->parts.size();
  });
}

ppest_status ppest_estimate_component(const ppest_estimate* e, size_t i, const char** stratum,
                                      const ppest_estimate** part) {
  return guarded([&] {
    require(e, "estimate");
    if (i >= e->parts.size()) throw ArgumentError("component index out of range");
    if (stratum) *stratum = e->e.components[i].stratum.c_str();
    if (part) *part = e->parts[i].get();
  });
}

ppest_status ppest_estimate_se(const ppest_estimate* e, double* se) {
  return guarded([&] {
    require(e, "estimate");
    require(se, "se");
    *se = e->e.se();
  });
}

ppest_status ppest_confidence_interval(const ppest_estimate* e, double z, double* lo, double* hi) {
  return guarded([&] {
    require(e, "estimate");
    const Interval ci = confidence_interval(e->e, z);
    if (lo) *lo = ci.lo;
    if (hi) *hi = ci.hi;
  });
}

ppest_status ppest_default_design_effect(const ppest_estimate* e, int* has_deff, double* deff) {
  return guarded([&] {
    require(e, "estimate");
    const auto d = default_design_effect(e->e);
    if (has_deff) *has_deff = d ? 1 : 0;
    if (deff) *deff = d.value_or(0.0);
  });
}

ppest_status ppest_under_reporting_get(const ppest_estimate* e, int64_t t_f, double z, ppest_under_reporting* out) {
  return guarded([&] {
    require(e, "estimate");
    require(out, "out");
    const UnderReporting u = under_reporting(e->e, t_f, z);
    *out = {u.point, u.lo, u.hi, u.truncated ? 1 : 0};
  });
}

void ppest_estimate_free(ppest_estimate* e) { delete e; }

ppest_status ppest_exact_hh_design_variance(const ppest_frame* frame, int64_t n, double* out) {
  return guarded([&] {
    require(frame, "frame");
    require(out, "out");
    *out = exact_hh_design_variance(frame->frame, n);
  });
}

ppest_status ppest_srs_se_for_total(int64_t N, double p, int64_t n, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = srs_se_for_total(N, p, n);
  });
}

ppest_status ppest_equivalent_srs_n(int64_t N, double p, double target_se, int64_t* out) {
  return guarded([&] {
    require(out, "out");
    *out = equivalent_srs_n(N, p, target_se);
  });
}

ppest_status ppest_design_effect(double se, double baseline_se, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = design_effect(se, baseline_se);
  });
}

ppest_status ppest_records_write(const char* path, const ppest_estimate* e, double z, const double* deff,
                                 const ppest_meta* meta) {
  return guarded([&] {
    require(path, "path");
    require(e, "estimate");
    const std::optional<double> d = deff ? std::optional<double>(*deff) : default_design_effect(e->e);
    write_records(path, make_records(e->e, z, d), meta_of(meta));
  });
}

ppest_status ppest_records_load(const char* path, ppest_records** out, ppest_meta** meta_out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    Metadata meta;
    auto h = std::make_unique<ppest_records>(ppest_records{load_records(path, &meta)});
    hand_out_meta(std::move(meta), meta_out);
    *out = h.release();
  });
}

size_t ppest_records_count(const ppest_records* records) { return records ? records->rows.size() : 0; }

ppest_status ppest_records_at(const ppest_records* records, size_t i, ppest_record* out) {
  return guarded([&] {
    require(records, "records");
    require(out, "out");
    if (i >= records->rows.size()) throw ArgumentError("record index out of range");
    const EstimateRecord& r = records->rows[i];
    out->estimator = r.estimator.c_str();
    out->total = r.total;
    out->has_se = r.se ? 1 : 0;
    out->se = r.se.value_or(0.0);
    out->n = r.n;
    out->N = r.N;
    out->z = r.z;
    out->has_ci = r.ci_lo && r.ci_hi ? 1 : 0;
    out->ci_lo = r.ci_lo.value_or(0.0);
    out->ci_hi = r.ci_hi.value_or(0.0);
    out->has_deff = r.deff ? 1 : 0;
    out->deff = r.deff.value_or(0.0);
  });
}

ppest_status ppest_records_estimate(const ppest_records* records, size_t i, ppest_estimate** out) {
  return guarded([&] {
    require(records, "records");
    require(out, "out");
    if (i >= records->rows.size()) throw ArgumentError("record index out of range");
    *out = wrap(estimate_from_record(records->rows[i])).release();
  });
}

void ppest_records_free(ppest_records* records) { delete records; }

ppest_status ppest_f1_gradient(double tp, double fn, double c, double* d_tp, double* d_fn) {
  return guarded([&] {
    const F1Gradient g = f1_gradient(tp, fn, c);
    if (d_tp) *d_tp = g.d_tp;
    if (d_fn) *d_fn = g.d_fn;
  });
}

ppest_status ppest_delta_f1(const ppest_f1_inputs* in, ppest_f1_result* out) {
  return guarded([&] {
    require(in, "inputs");
    require(out, "out");
    const F1Estimate r = delta_f1({in->tp_hat, in->var_tp, in->fn_hat, in->var_fn, in->c});
    *out = {r.f1, r.variance, r.se()};
  });
}

ppest_status ppest_f1_two_stratum(const ppest_estimate* stratum1, const ppest_estimate* stratum0,
                                  const ppest_confusion* flagged, int64_t c, ppest_f1_result* out) {
  return guarded([&] {
    require(stratum1, "stratum1");
    require(stratum0, "stratum0");
    require(flagged, "flagged");
    require(out, "out");
    const ConfusionCounts counts{flagged->tp, flagged->fp, flagged->fn, flagged->tn};
    const F1Estimate r = estimate_f1_two_stratum(stratum1->e, stratum0->e, counts, c);
    *out = {r.f1, r.variance, r.se()};
  });
}

ppest_status ppest_parse_sim_estimator(const char* name, ppest_sim_estimator* out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = static_cast<ppest_sim_estimator>(parse_sim_estimator(name));
  });
}

const char* ppest_sim_estimator_name(ppest_sim_estimator e) {
  try {
    return sim_estimator_name(to_sim_estimator(e));
  } catch (...) {
    return "unknown";
  }
}

void ppest_sim_config_default(ppest_sim_config* out) {
  if (!out) return;
  const SimConfig d;
  *out = {PPEST_SIM_HH, d.n, d.R, d.seed, d.tau, PPEST_ALLOC_NEYMAN_ORACLE, d.threads};
}

ppest_status ppest_simulate(const ppest_frame* frame, const ppest_sim_config* config, ppest_sim_report** out) {
  return guarded([&] {
    require(frame, "frame");
    require(config, "config");
    require(out, "out");
    SimConfig c;
    c.estimator = to_sim_estimator(config->estimator);
    c.design = natural_design(c.estimator);
    c.n = config->n;
    c.R = config->R;
    c.seed = config->seed;
    c.tau = config->tau;
    c.allocation = to_rule(config->allocation);
    c.threads = config->threads;
    *out = new ppest_sim_report{run_replications(frame->frame, c)};
  });
}

ppest_status ppest_sim_attach_baseline(ppest_sim_report* report, const ppest_sim_report* srs) {
  return guarded([&] {
    require(report, "report");
    require(srs, "srs");
    attach_srs_baseline(report->report, srs->report);
  });
}

ppest_status ppest_sim_summary_get(const ppest_sim_report* report, ppest_sim_summary* out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    const SimReport& r = report->report;
    *out = ppest_sim_summary{};
    out->N = r.N;
    out->has_true_total = r.true_total ? 1 : 0;
    out->true_total = r.true_total.value_or(0);
    out->empirical_mean = r.empirical_mean;
    out->empirical_se = r.empirical_se;
    out->has_mean_estimated_variance = r.mean_estimated_variance ? 1 : 0;
    out->mean_estimated_variance = r.mean_estimated_variance.value_or(0.0);
    out->variance_undefined = r.variance_undefined;
    out->has_deff = r.deff_vs_srs ? 1 : 0;
    out->deff_vs_srs = r.deff_vs_srs.value_or(0.0);
    out->skewness = r.skewness;
    out->stratified = r.allocation ? 1 : 0;
    if (r.allocation) {
      out->n_one = r.allocation->size_of(kStratumOne);
      out->n_zero = r.allocation->size_of(kStratumZero);
    }
    out->zero_stratum_empty_fraction = r.zero_stratum_empty_fraction.value_or(0.0);
    out->zero_stratum_empty_predicted = r.zero_stratum_empty_predicted.value_or(0.0);
    out->warnings = r.warnings.size();
  });
}

ppest_status ppest_sim_warning(const ppest_sim_report* report, size_t i, const char** text) {
  return guarded([&] {
    require(report, "report");
    require(text, "text");
    if (i >= report->report.warnings.size()) throw ArgumentError("warning index out of range");
    *text = report->report.warnings[i].c_str();
  });
}

ppest_status ppest_sim_estimates(const ppest_sim_report* report, const double** estimates,
                                 const double** zero_totals, size_t* count) {
  return guarded([&] {
    require(report, "report");
    const SimReport& r = report->report;
    if (estimates) *estimates = r.estimates.data();
    if (zero_totals) *zero_totals = r.zero_stratum_totals.empty() ? nullptr : r.zero_stratum_totals.data();
    if (count) *count = r.estimates.size();
  });
}

ppest_status ppest_sim_histogram_zero_count(const ppest_sim_report* report, size_t* count) {
  return guarded([&] {
    require(report, "report");
    require(count, "count");
    *count = report->report.histogram.zero_count();
  });
}

ppest_status ppest_sim_write_json(const char* path, const ppest_sim_report* report, const ppest_meta* config) {
  return guarded([&] {
    require(path, "path");
    require(report, "report");
    write_report_json(path, report->report, meta_of(config));
  });
}

ppest_status ppest_sim_write_replicates(const char* path, const ppest_sim_report* report, const ppest_meta* config) {
  return guarded([&] {
    require(path, "path");
    require(report, "report");
    write_replicates_csv(path, report->report, meta_of(config));
  });
}

ppest_status ppest_sim_write_histogram(const char* path, const ppest_sim_report* report, int which,
                                       const ppest_meta* config) {
  return guarded([&] {
    require(path, "path");
    require(report, "report");
    const SimReport& r = report->report;
    if (which == 0) {
      write_histogram_csv(path, r.histogram, meta_of(config));
    } else if (which == 1) {
      if (!r.zero_stratum_histogram) throw ArgumentError("report has no zero-stratum histogram");
      write_histogram_csv(path, *r.zero_stratum_histogram, meta_of(config));
    } else {
      throw ArgumentError("histogram selector must be 0 or 1");
    }
  });
}

void ppest_sim_report_free(ppest_sim_report* report) { delete report; }

ppest_status ppest_hypergeometric_zero_probability(size_t N0, size_t M, size_t n0, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = hypergeometric_zero_probability(N0, M, n0);
  });
}

ppest_status ppest_zero_stratum_bimodality(const ppest_frame* frame, double tau, size_t n,
                                           ppest_allocation_rule rule, size_t R, uint64_t seed, unsigned threads,
                                           ppest_bimodality* out) {
  return guarded([&] {
    require(frame, "frame");
    require(out, "out");
    const AllocationPlan plan = allocate(stratify_by_prediction(frame->frame, tau), n, to_rule(rule));
    const BimodalityResult b = zero_stratum_bimodality(frame->frame, tau, plan, R, seed, threads);
    *out = {b.fraction, b.predicted, b.binomial_se, b.N0, b.M, b.n0, b.R};
  });
}

ppest_status ppest_loss_sweep(const ppest_frame* frame, const double* loss_targets, size_t count, size_t n,
                                      size_t R, uint64_t seed, unsigned threads, const ppest_profile* base,
                                      ppest_sweep_point* out) {
  return guarded([&] {
    require(frame, "frame");
    require(loss_targets, "loss_targets");
    require(out, "out");
    const auto points = loss_sweep(frame->frame, std::span<const double>(loss_targets, count), n, R, seed,
                                           threads, base ? to_profile(*base) : QualityProfile{});
    for (size_t k = 0; k < points.size(); ++k) {
      const SweepPoint& p = points[k];
      out[k] = {p.target, p.sharpness, from_profile(p.profile), p.realized_loss, p.exact_variance,
                p.empirical_variance};
    }
  });
}

}  // extern "C"
