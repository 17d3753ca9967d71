/* C interface to the ppest estimation library.
 *
 * Every function returns a ppest_status; on failure ppest_last_error() holds
 * the message for the calling thread. Handles are opaque and owned by the
 * caller, who releases them with the matching *_free function. Strings
 * returned through `const char**` stay valid until the owning handle is freed.
 */
#ifndef PPEST_PPEST_H
#define PPEST_PPEST_H

#include <stddef.h>
#include <stdint.h>

#if defined(PPEST_BUILDING_LIBRARY)
#define PPEST_API __attribute__((visibility("default")))
#else
#define PPEST_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  PPEST_OK = 0,
  PPEST_E_ARGUMENT = 1,
  PPEST_E_INGESTION = 2,
  PPEST_E_IO = 3,
  PPEST_E_CONFIG = 4,
  PPEST_E_ALLOCATION = 5,
  PPEST_E_CALIBRATION = 6,
  PPEST_E_UNDEFINED_METRIC = 7,
  PPEST_E_VARIANCE_UNDEFINED = 8,
  PPEST_E_INTERNAL = 99
} ppest_status;

typedef struct ppest_meta ppest_meta;
typedef struct ppest_frame ppest_frame;
typedef struct ppest_strata ppest_strata;
typedef struct ppest_sample ppest_sample;
typedef struct ppest_estimate ppest_estimate;
typedef struct ppest_records ppest_records;
typedef struct ppest_sim_report ppest_sim_report;

PPEST_API const char* ppest_last_error(void);
/* "ok", "argument", "ingestion", ... */
PPEST_API const char* ppest_status_name(ppest_status status);

/* ---- key/value metadata (the `#! key=value` audit lines) ---- */

PPEST_API ppest_status ppest_meta_create(ppest_meta** out);
PPEST_API void ppest_meta_free(ppest_meta* meta);
/* Replaces the value when the key already exists. */
PPEST_API ppest_status ppest_meta_set(ppest_meta* meta, const char* key, const char* value);
PPEST_API size_t ppest_meta_count(const ppest_meta* meta);
PPEST_API ppest_status ppest_meta_at(const ppest_meta* meta, size_t i, const char** key, const char** value);
/* *value is NULL when the key is absent. */
PPEST_API ppest_status ppest_meta_get(const ppest_meta* meta, const char* key, const char** value);

/* ---- frames ---- */

typedef struct {
  double a1, b1, a0, b0;
} ppest_profile;

typedef struct {
  size_t size;
  double aux_total;
  int fully_labeled;
  int64_t true_total; /* valid when fully_labeled */
  int64_t labeled_positives;
} ppest_frame_info;

/* Column names may be NULL for the defaults id, label, p_hat. `meta_out`
 * (nullable) receives the file's `#!` lines. */
PPEST_API ppest_status ppest_frame_load(const char* path, const char* id_col, const char* label_col,
                                        const char* aux_col, ppest_frame** out, ppest_meta** meta_out);
PPEST_API ppest_status ppest_frame_write(const char* path, const ppest_frame* frame, const ppest_meta* meta);
PPEST_API ppest_status ppest_frame_synthesize(size_t N, size_t positives, const ppest_profile* profile,
                                              uint64_t seed, ppest_frame** out);
PPEST_API ppest_status ppest_frame_simulate_predictions(const ppest_frame* frame, const ppest_profile* profile,
                                                        uint64_t seed, ppest_frame** out);
PPEST_API ppest_status ppest_frame_info_get(const ppest_frame* frame, ppest_frame_info* out);
/* label is -1 when unobserved. */
PPEST_API ppest_status ppest_frame_unit(const ppest_frame* frame, size_t i, const char** id, int* label,
                                        double* aux_prob);
PPEST_API void ppest_frame_free(ppest_frame* frame);

/* ---- classifier metrics and calibration ---- */

typedef struct {
  double tp, fp, fn, tn;
} ppest_confusion;

typedef enum { PPEST_TARGET_MEAN_LOSS = 0, PPEST_TARGET_F1 = 1 } ppest_target_kind;

typedef struct {
  ppest_profile profile;
  double sharpness;
  double realized;
  int steps;
} ppest_calibration;

PPEST_API ppest_status ppest_population_loss(const ppest_frame* frame, double* total);
PPEST_API ppest_status ppest_confusion_counts(const ppest_frame* frame, double tau, ppest_confusion* out);
PPEST_API ppest_status ppest_f1_from_counts(const ppest_confusion* counts, double* f1);
/* `base` may be NULL for the symmetric family. */
PPEST_API ppest_status ppest_calibrate(const ppest_frame* frame, ppest_target_kind kind, double value, double tau,
                                       uint64_t seed, const ppest_profile* base, ppest_calibration* out);
PPEST_API ppest_status ppest_profile_write(const char* path, const ppest_profile* profile, uint64_t seed);
/* `has_seed`/`seed` may be NULL. */
PPEST_API ppest_status ppest_profile_load(const char* path, ppest_profile* out, int* has_seed, uint64_t* seed);

/* ---- strata and allocation ---- */

typedef enum {
  PPEST_ALLOC_NEYMAN_ORACLE = 0,
  PPEST_ALLOC_NEYMAN_PROXY = 1,
  PPEST_ALLOC_PROPORTIONAL = 2,
  PPEST_ALLOC_EQUAL = 3
} ppest_allocation_rule;

PPEST_API ppest_status ppest_parse_allocation_rule(const char* name, ppest_allocation_rule* out);
PPEST_API const char* ppest_allocation_rule_name(ppest_allocation_rule rule);

PPEST_API ppest_status ppest_stratify(const ppest_frame* frame, double tau, ppest_strata** out);
PPEST_API size_t ppest_strata_count(const ppest_strata* strata);
PPEST_API ppest_status ppest_strata_at(const ppest_strata* strata, size_t i, const char** id, size_t* size);
/* A copy of stratum i as its own frame; *out is NULL for an empty stratum. */
PPEST_API ppest_status ppest_strata_frame(const ppest_strata* strata, size_t i, ppest_frame** out);
/* sizes[i] receives n_h for stratum i; `capacity` must cover ppest_strata_count. */
PPEST_API ppest_status ppest_allocate(const ppest_strata* strata, size_t n, ppest_allocation_rule rule,
                                      size_t* sizes, size_t capacity);
PPEST_API void ppest_strata_free(ppest_strata* strata);

/* ---- samples ---- */

typedef enum { PPEST_DESIGN_SRS_WOR = 0, PPEST_DESIGN_PPS_WR = 1 } ppest_design;

typedef struct {
  ppest_design design;
  size_t n;
  size_t parent_N;
  double parent_aux_total;
} ppest_sample_info;

PPEST_API ppest_status ppest_sample_srs(const ppest_frame* frame, size_t n, uint64_t seed, ppest_sample** out);
PPEST_API ppest_status ppest_sample_pps(const ppest_frame* frame, size_t n, uint64_t seed, ppest_sample** out);
PPEST_API ppest_status ppest_sample_write(const char* path, const ppest_sample* sample, const ppest_frame* frame,
                                          const ppest_meta* meta);
PPEST_API ppest_status ppest_sample_load(const char* path, ppest_sample** out, ppest_meta** meta_out);
PPEST_API ppest_status ppest_sample_info_get(const ppest_sample* sample, ppest_sample_info* out);
/* label is -1 when unobserved. */
PPEST_API ppest_status ppest_sample_draw(const ppest_sample* sample, size_t i, const char** unit_id, double* pi,
                                         int* label, double* aux_prob);
PPEST_API void ppest_sample_free(ppest_sample* sample);

/* ---- estimators ---- */

typedef enum {
  PPEST_EST_HH = 0,
  PPEST_EST_SRS = 1,
  PPEST_EST_DIFF = 2,
  PPEST_EST_STRAT = 3,
  PPEST_EST_CENSUS = 4
} ppest_estimator;

typedef struct {
  ppest_estimator estimator;
  double total;
  int has_variance;
  double variance;
  int64_t n;
  int64_t N;
  size_t components;
} ppest_estimate_info;

typedef struct {
  double point, lo, hi;
  int truncated;
} ppest_under_reporting;

PPEST_API ppest_status ppest_parse_estimator(const char* name, ppest_estimator* out);
PPEST_API const char* ppest_estimator_name(ppest_estimator kind);

PPEST_API ppest_status ppest_estimate_hh(const ppest_sample* sample, ppest_estimate** out);
PPEST_API ppest_status ppest_estimate_srs(const ppest_sample* sample, int64_t N, ppest_estimate** out);
PPEST_API ppest_status ppest_estimate_difference(const ppest_sample* sample, double aux_total, int64_t N,
                                                 ppest_estimate** out);
PPEST_API ppest_status ppest_estimate_census(double total, int64_t N, ppest_estimate** out);
/* Copies the parts; stratum ids must be distinct. */
PPEST_API ppest_status ppest_estimate_stratified(const char* const* stratum_ids, const ppest_estimate* const* parts,
                                                 size_t count, ppest_estimate** out);
PPEST_API ppest_status ppest_estimate_info_get(const ppest_estimate* e, ppest_estimate_info* out);
/* Borrowed view of component i, valid while `e` lives. */
PPEST_API ppest_status ppest_estimate_component(const ppest_estimate* e, size_t i, const char** stratum,
                                                const ppest_estimate** part);
PPEST_API ppest_status ppest_estimate_se(const ppest_estimate* e, double* se);
PPEST_API ppest_status ppest_confidence_interval(const ppest_estimate* e, double z, double* lo, double* hi);
/* *has_deff is 0 when no SRS baseline applies. */
PPEST_API ppest_status ppest_default_design_effect(const ppest_estimate* e, int* has_deff, double* deff);
PPEST_API ppest_status ppest_under_reporting_get(const ppest_estimate* e, int64_t t_f, double z,
                                                 ppest_under_reporting* out);
PPEST_API void ppest_estimate_free(ppest_estimate* e);

PPEST_API ppest_status ppest_exact_hh_design_variance(const ppest_frame* frame, int64_t n, double* out);
PPEST_API ppest_status ppest_srs_se_for_total(int64_t N, double p, int64_t n, double* out);
PPEST_API ppest_status ppest_equivalent_srs_n(int64_t N, double p, double target_se, int64_t* out);
PPEST_API ppest_status ppest_design_effect(double se, double baseline_se, double* out);

/* ---- estimate records (estimator,total,se,n,N,z,ci_lo,ci_hi,deff) ---- */

typedef struct {
  const char* estimator;
  double total;
  int has_se;
  double se;
  int64_t n;
  int64_t N;
  double z;
  int has_ci;
  double ci_lo, ci_hi;
  int has_deff;
  double deff;
} ppest_record;

/* `deff` may be NULL to use the default SRS baseline. */
PPEST_API ppest_status ppest_records_write(const char* path, const ppest_estimate* e, double z, const double* deff,
                                           const ppest_meta* meta);
PPEST_API ppest_status ppest_records_load(const char* path, ppest_records** out, ppest_meta** meta_out);
PPEST_API size_t ppest_records_count(const ppest_records* records);
PPEST_API ppest_status ppest_records_at(const ppest_records* records, size_t i, ppest_record* out);
PPEST_API ppest_status ppest_records_estimate(const ppest_records* records, size_t i, ppest_estimate** out);
PPEST_API void ppest_records_free(ppest_records* records);

/* ---- F1 by the delta method ---- */

typedef struct {
  double tp_hat, var_tp, fn_hat, var_fn;
  int64_t c;
} ppest_f1_inputs;

typedef struct {
  double f1, variance, se;
} ppest_f1_result;

PPEST_API ppest_status ppest_f1_gradient(double tp, double fn, double c, double* d_tp, double* d_fn);
PPEST_API ppest_status ppest_delta_f1(const ppest_f1_inputs* in, ppest_f1_result* out);
PPEST_API ppest_status ppest_f1_two_stratum(const ppest_estimate* stratum1, const ppest_estimate* stratum0,
                                            const ppest_confusion* flagged, int64_t c, ppest_f1_result* out);

/* ---- Monte Carlo ---- */

typedef enum { PPEST_SIM_SRS = 0, PPEST_SIM_PPS = 1, PPEST_SIM_STRATIFIED = 2 } ppest_sim_design;
typedef enum {
  PPEST_SIM_HH = 0,
  PPEST_SIM_EST_SRS = 1,
  PPEST_SIM_DIFF = 2,
  PPEST_SIM_STRAT_SRS = 3,
  PPEST_SIM_STRAT_DIFF = 4
} ppest_sim_estimator;

typedef struct {
  ppest_sim_estimator estimator; /* the design follows from the estimator */
  size_t n;
  size_t R;
  uint64_t seed;
  double tau;
  ppest_allocation_rule allocation;
  unsigned threads;
} ppest_sim_config;

typedef struct {
  size_t N;
  int has_true_total;
  int64_t true_total;
  double empirical_mean;
  double empirical_se;
  int has_mean_estimated_variance;
  double mean_estimated_variance;
  size_t variance_undefined;
  int has_deff;
  double deff_vs_srs;
  double skewness;
  int stratified;
  size_t n_one, n_zero; /* allocation, stratified only */
  double zero_stratum_empty_fraction;
  double zero_stratum_empty_predicted;
  size_t warnings;
} ppest_sim_summary;

typedef struct {
  double fraction, predicted, binomial_se;
  size_t N0, M, n0, R;
} ppest_bimodality;

typedef struct {
  double target, sharpness;
  ppest_profile profile;
  double realized_loss, exact_variance, empirical_variance;
} ppest_sweep_point;

PPEST_API ppest_status ppest_parse_sim_estimator(const char* name, ppest_sim_estimator* out);
PPEST_API const char* ppest_sim_estimator_name(ppest_sim_estimator e);
/* n = 500, R = 10000, seed 0, tau 0.5, Neyman oracle, 1 thread, HH. */
PPEST_API void ppest_sim_config_default(ppest_sim_config* out);

PPEST_API ppest_status ppest_simulate(const ppest_frame* frame, const ppest_sim_config* config,
                                      ppest_sim_report** out);
PPEST_API ppest_status ppest_sim_attach_baseline(ppest_sim_report* report, const ppest_sim_report* srs);
PPEST_API ppest_status ppest_sim_summary_get(const ppest_sim_report* report, ppest_sim_summary* out);
PPEST_API ppest_status ppest_sim_warning(const ppest_sim_report* report, size_t i, const char** text);
/* Borrowed arrays of length R. `zero_totals` is NULL for unstratified runs. */
PPEST_API ppest_status ppest_sim_estimates(const ppest_sim_report* report, const double** estimates,
                                           const double** zero_totals, size_t* count);
/* Point-mass bin count of the replicate histogram (0 if none). */
PPEST_API ppest_status ppest_sim_histogram_zero_count(const ppest_sim_report* report, size_t* count);
PPEST_API ppest_status ppest_sim_write_json(const char* path, const ppest_sim_report* report, const ppest_meta* config);
PPEST_API ppest_status ppest_sim_write_replicates(const char* path, const ppest_sim_report* report,
                                                  const ppest_meta* config);
/* which = 0: replicate totals; which = 1: zero-stratum totals. */
PPEST_API ppest_status ppest_sim_write_histogram(const char* path, const ppest_sim_report* report, int which,
                                                 const ppest_meta* config);
PPEST_API void ppest_sim_report_free(ppest_sim_report* report);

PPEST_API ppest_status ppest_hypergeometric_zero_probability(size_t N0, size_t M, size_t n0, double* out);
PPEST_API ppest_status ppest_zero_stratum_bimodality(const ppest_frame* frame, double tau, size_t n,
                                                     ppest_allocation_rule rule, size_t R, uint64_t seed,
                                                     unsigned threads, ppest_bimodality* out);
/* `out` must hold `count` points. `base` may be NULL. */
PPEST_API ppest_status ppest_loss_sweep(const ppest_frame* frame, const double* loss_targets, size_t count,
                                                size_t n, size_t R, uint64_t seed, unsigned threads,
                                                const ppest_profile* base, ppest_sweep_point* out);

#ifdef __cplusplus
}
#endif

#endif
