#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ppest/designs.hpp"
#include "ppest/population.hpp"

namespace ppest {

enum class EstimatorKind { kHh, kSrs, kDiff, kStrat, kCensus };

const char* estimator_name(EstimatorKind k) noexcept;
/// Accepts hh, srs, diff, strat, census. Throws ArgumentError otherwise.
EstimatorKind parse_estimator(const std::string& name);

inline constexpr double kDefaultZ = 1.96;
inline constexpr double kPaperModeZ = 2.0;

struct Estimate {
  struct Component;

  EstimatorKind estimator = EstimatorKind::kSrs;
  double total = 0.0;
  std::optional<double> variance;  // absent when it cannot be estimated (n < 2)
  std::int64_t n = 0;
  std::int64_t N = 0;
  std::vector<Component> components;

  bool has_variance() const noexcept { return variance.has_value(); }
  /// Throws VarianceUndefinedError when the variance is absent.
  double se() const;
  double var() const;
};

struct Estimate::Component {
  std::string stratum;
  Estimate estimate;
};

/// Hansen-Hurwitz total (1/n) sum y/pi with variance
/// (1/n) sum (y/pi - total)^2 / (n - 1). With n < 2 the variance is left
/// absent. Requires a PPS_WR sample with every y observed.
Estimate hh_estimate(const Sample& sample);

/// Closed-form design variance of the HH estimator for binary y:
/// (1/n) (sum_{y=1} 1/pi_i - t^2), pi_i = p_hat_i / aux_total.
double exact_hh_design_variance(const Frame& frame, std::int64_t n);

/// Expansion estimator N * ybar with variance N^2 (1 - n/N) s_y^2 / n.
Estimate srs_estimate(const Sample& sample, std::int64_t N);

/// Difference estimator aux_total + (N/n) sum (y - p_hat) with variance
/// N^2 (1 - n/N) s_d^2 / n, d = y - p_hat.
Estimate difference_estimate(const Sample& sample, double aux_total, std::int64_t N);

/// A fully enumerated stratum: known total, zero variance.
Estimate census_estimate(double total, std::int64_t N);

/// Sum of independent stratum estimates. Throws ArgumentError on duplicate
/// stratum ids. The variance is absent if any component's is.
Estimate stratified_estimate(std::vector<Estimate::Component> parts);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval confidence_interval(const Estimate& e, double z);

/// (se / baseline_se)^2.
double design_effect(const Estimate& e, double baseline_se_srs);
double design_effect(double se, double baseline_se_srs);

/// SE of the SRS expansion estimator of a total at prevalence p:
/// sqrt(N^2 (1 - n/N) S^2 / n) with S^2 = p (1 - p) N / (N - 1).
double srs_se_for_total(std::int64_t N, double p, std::int64_t n);

/// Smallest SRS size whose srs_se_for_total is at most target_se.
std::int64_t equivalent_srs_n(std::int64_t N, double p, double target_se);

struct UnderReporting {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool truncated = false;  // some bound was lifted to 0
};

/// t_hat - t_f with the CI shifted by -t_f and truncated below at 0.
UnderReporting under_reporting(const Estimate& t_hat, std::int64_t t_f, double z);

/// Flat record `estimator,total,se,n,N,z,ci_lo,ci_hi,deff`. Fields without a
/// value (variance undefined, no DEFF baseline) are written blank.
struct EstimateRecord {
  std::string estimator;
  double total = 0.0;
  std::optional<double> se;
  std::int64_t n = 0;
  std::int64_t N = 0;
  double z = kDefaultZ;
  std::optional<double> ci_lo;
  std::optional<double> ci_hi;
  std::optional<double> deff;
};

/// Record for `e`; stratified estimates also produce one `<stratum>/<kind>`
/// row per component after the main row.
std::vector<EstimateRecord> make_records(const Estimate& e, double z,
                                         std::optional<double> deff = std::nullopt);
/// DEFF against srs_se_for_total(N, total/N, n) when 0 < total/N < 1 and the
/// variance is defined; nullopt otherwise.
std::optional<double> default_design_effect(const Estimate& e);

/// Inverse of make_records for a single row: the kind comes from the part
/// after any `<stratum>/` prefix and the variance from se^2.
Estimate estimate_from_record(const EstimateRecord& record);

void write_records(const std::string& path, const std::vector<EstimateRecord>& records,
                   const Metadata& meta = {});
std::vector<EstimateRecord> load_records(const std::string& path, Metadata* meta = nullptr);

}  // namespace ppest
