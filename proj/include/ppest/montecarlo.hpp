#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ppest/classifier_sim.hpp"
#include "ppest/designs.hpp"
#include "ppest/estimators.hpp"
#include "ppest/population.hpp"

namespace ppest {

enum class SimDesign { kSrs, kPps, kStratified };
enum class SimEstimator { kHh, kSrs, kDiff, kStratSrs, kStratDiff };

const char* sim_design_name(SimDesign d) noexcept;
const char* sim_estimator_name(SimEstimator e) noexcept;
/// hh, srs, diff, strat-srs, strat-diff.
SimEstimator parse_sim_estimator(const std::string& name);
/// The design an estimator runs under (hh -> pps, srs/diff -> srs, strat-* -> stratified).
SimDesign natural_design(SimEstimator e) noexcept;

struct SimConfig {
  SimDesign design = SimDesign::kPps;
  SimEstimator estimator = SimEstimator::kHh;
  std::size_t n = 500;
  std::size_t R = 10000;
  std::uint64_t seed = 0;
  double tau = 0.5;
  AllocationRule allocation = AllocationRule::kNeymanOracle;
  unsigned threads = 1;  // results do not depend on this
};

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  bool point_mass = false;  // the dedicated bin holding values exactly 0
};

struct Histogram {
  std::vector<HistogramBin> bins;
  std::size_t total_count() const noexcept;
  /// Count in the point-mass bin (0 if there is none).
  std::size_t zero_count() const noexcept;
};

/// Freedman-Diaconis bins over the nonzero values plus a point-mass bin for
/// values exactly 0. Bin count is capped at 512.
Histogram make_histogram(std::span<const double> values);

/// Sample skewness m3 / m2^(3/2); 0 when m2 = 0.
double sample_skewness(std::span<const double> values);

struct SimReport {
  SimConfig config;
  std::size_t N = 0;
  std::optional<std::int64_t> true_total;
  double empirical_mean = 0.0;
  double empirical_se = 0.0;  // (R-1)-divisor SD of the replicate estimates
  std::optional<double> bias;
  std::optional<double> mean_estimated_variance;
  std::size_t variance_undefined = 0;
  std::optional<double> srs_empirical_se;
  std::optional<double> deff_vs_srs;
  double skewness = 0.0;
  Histogram histogram;
  std::optional<AllocationPlan> allocation;
  std::optional<double> zero_stratum_empty_fraction;
  std::optional<double> zero_stratum_empty_predicted;  // hypergeometric
  std::optional<Histogram> zero_stratum_histogram;
  std::vector<std::string> warnings;

  std::vector<double> estimates;
  std::vector<std::optional<double>> estimated_variances;
  std::vector<double> zero_stratum_totals;  // stratified runs only
};

/// R independent replicates; replicate r draws from stream (seed, r), so the
/// report is identical for any thread count. Throws ConfigError for an
/// incompatible design/estimator pair and ArgumentError for an unlabeled frame.
SimReport run_replications(const Frame& frame, const SimConfig& config);

/// Record deff_vs_srs = (empirical_se / srs.empirical_se)^2.
void attach_srs_baseline(SimReport& report, const SimReport& srs);

/// P(no positives in an SRS of n0 from N0 units with M positives).
double hypergeometric_zero_probability(std::size_t N0, std::size_t M, std::size_t n0);

struct BimodalityResult {
  double fraction = 0.0;   // replicates whose zero-stratum sample has no positive
  double predicted = 0.0;  // hypergeometric value
  double binomial_se = 0.0;
  std::size_t N0 = 0;
  std::size_t M = 0;
  std::size_t n0 = 0;
  std::size_t R = 0;
};

/// Zero-stratum-empty frequency of stratified SRS under `plan`.
BimodalityResult zero_stratum_bimodality(const Frame& frame, double tau, const AllocationPlan& plan,
                                         std::size_t R, std::uint64_t seed, unsigned threads = 1);

struct SweepPoint {
  double target = 0.0;  // per-unit loss target
  double sharpness = 1.0;
  QualityProfile profile;
  double realized_loss = 0.0;  // per unit
  double exact_variance = 0.0;
  double empirical_variance = 0.0;
};

/// For each (strictly decreasing, positive) per-unit loss target: calibrate,
/// regenerate p_hat, and compare the closed-form HH variance with an
/// R-replicate Monte Carlo variance.
std::vector<SweepPoint> loss_sweep(const Frame& frame, std::span<const double> loss_targets,
                                           std::size_t n, std::size_t R, std::uint64_t seed,
                                           unsigned threads = 1, const QualityProfile& base = {});

/// Summary JSON; `config` is embedded verbatim as the audit record.
void write_report_json(const std::string& path, const SimReport& report, const Metadata& config);
/// `replicate,estimate,variance[,zero_stratum_total]`.
void write_replicates_csv(const std::string& path, const SimReport& report, const Metadata& config);
/// `lo,hi,count,point_mass`.
void write_histogram_csv(const std::string& path, const Histogram& histogram, const Metadata& config);

}  // namespace ppest
