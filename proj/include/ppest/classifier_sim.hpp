#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ppest/population.hpp"
#include "ppest/rng.hpp"

namespace ppest {

/// Conditional Beta model for the predicted probability:
/// p_hat | y=1 ~ Beta(a1, b1), p_hat | y=0 ~ Beta(a0, b0).
struct QualityProfile {
  double a1 = 1.0;
  double b1 = 1.0;
  double a0 = 1.0;
  double b0 = 1.0;

  /// Throws ArgumentError unless all four shapes are positive and finite.
  void validate() const;

  /// Sharpness family through this profile as base:
  /// (a1*s, b1/s, a0/s, b0*s). With the default base this is
  /// Beta(s, 1/s) for positives and Beta(1/s, s) for negatives.
  QualityProfile sharpened(double s) const;

  friend bool operator==(const QualityProfile&, const QualityProfile&) = default;
};

struct ConfusionCounts {
  double tp = 0;
  double fp = 0;
  double fn = 0;
  double tn = 0;

  double predicted_positive() const noexcept { return tp + fp; }
  double total() const noexcept { return tp + fp + fn + tn; }
};

/// Draw one Beta(a, b) variate, computed in log space so that tiny shapes
/// never produce 0/0.
double beta_variate(double a, double b, Rng& rng);

/// Replace every aux_prob with a draw from the profile (then clamp). Labels
/// and ids are kept. Deterministic in `seed`. Requires a fully labeled frame.
Frame simulate_predictions(const Frame& frame, const QualityProfile& profile, std::uint64_t seed);

/// Fully labeled synthetic frame: `positives` label-1 units scattered
/// uniformly at random among N, ids "u0000001"..., p_hat from the profile.
Frame synthesize_frame(std::size_t N, std::size_t positives, const QualityProfile& profile,
                       std::uint64_t seed);

/// Total binary cross-entropy over the frame.
double population_loss(const Frame& frame);
inline double mean_loss(const Frame& frame) {
  return population_loss(frame) / static_cast<double>(frame.size());
}

ConfusionCounts confusion_counts(const Frame& frame, double tau);

/// 2tp / (2tp + fp + fn). Throws UndefinedMetricError on a zero denominator.
double f1_from_counts(const ConfusionCounts& c);

struct CalibrationTarget {
  enum class Kind { kMeanLoss, kF1 };
  Kind kind = Kind::kMeanLoss;
  double value = 0.0;
  double tau = 0.5;  // threshold used for the F1 target
};

struct CalibrationResult {
  QualityProfile profile;
  double sharpness = 1.0;
  double realized = 0.0;
  int steps = 0;
};

/// Bisection on log-sharpness s in [1, 1e4] over `base.sharpened(s)`, each
/// step regenerating p_hat with `seed`, until the realized metric is within
/// 2% of the target. Throws CalibrationError after 60 steps.
CalibrationResult calibrate_profile(const Frame& frame, const CalibrationTarget& target,
                                    std::uint64_t seed, const QualityProfile& base = {});

/// Key-value text: a1, b1, a0, b0, seed.
void write_profile(const std::string& path, const QualityProfile& profile, std::uint64_t seed);
QualityProfile load_profile(const std::string& path, std::optional<std::uint64_t>* seed = nullptr);

}  // namespace ppest
