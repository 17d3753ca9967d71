#pragma once

#include <cstdint>

#include "ppest/classifier_sim.hpp"
#include "ppest/estimators.hpp"

namespace ppest {

/// Estimated confusion cells feeding the F1 delta method. `c` is the known
/// number of predicted positives, so FP = c - TP.
struct F1Inputs {
  double tp_hat = 0.0;
  double var_tp = 0.0;
  double fn_hat = 0.0;
  double var_fn = 0.0;
  std::int64_t c = 0;
};

struct F1Gradient {
  double d_tp = 0.0;
  double d_fn = 0.0;
};

struct F1Estimate {
  double f1 = 0.0;
  double variance = 0.0;
  double se() const;
};

/// F1 = 2 TP / (TP + FN + C) as a function of (TP, FN).
double f1_of(double tp, double fn, double c);

/// dF1/dTP = 2 (FN + C) / D^2, dF1/dFN = -2 TP / D^2 with D = TP + FN + C.
F1Gradient f1_gradient(double tp, double fn, double c);

/// First-order variance g' diag(var_tp, var_fn) g; TP and FN come from
/// disjoint strata so their covariance is taken as 0.
F1Estimate delta_f1(const F1Inputs& in);

/// Two-stratum assembly: TP = flagged.tp + stratum1 total, FN = flagged.fn +
/// stratum0 total, with variances from the two estimates.
F1Estimate estimate_f1_two_stratum(const Estimate& stratum1, const Estimate& stratum0,
                                   const ConfusionCounts& flagged, std::int64_t c);

}  // namespace ppest
