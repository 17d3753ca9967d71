#include "ppest/f1_estimation.hpp"

#include <cmath>

#include "ppest/error.hpp"

namespace ppest {

double F1Estimate::se() const { return std::sqrt(variance); }

double f1_of(double tp, double fn, double c) {
  const double d = tp + fn + c;
  if (!(d > 0.0)) throw UndefinedMetricError("F1 undefined: TP + FN + C = 0");
  return 2.0 * tp / d;
}

F1Gradient f1_gradient(double tp, double fn, double c) {
  const double d = tp + fn + c;
  if (!(d > 0.0)) throw UndefinedMetricError("F1 undefined: TP + FN + C = 0");
  const double d2 = d * d;
  return {2.0 * (fn + c) / d2, -2.0 * tp / d2};
}

F1Estimate delta_f1(const F1Inputs& in) {
  if (in.tp_hat < 0 || in.fn_hat < 0 || in.c < 0) throw ArgumentError("F1 inputs must be nonnegative");
  if (in.var_tp < 0 || in.var_fn < 0) throw ArgumentError("F1 input variances must be nonnegative");
  if (in.tp_hat > static_cast<double>(in.c)) {
    throw ArgumentError("estimated TP exceeds the predicted-positive count C");
  }
  const double c = static_cast<double>(in.c);
  const F1Gradient g = f1_gradient(in.tp_hat, in.fn_hat, c);
  return {f1_of(in.tp_hat, in.fn_hat, c), g.d_tp * g.d_tp * in.var_tp + g.d_fn * g.d_fn * in.var_fn};
}

F1Estimate estimate_f1_two_stratum(const Estimate& stratum1, const Estimate& stratum0,
                                   const ConfusionCounts& flagged, std::int64_t c) {
  F1Inputs in;
  in.tp_hat = flagged.tp + stratum1.total;
  in.var_tp = stratum1.var();
  in.fn_hat = flagged.fn + stratum0.total;
  in.var_fn = stratum0.var();
  in.c = c;
  return delta_f1(in);
}

}  // namespace ppest
