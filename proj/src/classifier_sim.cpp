#include "ppest/classifier_sim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "csv.hpp"
#include "ppest/error.hpp"
#include "summation.hpp"

namespace ppest {

namespace {

void require_labeled(const Frame& frame, const char* what) {
  if (!frame.fully_labeled()) {
    throw ArgumentError(std::string(what) + " requires every unit to be labeled");
  }
}

void require_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ArgumentError("threshold tau must lie in (0,1)");
}

// log of a Gamma(shape, 1) variate. Shapes below 1 use the boost
// G(a) = G(a + 1) * U^(1/a), kept in log space.
double log_gamma_variate(double shape, Rng& rng) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> g(shape, 1.0);
    return std::log(g(rng));
  }
  std::gamma_distribution<double> g(shape + 1.0, 1.0);
  const double u = 1.0 - uniform01(rng);  // (0, 1]
  return std::log(g(rng)) + std::log(u) / shape;
}

std::vector<double> draw_aux(const Frame& frame, const QualityProfile& profile, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<double> aux(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const bool positive = *frame[i].label == 1;
    aux[i] = clamp_aux(positive ? beta_variate(profile.a1, profile.b1, rng)
                                : beta_variate(profile.a0, profile.b0, rng));
  }
  return aux;
}

double loss_term(int y, double p) { return y == 1 ? -std::log(p) : -std::log1p(-p); }

double mean_loss_of(const Frame& frame, const std::vector<double>& aux) {
  detail::CompensatedSum sum;
  for (std::size_t i = 0; i < frame.size(); ++i) sum.add(loss_term(*frame[i].label, aux[i]));
  return sum.value() / static_cast<double>(frame.size());
}

ConfusionCounts counts_of(const Frame& frame, const std::vector<double>& aux, double tau) {
  ConfusionCounts c;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const bool truth = *frame[i].label == 1;
    const bool pred = aux[i] >= tau;
    if (truth && pred) ++c.tp;
    else if (!truth && pred) ++c.fp;
    else if (truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

}  // namespace

void QualityProfile::validate() const {
  for (double v : {a1, b1, a0, b0}) {
    if (!(std::isfinite(v) && v > 0.0)) throw ArgumentError("profile shape parameters must be positive");
  }
}

QualityProfile QualityProfile::sharpened(double s) const {
  return QualityProfile{a1 * s, b1 / s, a0 / s, b0 * s};
}

double beta_variate(double a, double b, Rng& rng) {
  const double lx = log_gamma_variate(a, rng);
  const double ly = log_gamma_variate(b, rng);
  // x / (x + y) = 1 / (1 + exp(ly - lx))
  return 1.0 / (1.0 + std::exp(ly - lx));
}

Frame simulate_predictions(const Frame& frame, const QualityProfile& profile, std::uint64_t seed) {
  require_labeled(frame, "simulate_predictions");
  profile.validate();
  const auto aux = draw_aux(frame, profile, seed);
  std::vector<Unit> units = frame.units();
  for (std::size_t i = 0; i < units.size(); ++i) units[i].aux_prob = aux[i];
  return Frame(std::move(units));
}

Frame synthesize_frame(std::size_t N, std::size_t positives, const QualityProfile& profile,
                       std::uint64_t seed) {
  if (N == 0) throw ArgumentError("frame size must be positive");
  if (positives > N) throw ArgumentError("positives cannot exceed frame size");
  profile.validate();

  // Labels from a partial shuffle on a stream separate from the p_hat draws.
  Rng rng = make_rng(seed, 0x1abe1);
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < positives; ++i) {
    const std::size_t j = i + uniform_below(rng, N - i);
    std::swap(order[i], order[j]);
  }
  std::vector<std::uint8_t> labels(N, 0);
  for (std::size_t i = 0; i < positives; ++i) labels[order[i]] = 1;

  const std::size_t width = std::max<std::size_t>(7, std::to_string(N).size());
  std::vector<Unit> units(N);
  for (std::size_t i = 0; i < N; ++i) {
    const std::string digits = std::to_string(i + 1);
    units[i].id = "u" + std::string(width - digits.size(), '0') + digits;
    units[i].label = labels[i];
  }
  return simulate_predictions(Frame(std::move(units)), profile, seed);
}

double population_loss(const Frame& frame) {
  require_labeled(frame, "population_loss");
  detail::CompensatedSum sum;
  for (const auto& u : frame.units()) sum.add(loss_term(*u.label, u.aux_prob));
  return sum.value();
}

ConfusionCounts confusion_counts(const Frame& frame, double tau) {
  require_labeled(frame, "confusion_counts");
  require_tau(tau);
  std::vector<double> aux(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) aux[i] = frame[i].aux_prob;
  return counts_of(frame, aux, tau);
}

double f1_from_counts(const ConfusionCounts& c) {
  if (c.tp < 0 || c.fp < 0 || c.fn < 0 || c.tn < 0) throw ArgumentError("confusion counts must be nonnegative");
  const double denom = 2.0 * c.tp + c.fp + c.fn;
  if (!(denom > 0.0)) throw UndefinedMetricError("F1 undefined: 2tp + fp + fn = 0");
  return 2.0 * c.tp / denom;
}

CalibrationResult calibrate_profile(const Frame& frame, const CalibrationTarget& target,
                                    std::uint64_t seed, const QualityProfile& base) {
  require_labeled(frame, "calibrate_profile");
  base.validate();
  const bool is_f1 = target.kind == CalibrationTarget::Kind::kF1;
  if (is_f1) {
    require_tau(target.tau);
    if (!(target.value > 0.0 && target.value < 1.0)) throw ArgumentError("F1 target must lie in (0,1)");
  } else if (!(target.value > 0.0 && std::isfinite(target.value))) {
    throw ArgumentError("loss target must be positive");
  }

  const auto realized_at = [&](double s) {
    const auto aux = draw_aux(frame, base.sharpened(s), seed);
    if (!is_f1) return mean_loss_of(frame, aux);
    const auto c = counts_of(frame, aux, target.tau);
    const double denom = 2.0 * c.tp + c.fp + c.fn;
    return denom > 0.0 ? 2.0 * c.tp / denom : 0.0;
  };
  // Loss falls with sharpness; F1 rises.
  const auto need_sharper = [&](double realized) {
    return is_f1 ? realized < target.value : realized > target.value;
  };

  double lo = 0.0;
  double hi = std::log(1e4);
  double best_s = 1.0;
  double best = realized_at(1.0);
  double best_err = std::abs(best - target.value) / target.value;
  if (best_err <= 0.02) return {base.sharpened(1.0), 1.0, best, 0};
  if (!need_sharper(best)) {
    char msg[160];
    std::snprintf(msg, sizeof(msg), "target %.6g not reachable with sharpness >= 1 (s=1 gives %.6g)",
                  target.value, best);
    throw CalibrationError(msg);
  }
  for (int step = 1; step <= 60; ++step) {
    const double mid = 0.5 * (lo + hi);
    const double s = std::exp(mid);
    const double realized = realized_at(s);
    const double err = std::abs(realized - target.value) / target.value;
    if (err < best_err) {
      best_err = err;
      best = realized;
      best_s = s;
    }
    if (err <= 0.02) return {base.sharpened(s), s, realized, step};
    if (need_sharper(realized)) lo = mid;
    else hi = mid;
  }
  char msg[200];
  std::snprintf(msg, sizeof(msg),
                "calibration did not converge in 60 steps: best realized %.6g at sharpness %.6g (target %.6g)",
                best, best_s, target.value);
  throw CalibrationError(msg);
}

void write_profile(const std::string& path, const QualityProfile& profile, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "a1=" << csv::format_double(profile.a1) << '\n'
      << "b1=" << csv::format_double(profile.b1) << '\n'
      << "a0=" << csv::format_double(profile.a0) << '\n'
      << "b0=" << csv::format_double(profile.b0) << '\n'
      << "seed=" << seed << '\n';
}

QualityProfile load_profile(const std::string& path, std::optional<std::uint64_t>* seed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  QualityProfile p;
  bool got[4] = {false, false, false, false};
  std::string line;
  while (std::getline(in, line)) {
    const auto body = csv::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ConfigError(path + ": expected key=value, got '" + line + "'");
    const auto key = csv::trim(body.substr(0, eq));
    const auto value = csv::trim(body.substr(eq + 1));
    if (key == "seed") {
      const auto v = csv::parse_int(value);
      if (!v || *v < 0) throw ConfigError(path + ": bad seed");
      if (seed) *seed = static_cast<std::uint64_t>(*v);
      continue;
    }
    const auto v = csv::parse_double(value);
    if (!v) throw ConfigError(path + ": bad value for '" + std::string(key) + "'");
    if (key == "a1") { p.a1 = *v; got[0] = true; }
    else if (key == "b1") { p.b1 = *v; got[1] = true; }
    else if (key == "a0") { p.a0 = *v; got[2] = true; }
    else if (key == "b0") { p.b0 = *v; got[3] = true; }
    else throw ConfigError(path + ": unknown key '" + std::string(key) + "'");
  }
  for (bool g : got) {
    if (!g) throw ConfigError(path + ": profile needs a1, b1, a0, b0");
  }
  p.validate();
  return p;
}

}  // namespace ppest
