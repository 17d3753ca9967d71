#include "ppest/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "csv.hpp"
#include "ppest/error.hpp"
#include "summation.hpp"

namespace ppest {

const char* sim_design_name(SimDesign d) noexcept {
  switch (d) {
    case SimDesign::kSrs: return "srs";
    case SimDesign::kPps: return "pps";
    case SimDesign::kStratified: return "stratified";
  }
  return "unknown";
}

const char* sim_estimator_name(SimEstimator e) noexcept {
  switch (e) {
    case SimEstimator::kHh: return "hh";
    case SimEstimator::kSrs: return "srs";
    case SimEstimator::kDiff: return "diff";
    case SimEstimator::kStratSrs: return "strat-srs";
    case SimEstimator::kStratDiff: return "strat-diff";
  }
  return "unknown";
}

SimEstimator parse_sim_estimator(const std::string& name) {
  if (name == "hh") return SimEstimator::kHh;
  if (name == "srs") return SimEstimator::kSrs;
  if (name == "diff") return SimEstimator::kDiff;
  if (name == "strat-srs") return SimEstimator::kStratSrs;
  if (name == "strat-diff") return SimEstimator::kStratDiff;
  throw ConfigError("unknown simulation estimator '" + name + "'");
}

SimDesign natural_design(SimEstimator e) noexcept {
  switch (e) {
    case SimEstimator::kHh: return SimDesign::kPps;
    case SimEstimator::kSrs:
    case SimEstimator::kDiff: return SimDesign::kSrs;
    case SimEstimator::kStratSrs:
    case SimEstimator::kStratDiff: return SimDesign::kStratified;
  }
  return SimDesign::kPps;
}

std::size_t Histogram::total_count() const noexcept {
  std::size_t n = 0;
  for (const auto& b : bins) n += b.count;
  return n;
}

std::size_t Histogram::zero_count() const noexcept {
  for (const auto& b : bins) {
    if (b.point_mass) return b.count;
  }
  return 0;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Runs body(r) for r in [0, count) over `threads` workers with contiguous
// blocks. Each r writes only its own slot, so the result is order-free.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body body) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t r = 0; r < count; ++r) body(r);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    const std::size_t block = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          const std::size_t begin = w * block;
          const std::size_t end = std::min(count, begin + block);
          for (std::size_t r = begin; r < end; ++r) body(r);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::pair<double, double> mean_sd(std::span<const double> v) {
  detail::CompensatedSum s;
  for (double x : v) s.add(x);
  const double mean = s.value() / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  detail::CompensatedSum ss;
  for (double x : v) ss.add((x - mean) * (x - mean));
  return {mean, std::sqrt(ss.value() / static_cast<double>(v.size() - 1))};
}

bool any_positive(const Sample& s) {
  return std::any_of(s.draws.begin(), s.draws.end(), [](const Draw& d) { return d.label && *d.label == 1; });
}

struct Replicate {
  double total = 0.0;
  std::optional<double> variance;
  double zero_total = 0.0;
  bool zero_empty = false;
};

}  // namespace

Histogram make_histogram(std::span<const double> values) {
  Histogram h;
  std::vector<double> rest;
  std::size_t zeros = 0;
  for (double v : values) {
    if (v == 0.0) ++zeros;
    else rest.push_back(v);
  }
  if (zeros > 0) h.bins.push_back({0.0, 0.0, zeros, true});
  if (rest.empty()) return h;

  std::sort(rest.begin(), rest.end());
  const double lo = rest.front();
  const double hi = rest.back();
  if (hi == lo) {
    h.bins.push_back({lo, hi, rest.size(), false});
    return h;
  }
  const double iqr = quantile_sorted(rest, 0.75) - quantile_sorted(rest, 0.25);
  double width = 2.0 * iqr / std::cbrt(static_cast<double>(rest.size()));
  if (!(width > 0.0)) width = (hi - lo) / std::ceil(std::sqrt(static_cast<double>(rest.size())));
  std::size_t nbins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
  nbins = std::clamp<std::size_t>(nbins, 1, 512);
  width = (hi - lo) / static_cast<double>(nbins);

  const std::size_t first = h.bins.size();
  for (std::size_t k = 0; k < nbins; ++k) {
    const double b_lo = lo + width * static_cast<double>(k);
    const double b_hi = k + 1 == nbins ? hi : lo + width * static_cast<double>(k + 1);
    h.bins.push_back({b_lo, b_hi, 0, false});
  }
  for (double v : rest) {
    auto k = static_cast<std::size_t>((v - lo) / width);
    if (k >= nbins) k = nbins - 1;
    ++h.bins[first + k].count;
  }
  return h;
}

double sample_skewness(std::span<const double> values) {
  if (values.size() < 3) return 0.0;
  const double n = static_cast<double>(values.size());
  detail::CompensatedSum s;
  for (double x : values) s.add(x);
  const double mean = s.value() / n;
  detail::CompensatedSum m2, m3;
  for (double x : values) {
    const double d = x - mean;
    m2.add(d * d);
    m3.add(d * d * d);
  }
  const double v2 = m2.value() / n;
  if (!(v2 > 0.0)) return 0.0;
  return (m3.value() / n) / std::pow(v2, 1.5);
}

double hypergeometric_zero_probability(std::size_t N0, std::size_t M, std::size_t n0) {
  if (M > N0 || n0 > N0) throw ArgumentError("hypergeometric parameters out of range");
  if (M == 0) return 1.0;
  if (n0 > N0 - M) return 0.0;
  // C(N0 - M, n0) / C(N0, n0)
  const auto lc = [](double a, double b) { return std::lgamma(a + 1) - std::lgamma(b + 1) - std::lgamma(a - b + 1); };
  return std::exp(lc(double(N0 - M), double(n0)) - lc(double(N0), double(n0)));
}

SimReport run_replications(const Frame& frame, const SimConfig& config) {
  if (!frame.fully_labeled()) throw ArgumentError("simulation requires a fully labeled frame");
  if (config.R == 0) throw ConfigError("replicate count R must be at least 1");
  if (config.n == 0) throw ConfigError("sample size n must be at least 1");
  if (natural_design(config.estimator) != config.design) {
    throw ConfigError(std::string("estimator '") + sim_estimator_name(config.estimator) +
                      "' cannot run under design '" + sim_design_name(config.design) + "'");
  }

  SimReport report;
  report.config = config;
  report.N = frame.size();
  report.true_total = frame.true_total();
  std::vector<Replicate> reps(config.R);
  const auto N = static_cast<std::int64_t>(frame.size());

  switch (config.design) {
    case SimDesign::kPps: {
      const PpsSampler sampler(frame);
      parallel_for(config.R, config.threads, [&](std::size_t r) {
        Rng rng = make_rng(config.seed, r);
        const Estimate e = hh_estimate(sampler.draw(config.n, rng));
        reps[r] = {e.total, e.variance, 0.0, false};
      });
      break;
    }
    case SimDesign::kSrs: {
      if (config.n > frame.size()) throw ConfigError("SRS sample size exceeds the frame size");
      parallel_for(config.R, config.threads, [&](std::size_t r) {
        Rng rng = make_rng(config.seed, r);
        const Sample s = srs_wor(frame, config.n, rng);
        const Estimate e = config.estimator == SimEstimator::kDiff ? difference_estimate(s, frame.aux_total(), N)
                                                                   : srs_estimate(s, N);
        reps[r] = {e.total, e.variance, 0.0, false};
      });
      break;
    }
    case SimDesign::kStratified: {
      const StratifiedFrame strata = stratify_by_prediction(frame, config.tau);
      const AllocationPlan plan = allocate(strata, config.n, config.allocation);
      report.allocation = plan;
      const auto& one = strata.stratum(kStratumOne);
      const auto& zero = strata.stratum(kStratumZero);
      const std::size_t n1 = plan.size_of(kStratumOne);
      const std::size_t n0 = plan.size_of(kStratumZero);
      const bool diff = config.estimator == SimEstimator::kStratDiff;
      parallel_for(config.R, config.threads, [&](std::size_t r) {
        Rng rng = make_rng(config.seed, r);
        std::vector<Estimate::Component> parts;
        Replicate rep;
        if (one.frame) {
          const Sample s = srs_wor(*one.frame, n1, rng);
          parts.push_back({kStratumOne, srs_estimate(s, static_cast<std::int64_t>(one.size()))});
        }
        if (zero.frame) {
          const Sample s = srs_wor(*zero.frame, n0, rng);
          const auto N0 = static_cast<std::int64_t>(zero.size());
          Estimate e = diff ? difference_estimate(s, zero.frame->aux_total(), N0) : srs_estimate(s, N0);
          rep.zero_empty = !any_positive(s);
          rep.zero_total = e.total;
          parts.push_back({kStratumZero, std::move(e)});
        } else {
          rep.zero_empty = true;
        }
        const Estimate e = stratified_estimate(std::move(parts));
        rep.total = e.total;
        rep.variance = e.variance;
        reps[r] = rep;
      });
      std::size_t empty = 0;
      report.zero_stratum_totals.reserve(config.R);
      for (const auto& rep : reps) {
        empty += rep.zero_empty ? 1 : 0;
        report.zero_stratum_totals.push_back(rep.zero_total);
      }
      report.zero_stratum_empty_fraction = static_cast<double>(empty) / static_cast<double>(config.R);
      const std::size_t M = zero.frame ? static_cast<std::size_t>(zero.frame->labeled_positives()) : 0;
      report.zero_stratum_empty_predicted = hypergeometric_zero_probability(zero.size(), M, zero.frame ? n0 : 0);
      report.zero_stratum_histogram = make_histogram(report.zero_stratum_totals);
      break;
    }
  }

  report.estimates.reserve(config.R);
  report.estimated_variances.reserve(config.R);
  detail::CompensatedSum var_sum;
  std::size_t var_count = 0;
  for (const auto& rep : reps) {
    report.estimates.push_back(rep.total);
    report.estimated_variances.push_back(rep.variance);
    if (rep.variance) {
      var_sum.add(*rep.variance);
      ++var_count;
    }
  }
  report.variance_undefined = config.R - var_count;
  if (var_count > 0) report.mean_estimated_variance = var_sum.value() / static_cast<double>(var_count);
  const auto [mean, sd] = mean_sd(report.estimates);
  report.empirical_mean = mean;
  report.empirical_se = sd;
  if (report.true_total) report.bias = mean - static_cast<double>(*report.true_total);
  report.skewness = sample_skewness(report.estimates);
  report.histogram = make_histogram(report.estimates);
  if (config.R == 1) report.warnings.emplace_back("degenerate R=1: empirical SE reported as 0");
  if (report.variance_undefined > 0) {
    report.warnings.push_back(std::to_string(report.variance_undefined) +
                              " replicate(s) had an undefined variance estimate");
  }
  return report;
}

void attach_srs_baseline(SimReport& report, const SimReport& srs) {
  report.srs_empirical_se = srs.empirical_se;
  report.deff_vs_srs = design_effect(report.empirical_se, srs.empirical_se);
}

BimodalityResult zero_stratum_bimodality(const Frame& frame, double tau, const AllocationPlan& plan,
                                         std::size_t R, std::uint64_t seed, unsigned threads) {
  if (!frame.fully_labeled()) throw ArgumentError("bimodality analysis requires a fully labeled frame");
  if (R == 0) throw ConfigError("replicate count R must be at least 1");
  const StratifiedFrame strata = stratify_by_prediction(frame, tau);
  const auto& zero = strata.stratum(kStratumZero);
  BimodalityResult out;
  out.R = R;
  out.N0 = zero.size();
  out.n0 = plan.size_of(kStratumZero);
  if (!zero.frame) {
    out.fraction = 1.0;
    out.predicted = 1.0;
    return out;
  }
  if (out.n0 > out.N0) throw AllocationError("zero-stratum allocation exceeds the stratum size");
  out.M = static_cast<std::size_t>(zero.frame->labeled_positives());
  std::vector<char> empty(R, 0);
  parallel_for(R, threads, [&](std::size_t r) {
    Rng rng = make_rng(seed, r);
    empty[r] = any_positive(srs_wor(*zero.frame, out.n0, rng)) ? 0 : 1;
  });
  const auto hits = static_cast<double>(std::count(empty.begin(), empty.end(), 1));
  out.fraction = hits / static_cast<double>(R);
  out.predicted = hypergeometric_zero_probability(out.N0, out.M, out.n0);
  out.binomial_se = std::sqrt(out.predicted * (1.0 - out.predicted) / static_cast<double>(R));
  return out;
}

std::vector<SweepPoint> loss_sweep(const Frame& frame, std::span<const double> loss_targets,
                                           std::size_t n, std::size_t R, std::uint64_t seed,
                                           unsigned threads, const QualityProfile& base) {
  if (!frame.fully_labeled()) throw ArgumentError("the sweep requires a fully labeled frame");
  if (loss_targets.empty()) throw ArgumentError("the sweep needs at least one loss target");
  for (std::size_t k = 0; k < loss_targets.size(); ++k) {
    if (!(loss_targets[k] > 0.0)) throw ArgumentError("loss targets must be positive");
    if (k > 0 && !(loss_targets[k] < loss_targets[k - 1])) {
      throw ArgumentError("loss targets must be strictly decreasing");
    }
  }
  if (n == 0 || R < 2) throw ArgumentError("the sweep needs n >= 1 and R >= 2");

  std::vector<SweepPoint> out;
  for (double target : loss_targets) {
    CalibrationResult cal;
    try {
      cal = calibrate_profile(frame, {CalibrationTarget::Kind::kMeanLoss, target, 0.5}, seed, base);
    } catch (const CalibrationError& e) {
      throw CalibrationError("sweep failed at loss target " + csv::format_double(target) + ": " + e.what());
    }
    const Frame sharpened = simulate_predictions(frame, cal.profile, seed);
    SweepPoint p;
    p.target = target;
    p.sharpness = cal.sharpness;
    p.profile = cal.profile;
    p.realized_loss = mean_loss(sharpened);
    p.exact_variance = exact_hh_design_variance(sharpened, static_cast<std::int64_t>(n));

    const PpsSampler sampler(sharpened);
    std::vector<double> est(R);
    parallel_for(R, threads, [&](std::size_t r) {
      Rng rng = make_rng(seed, r);
      est[r] = hh_estimate(sampler.draw(n, rng)).total;
    });
    const double sd = mean_sd(est).second;
    p.empirical_variance = sd * sd;
    out.push_back(p);
  }
  return out;
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json histogram_json(const Histogram& h) {
  ordered_json bins = ordered_json::array();
  for (const auto& b : h.bins) {
    bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}, {"point_mass", b.point_mass}});
  }
  return bins;
}

template <typename T>
ordered_json opt_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

void write_report_json(const std::string& path, const SimReport& r, const Metadata& config) {
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  ordered_json j;
  j["config"] = cfg;
  j["estimator"] = sim_estimator_name(r.config.estimator);
  j["design"] = sim_design_name(r.config.design);
  j["seed"] = r.config.seed;
  j["R"] = r.config.R;
  j["n"] = r.config.n;
  j["N"] = r.N;
  j["true_total"] = opt_json(r.true_total);
  j["empirical_mean"] = r.empirical_mean;
  j["empirical_se"] = r.empirical_se;
  j["bias"] = opt_json(r.bias);
  j["mean_estimated_variance"] = opt_json(r.mean_estimated_variance);
  j["variance_undefined"] = r.variance_undefined;
  j["srs_empirical_se"] = opt_json(r.srs_empirical_se);
  j["deff_vs_srs"] = opt_json(r.deff_vs_srs);
  j["skewness"] = r.skewness;
  if (r.allocation) {
    ordered_json a;
    a["rule"] = allocation_rule_name(r.allocation->rule);
    for (const auto& [id, n] : r.allocation->sizes) a["sizes"][id] = n;
    j["allocation"] = a;
  }
  j["zero_stratum_empty_fraction"] = opt_json(r.zero_stratum_empty_fraction);
  j["zero_stratum_empty_predicted"] = opt_json(r.zero_stratum_empty_predicted);
  j["histogram"] = histogram_json(r.histogram);
  if (r.zero_stratum_histogram) j["zero_stratum_histogram"] = histogram_json(*r.zero_stratum_histogram);
  j["warnings"] = r.warnings;

  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_replicates_csv(const std::string& path, const SimReport& r, const Metadata& config) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  csv::write_meta(out, config);
  const bool strat = !r.zero_stratum_totals.empty();
  out << "replicate,estimate,variance" << (strat ? ",zero_stratum_total" : "") << '\n';
  for (std::size_t k = 0; k < r.estimates.size(); ++k) {
    out << k << ',' << csv::format_double(r.estimates[k]) << ',';
    if (r.estimated_variances[k]) out << csv::format_double(*r.estimated_variances[k]);
    if (strat) out << ',' << csv::format_double(r.zero_stratum_totals[k]);
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_histogram_csv(const std::string& path, const Histogram& h, const Metadata& config) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  csv::write_meta(out, config);
  out << "lo,hi,count,point_mass\n";
  for (const auto& b : h.bins) {
    out << csv::format_double(b.lo) << ',' << csv::format_double(b.hi) << ',' << b.count << ','
        << (b.point_mass ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace ppest
