#include "ppest/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "csv.hpp"
#include "ppest/error.hpp"
#include "summation.hpp"

namespace ppest {

const char* estimator_name(EstimatorKind k) noexcept {
  switch (k) {
    case EstimatorKind::kHh: return "hh";
    case EstimatorKind::kSrs: return "srs";
    case EstimatorKind::kDiff: return "diff";
    case EstimatorKind::kStrat: return "strat";
    case EstimatorKind::kCensus: return "census";
  }
  return "unknown";
}

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "hh") return EstimatorKind::kHh;
  if (name == "srs") return EstimatorKind::kSrs;
  if (name == "diff") return EstimatorKind::kDiff;
  if (name == "strat") return EstimatorKind::kStrat;
  if (name == "census") return EstimatorKind::kCensus;
  throw ArgumentError("unknown estimator '" + name + "'");
}

double Estimate::var() const {
  if (!variance) {
    throw VarianceUndefinedError(std::string("variance undefined for ") + estimator_name(estimator) +
                                 " estimate with n=" + std::to_string(n) + " (need n >= 2)");
  }
  return *variance;
}

double Estimate::se() const { return std::sqrt(var()); }

namespace {

int observed_label(const Draw& d, std::size_t k) {
  if (!d.label) throw ArgumentError("draw " + std::to_string(k + 1) + " has no observed y");
  return *d.label;
}

// Sample mean and (n-1)-divisor variance, two-pass.
std::pair<double, double> mean_and_variance(const std::vector<double>& v) {
  detail::CompensatedSum sum;
  for (double x : v) sum.add(x);
  const double mean = sum.value() / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  detail::CompensatedSum ss;
  for (double x : v) ss.add((x - mean) * (x - mean));
  return {mean, ss.value() / static_cast<double>(v.size() - 1)};
}

void require_srs(const Sample& sample, std::int64_t N, const char* what) {
  if (sample.design != Design::kSrsWor) throw ArgumentError(std::string(what) + " requires an SRS_WOR sample");
  if (sample.draws.empty()) throw ArgumentError(std::string(what) + " requires a nonempty sample");
  if (N < static_cast<std::int64_t>(sample.n())) throw ArgumentError(std::string(what) + ": N is smaller than n");
}

// N^2 (1 - n/N) s^2 / n
double expansion_variance(std::int64_t N, std::size_t n, double s2) {
  const double Nd = static_cast<double>(N);
  const double nd = static_cast<double>(n);
  const double fpc = 1.0 - nd / Nd;
  return Nd * Nd * fpc * s2 / nd;
}

}  // namespace

Estimate hh_estimate(const Sample& sample) {
  if (sample.design != Design::kPpsWr) throw ArgumentError("HH estimation requires a PPS_WR sample");
  if (sample.draws.empty()) throw ArgumentError("HH estimation requires at least one draw");
  std::vector<double> z;
  z.reserve(sample.n());
  for (std::size_t k = 0; k < sample.draws.size(); ++k) {
    const Draw& d = sample.draws[k];
    if (!(d.pi > 0.0)) throw ArgumentError("draw " + std::to_string(k + 1) + " has pi <= 0");
    z.push_back(observed_label(d, k) / d.pi);
  }
  const auto [mean, s2] = mean_and_variance(z);
  Estimate e;
  e.estimator = EstimatorKind::kHh;
  e.total = mean;
  e.n = static_cast<std::int64_t>(sample.n());
  e.N = static_cast<std::int64_t>(sample.parent_N);
  if (sample.n() >= 2) e.variance = s2 / static_cast<double>(sample.n());
  return e;
}

double exact_hh_design_variance(const Frame& frame, std::int64_t n) {
  if (!frame.fully_labeled()) throw ArgumentError("exact HH variance requires a fully labeled frame");
  if (n < 1) throw ArgumentError("n must be at least 1");
  const double A = frame.aux_total();
  detail::CompensatedSum inv;
  for (const auto& u : frame.units()) {
    if (*u.label == 1) inv.add(A / u.aux_prob);
  }
  const double t = static_cast<double>(*frame.true_total());
  // Never negative in exact arithmetic (Cauchy-Schwarz); clip rounding.
  return std::max(0.0, (inv.value() - t * t) / static_cast<double>(n));
}

Estimate srs_estimate(const Sample& sample, std::int64_t N) {
  require_srs(sample, N, "SRS estimation");
  std::vector<double> y;
  y.reserve(sample.n());
  for (std::size_t k = 0; k < sample.draws.size(); ++k) y.push_back(observed_label(sample.draws[k], k));
  const auto [mean, s2] = mean_and_variance(y);
  Estimate e;
  e.estimator = EstimatorKind::kSrs;
  e.total = static_cast<double>(N) * mean;
  e.n = static_cast<std::int64_t>(sample.n());
  e.N = N;
  if (sample.n() >= 2) e.variance = expansion_variance(N, sample.n(), s2);
  return e;
}

Estimate difference_estimate(const Sample& sample, double aux_total, std::int64_t N) {
  require_srs(sample, N, "difference estimation");
  std::vector<double> d;
  d.reserve(sample.n());
  for (std::size_t k = 0; k < sample.draws.size(); ++k) {
    d.push_back(observed_label(sample.draws[k], k) - sample.draws[k].aux_prob);
  }
  const auto [mean, s2] = mean_and_variance(d);
  Estimate e;
  e.estimator = EstimatorKind::kDiff;
  e.total = aux_total + static_cast<double>(N) * mean;
  e.n = static_cast<std::int64_t>(sample.n());
  e.N = N;
  if (sample.n() >= 2) e.variance = expansion_variance(N, sample.n(), s2);
  return e;
}

Estimate census_estimate(double total, std::int64_t N) {
  Estimate e;
  e.estimator = EstimatorKind::kCensus;
  e.total = total;
  e.variance = 0.0;
  e.n = N;
  e.N = N;
  return e;
}

Estimate stratified_estimate(std::vector<Estimate::Component> parts) {
  std::set<std::string> ids;
  Estimate e;
  e.estimator = EstimatorKind::kStrat;
  double var = 0.0;
  bool var_defined = true;
  for (const auto& p : parts) {
    if (!ids.insert(p.stratum).second) throw ArgumentError("duplicate stratum id '" + p.stratum + "'");
    e.total += p.estimate.total;
    e.n += p.estimate.n;
    e.N += p.estimate.N;
    if (p.estimate.variance) var += *p.estimate.variance;
    else var_defined = false;
  }
  if (var_defined) e.variance = var;
  e.components = std::move(parts);
  return e;
}

Interval confidence_interval(const Estimate& e, double z) {
  const double half = z * e.se();
  return {e.total - half, e.total + half};
}

double design_effect(double se, double baseline_se_srs) {
  if (!(baseline_se_srs > 0.0)) throw ArgumentError("baseline SRS standard error must be positive");
  const double r = se / baseline_se_srs;
  return r * r;
}

double design_effect(const Estimate& e, double baseline_se_srs) {
  return design_effect(e.se(), baseline_se_srs);
}

double srs_se_for_total(std::int64_t N, double p, std::int64_t n) {
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("prevalence must lie in (0,1)");
  if (N < 2 || n < 1 || n > N) throw ArgumentError("need 1 <= n <= N and N >= 2");
  const double Nd = static_cast<double>(N);
  const double S2 = p * (1.0 - p) * Nd / (Nd - 1.0);
  return std::sqrt(expansion_variance(N, static_cast<std::size_t>(n), S2));
}

std::int64_t equivalent_srs_n(std::int64_t N, double p, double target_se) {
  if (!(target_se > 0.0)) {
    throw ArgumentError("target SE is not achievable; the smallest SRS SE (n=N) is 0");
  }
  const double Nd = static_cast<double>(N);
  const double S2 = p * (1.0 - p) * Nd / (Nd - 1.0);
  if (!(S2 > 0.0)) throw ArgumentError("prevalence must lie in (0,1)");
  // 1/n = se^2 / (N^2 S^2) + 1/N
  const double inv_n = target_se * target_se / (Nd * Nd * S2) + 1.0 / Nd;
  auto n = static_cast<std::int64_t>(std::ceil(1.0 / inv_n));
  n = std::clamp<std::int64_t>(n, 1, N);
  while (n < N && srs_se_for_total(N, p, n) > target_se) ++n;
  while (n > 1 && srs_se_for_total(N, p, n - 1) <= target_se) --n;
  return n;
}

UnderReporting under_reporting(const Estimate& t_hat, std::int64_t t_f, double z) {
  if (t_f < 0) throw ArgumentError("confirmed count t_f must be nonnegative");
  const Interval ci = confidence_interval(t_hat, z);
  const double tf = static_cast<double>(t_f);
  UnderReporting u;
  u.point = t_hat.total - tf;
  u.lo = ci.lo - tf;
  u.hi = ci.hi - tf;
  if (u.lo < 0.0) {
    u.lo = 0.0;
    u.truncated = true;
  }
  if (u.hi < 0.0) {
    u.hi = 0.0;
    u.truncated = true;
  }
  return u;
}

std::optional<double> default_design_effect(const Estimate& e) {
  if (!e.variance || e.N < 2 || e.n < 1 || e.n > e.N) return std::nullopt;
  const double p = e.total / static_cast<double>(e.N);
  if (!(p > 0.0 && p < 1.0)) return std::nullopt;
  return design_effect(e.se(), srs_se_for_total(e.N, p, e.n));
}

namespace {

EstimateRecord record_of(const std::string& name, const Estimate& e, double z, std::optional<double> deff) {
  EstimateRecord r;
  r.estimator = name;
  r.total = e.total;
  r.n = e.n;
  r.N = e.N;
  r.z = z;
  if (e.variance) {
    r.se = std::sqrt(*e.variance);
    r.ci_lo = e.total - z * *r.se;
    r.ci_hi = e.total + z * *r.se;
  }
  r.deff = deff;
  return r;
}

std::string opt(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); }

}  // namespace

std::vector<EstimateRecord> make_records(const Estimate& e, double z, std::optional<double> deff) {
  std::vector<EstimateRecord> out;
  out.push_back(record_of(estimator_name(e.estimator), e, z, deff));
  for (const auto& c : e.components) {
    out.push_back(record_of(c.stratum + "/" + estimator_name(c.estimate.estimator), c.estimate, z, std::nullopt));
  }
  return out;
}

Estimate estimate_from_record(const EstimateRecord& record) {
  const auto slash = record.estimator.rfind('/');
  Estimate e;
  e.estimator = parse_estimator(slash == std::string::npos ? record.estimator : record.estimator.substr(slash + 1));
  e.total = record.total;
  if (record.se) e.variance = *record.se * *record.se;
  e.n = record.n;
  e.N = record.N;
  return e;
}

void write_records(const std::string& path, const std::vector<EstimateRecord>& records, const Metadata& meta) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  csv::write_meta(out, meta);
  out << "estimator,total,se,n,N,z,ci_lo,ci_hi,deff\n";
  for (const auto& r : records) {
    out << csv::quote(r.estimator) << ',' << csv::format_double(r.total) << ',' << opt(r.se) << ',' << r.n << ','
        << r.N << ',' << csv::format_double(r.z) << ',' << opt(r.ci_lo) << ',' << opt(r.ci_hi) << ','
        << opt(r.deff) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<EstimateRecord> load_records(const std::string& path, Metadata* meta) {
  const csv::Table table = csv::read_file(path);
  static const char* kCols[] = {"estimator", "total", "se", "n", "N", "z", "ci_lo", "ci_hi", "deff"};
  std::size_t idx[9];
  for (int i = 0; i < 9; ++i) {
    const auto c = table.column(kCols[i]);
    if (!c) throw IngestionError(path + ": missing column '" + kCols[i] + "'");
    idx[i] = *c;
  }
  std::vector<EstimateRecord> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = path + ":" + std::to_string(table.line_numbers[r]);
    const auto field = [&](int i) -> std::string_view {
      return idx[i] < row.size() ? std::string_view(row[idx[i]]) : std::string_view{};
    };
    const auto real = [&](int i) -> std::optional<double> {
      if (csv::trim(field(i)).empty()) return std::nullopt;
      const auto v = csv::parse_double(field(i));
      if (!v) throw IngestionError(where + ": bad " + kCols[i]);
      return v;
    };
    const auto integer = [&](int i) -> std::int64_t {
      const auto v = csv::parse_int(field(i));
      if (!v) throw IngestionError(where + ": bad " + kCols[i]);
      return *v;
    };
    EstimateRecord rec;
    rec.estimator = std::string(csv::trim(field(0)));
    const auto total = real(1);
    if (!total) throw IngestionError(where + ": missing total");
    rec.total = *total;
    rec.se = real(2);
    rec.n = integer(3);
    rec.N = integer(4);
    rec.z = real(5).value_or(kDefaultZ);
    rec.ci_lo = real(6);
    rec.ci_hi = real(7);
    rec.deff = real(8);
    out.push_back(std::move(rec));
  }
  if (meta) *meta = table.meta;
  return out;
}

}  // namespace ppest
