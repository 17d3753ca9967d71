// ppest command-line driver. Talks to the library only through ppest.h.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ppest/ppest.h"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Any failure surfaces as one of these; `status` picks the exit code.
struct Failure {
  ppest_status status;
  std::string message;
};

[[noreturn]] void fail(ppest_status s, std::string message) { throw Failure{s, std::move(message)}; }
[[noreturn]] void config_error(std::string message) { fail(PPEST_E_CONFIG, std::move(message)); }

void check(ppest_status s) {
  if (s != PPEST_OK) fail(s, ppest_last_error());
}

int exit_code_for(ppest_status s) {
  switch (s) {
    case PPEST_E_CALIBRATION:
    case PPEST_E_UNDEFINED_METRIC:
    case PPEST_E_VARIANCE_UNDEFINED: return 3;
    default: return 2;
  }
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c == '\n' ? ' ' : c);
  }
  return out;
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Meta = std::unique_ptr<ppest_meta, Deleter<ppest_meta, ppest_meta_free>>;
using FramePtr = std::unique_ptr<ppest_frame, Deleter<ppest_frame, ppest_frame_free>>;
using StrataPtr = std::unique_ptr<ppest_strata, Deleter<ppest_strata, ppest_strata_free>>;
using SamplePtr = std::unique_ptr<ppest_sample, Deleter<ppest_sample, ppest_sample_free>>;
using EstimatePtr = std::unique_ptr<ppest_estimate, Deleter<ppest_estimate, ppest_estimate_free>>;
using RecordsPtr = std::unique_ptr<ppest_records, Deleter<ppest_records, ppest_records_free>>;
using ReportPtr = std::unique_ptr<ppest_sim_report, Deleter<ppest_sim_report, ppest_sim_report_free>>;

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string fmt_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Resolved configuration: defaults < config file < flags.

struct Param {
  std::string key;
  std::string fallback;
  std::string help;
  bool list = false;  // repeatable flag, stored ';'-joined
};

class Config {
 public:
  Config(std::string command, std::vector<Param> params) : command_(std::move(command)), params_(std::move(params)) {
    for (const auto& p : params_) values_[p.key] = p.fallback;
    values_["paper_mode"] = "false";
  }

  const std::string& command() const { return command_; }
  const std::vector<Param>& params() const { return params_; }
  bool knows(const std::string& key) const { return values_.count(key) > 0 || key == "seed"; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string str(const std::string& key) const {
    const auto it = values_.find(key);
    return it == values_.end() ? std::string() : it->second;
  }
  std::string required(const std::string& key) const {
    const std::string v = str(key);
    if (v.empty()) config_error("missing required setting '" + key + "'");
    return v;
  }
  bool has(const std::string& key) const { return !str(key).empty(); }

  double real(const std::string& key) const {
    const std::string v = required(key);
    double out = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out)) {
      config_error("setting '" + key + "' is not a number: '" + v + "'");
    }
    return out;
  }
  long long integer(const std::string& key) const {
    const std::string v = required(key);
    long long out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
      config_error("setting '" + key + "' is not an integer: '" + v + "'");
    }
    return out;
  }
  std::size_t count(const std::string& key) const {
    const long long v = integer(key);
    if (v < 0) config_error("setting '" + key + "' must be nonnegative");
    return static_cast<std::size_t>(v);
  }
  bool flag(const std::string& key) const {
    const std::string v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v.empty() || v == "false" || v == "0" || v == "no") return false;
    config_error("setting '" + key + "' is not a boolean: '" + v + "'");
  }

  bool paper_mode() const { return flag("paper_mode"); }
  std::optional<std::uint64_t> seed;
  bool stochastic = false;

  // Audit record: command, seed, then every setting in declaration order.
  std::vector<std::pair<std::string, std::string>> audit() const {
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("command", command_);
    if (stochastic && seed) out.emplace_back("seed", std::to_string(*seed));
    for (const auto& p : params_) out.emplace_back(p.key, str(p.key));
    out.emplace_back("paper_mode", paper_mode() ? "true" : "false");
    return out;
  }

  Meta meta() const {
    ppest_meta* raw = nullptr;
    check(ppest_meta_create(&raw));
    Meta m(raw);
    for (const auto& [k, v] : audit()) check(ppest_meta_set(m.get(), k.c_str(), v.c_str()));
    return m;
  }

  ordered_json json() const {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : audit()) j[k] = v;
    return j;
  }

 private:
  std::string command_;
  std::vector<Param> params_;
  std::map<std::string, std::string> values_;
};

// Reads key=value pairs. A file with `#!` lines (an earlier output) yields
// only those; a JSON file yields its "config" object.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path, bool& from_header) {
  std::ifstream in(path);
  if (!in) fail(PPEST_E_IO, "cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<std::pair<std::string, std::string>> out;
  from_header = false;

  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    ordered_json j;
    try {
      j = ordered_json::parse(text);
    } catch (const std::exception& e) {
      config_error("config '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object()) config_error("config '" + path + "' has no config object");
    for (const auto& [k, v] : j["config"].items()) out.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
    from_header = true;
    return out;
  }

  std::istringstream lines(text);
  std::string line;
  std::vector<std::pair<std::string, std::string>> plain;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const bool header = line.rfind("#!", 0) == 0;
    std::string body = header ? line.substr(2) : line;
    if (!header) {
      const auto hash = body.find('#');
      if (hash != std::string::npos) body.erase(hash);
    }
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      if (from_header || header) continue;
      config_error(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    auto kv = std::make_pair(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    if (header) {
      if (!from_header) out.clear();
      from_header = true;
      out.push_back(std::move(kv));
    } else if (!from_header) {
      plain.push_back(std::move(kv));
    }
  }
  return from_header ? out : plain;
}

// ---------------------------------------------------------------------------

fs::path out_path(const fs::path& dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(PPEST_E_IO, "cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir / name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(PPEST_E_IO, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) fail(PPEST_E_IO, "write failed for '" + path.string() + "'");
}

std::string header_lines(const Config& cfg) {
  std::string s;
  for (const auto& [k, v] : cfg.audit()) s += "#! " + k + "=" + v + "\n";
  return s;
}

FramePtr load_frame(const std::string& path) {
  ppest_frame* raw = nullptr;
  check(ppest_frame_load(path.c_str(), nullptr, nullptr, nullptr, &raw, nullptr));
  return FramePtr(raw);
}

double z_of(const Config& cfg) { return cfg.paper_mode() ? 2.0 : cfg.real("z"); }

ppest_allocation_rule rule_of(const Config& cfg) {
  ppest_allocation_rule r{};
  if (ppest_parse_allocation_rule(cfg.required("allocation").c_str(), &r) != PPEST_OK) {
    config_error(ppest_last_error());
  }
  return r;
}

// ---------------------------------------------------------------------------
// generate

void run_generate(const Config& cfg, const fs::path& out) {
  const std::size_t N = cfg.count("N");
  const std::size_t positives = cfg.count("positives");
  ppest_profile base{cfg.real("a1"), cfg.real("b1"), cfg.real("a0"), cfg.real("b0")};
  if (cfg.has("profile")) check(ppest_profile_load(cfg.str("profile").c_str(), &base, nullptr, nullptr));
  const std::uint64_t seed = *cfg.seed;

  ppest_frame* raw = nullptr;
  check(ppest_frame_synthesize(N, positives, &base, seed, &raw));
  FramePtr frame(raw);
  ppest_profile used = base;

  const std::string mode = cfg.str("calibrate");
  if (mode != "none") {
    ppest_target_kind kind{};
    if (mode == "f1") kind = PPEST_TARGET_F1;
    else if (mode == "loss") kind = PPEST_TARGET_MEAN_LOSS;
    else config_error("calibrate must be none, f1 or loss");
    ppest_calibration cal{};
    check(ppest_calibrate(frame.get(), kind, cfg.real("target"), cfg.real("tau"), seed, &base, &cal));
    used = cal.profile;
    check(ppest_frame_simulate_predictions(frame.get(), &used, seed, &raw));
    frame.reset(raw);
    std::cout << "calibrated sharpness " << fmt(cal.sharpness) << " realized " << fmt(cal.realized) << " after "
              << cal.steps << " step(s)\n";
  }

  const Meta meta = cfg.meta();
  const fs::path frame_path = out_path(out, "frame.csv");
  check(ppest_frame_write(frame_path.string().c_str(), frame.get(), meta.get()));
  check(ppest_profile_write(out_path(out, "profile.txt").string().c_str(), &used, seed));
  std::cout << "wrote " << frame_path.string() << " (N=" << N << ", positives=" << positives << ")\n";
}

// ---------------------------------------------------------------------------
// metrics

void run_metrics(const Config& cfg, const fs::path& out) {
  const FramePtr frame = load_frame(cfg.required("frame"));
  ppest_frame_info info{};
  check(ppest_frame_info_get(frame.get(), &info));
  if (!info.fully_labeled) fail(PPEST_E_ARGUMENT, "metrics need a fully labeled frame");
  double loss = 0.0;
  check(ppest_population_loss(frame.get(), &loss));
  ppest_confusion c{};
  check(ppest_confusion_counts(frame.get(), cfg.real("tau"), &c));
  double f1 = 0.0;
  const ppest_status f1_status = ppest_f1_from_counts(&c, &f1);

  ordered_json j;
  j["config"] = cfg.json();
  j["N"] = info.size;
  j["true_total"] = info.true_total;
  j["aux_total"] = info.aux_total;
  j["loss"] = loss;
  j["mean_loss"] = loss / static_cast<double>(info.size);
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
  j["tn"] = c.tn;
  j["f1"] = f1_status == PPEST_OK ? ordered_json(f1) : ordered_json(nullptr);
  write_text(out_path(out, "metrics.json"), j.dump(2) + "\n");

  std::cout << "N=" << info.size << " t=" << info.true_total << " loss=" << fmt(loss)
            << " mean_loss=" << fmt(loss / static_cast<double>(info.size)) << "\n";
  std::cout << "tp=" << c.tp << " fp=" << c.fp << " fn=" << c.fn << " tn=" << c.tn << " f1="
            << (f1_status == PPEST_OK ? fmt(f1) : std::string("undefined")) << "\n";
  if (f1_status != PPEST_OK) fail(f1_status, ppest_last_error());
}

// ---------------------------------------------------------------------------
// sample

SamplePtr draw_sample(const ppest_frame* frame, const std::string& design, std::size_t n, std::uint64_t seed) {
  ppest_sample* raw = nullptr;
  if (design == "srs") check(ppest_sample_srs(frame, n, seed, &raw));
  else if (design == "pps") check(ppest_sample_pps(frame, n, seed, &raw));
  else config_error("design_type must be srs, pps or stratified");
  return SamplePtr(raw);
}

void run_sample(const Config& cfg, const fs::path& out) {
  const FramePtr frame = load_frame(cfg.required("frame"));
  const std::string design = cfg.required("design_type");
  const std::size_t n = cfg.count("n");
  const std::uint64_t seed = *cfg.seed;
  const Meta meta = cfg.meta();
  const std::string only = cfg.str("stratum");

  if (design != "stratified" && only.empty()) {
    const SamplePtr s = draw_sample(frame.get(), design, n, seed);
    const fs::path p = out_path(out, "sample.csv");
    check(ppest_sample_write(p.string().c_str(), s.get(), frame.get(), meta.get()));
    std::cout << "wrote " << p.string() << " (n=" << n << ")\n";
    return;
  }

  ppest_strata* sraw = nullptr;
  check(ppest_stratify(frame.get(), cfg.real("tau"), &sraw));
  const StrataPtr strata(sraw);
  const std::size_t k = ppest_strata_count(strata.get());
  std::vector<std::size_t> sizes(k, 0);
  if (design == "stratified") {
    if (!only.empty()) config_error("stratum cannot be combined with design_type=stratified");
    check(ppest_allocate(strata.get(), n, rule_of(cfg), sizes.data(), sizes.size()));
  }
  bool matched = false;
  for (std::size_t i = 0; i < k; ++i) {
    const char* id = nullptr;
    check(ppest_strata_at(strata.get(), i, &id, nullptr));
    if (!only.empty() && only != id) continue;
    matched = true;
    ppest_frame* fraw = nullptr;
    check(ppest_strata_frame(strata.get(), i, &fraw));
    const FramePtr sub(fraw);
    if (!sub) {
      std::cout << "stratum " << id << " is empty; no sample written\n";
      continue;
    }
    const std::size_t n_h = design == "stratified" ? sizes[i] : n;
    const std::string sub_design = design == "stratified" ? "srs" : design;
    // Each stratum draws from its own seed offset so the samples are independent.
    const SamplePtr s = draw_sample(sub.get(), sub_design, n_h, seed + i);
    const fs::path p = out_path(out, std::string("sample_") + id + ".csv");
    check(ppest_sample_write(p.string().c_str(), s.get(), sub.get(), meta.get()));
    std::cout << "wrote " << p.string() << " (n=" << n_h << ")\n";
  }
  if (!matched) config_error("unknown stratum '" + only + "' (expected one or zero)");
}

// ---------------------------------------------------------------------------
// estimate

SamplePtr load_sample(const std::string& path) {
  ppest_sample* raw = nullptr;
  check(ppest_sample_load(path.c_str(), &raw, nullptr));
  return SamplePtr(raw);
}

EstimatePtr estimate_one(const std::string& kind, const ppest_sample* s, std::optional<long long> N_override,
                         std::optional<double> aux_override) {
  ppest_sample_info info{};
  check(ppest_sample_info_get(s, &info));
  const auto N = N_override ? *N_override : static_cast<long long>(info.parent_N);
  if (kind != "hh" && N < 1) config_error("population size N unknown: set N or record parent_N in the sample");
  ppest_estimate* raw = nullptr;
  if (kind == "hh") {
    check(ppest_estimate_hh(s, &raw));
  } else if (kind == "srs") {
    check(ppest_estimate_srs(s, N, &raw));
  } else if (kind == "diff") {
    const double aux = aux_override ? *aux_override : info.parent_aux_total;
    check(ppest_estimate_difference(s, aux, N, &raw));
  } else {
    config_error("unknown estimator '" + kind + "' for a sample");
  }
  return EstimatePtr(raw);
}

EstimatePtr build_stratified(const Config& cfg) {
  std::vector<std::string> ids;
  std::vector<EstimatePtr> parts;
  for (const auto& spec : split(cfg.str("strata"), ';')) {
    // id=FILE:kind
    const auto eq = spec.find('=');
    const auto colon = spec.rfind(':');
    if (eq == std::string::npos || colon == std::string::npos || colon < eq) {
      config_error("stratum spec '" + spec + "' must look like id=FILE:srs|diff|hh");
    }
    const SamplePtr s = load_sample(spec.substr(eq + 1, colon - eq - 1));
    ids.push_back(spec.substr(0, eq));
    parts.push_back(estimate_one(spec.substr(colon + 1), s.get(), std::nullopt, std::nullopt));
  }
  for (const auto& spec : split(cfg.str("census"), ';')) {
    // id=TOTAL:N
    const auto eq = spec.find('=');
    const auto colon = spec.rfind(':');
    if (eq == std::string::npos || colon == std::string::npos || colon < eq) {
      config_error("census spec '" + spec + "' must look like id=TOTAL:N");
    }
    double total = 0.0;
    long long N = 0;
    const std::string t = spec.substr(eq + 1, colon - eq - 1);
    const std::string n = spec.substr(colon + 1);
    if (std::from_chars(t.data(), t.data() + t.size(), total).ptr != t.data() + t.size() ||
        std::from_chars(n.data(), n.data() + n.size(), N).ptr != n.data() + n.size()) {
      config_error("census spec '" + spec + "' has a malformed number");
    }
    ppest_estimate* raw = nullptr;
    check(ppest_estimate_census(total, N, &raw));
    ids.push_back(spec.substr(0, eq));
    parts.emplace_back(raw);
  }
  if (parts.empty()) config_error("estimator strat needs at least one strata or census entry");
  std::vector<const char*> id_ptrs;
  std::vector<const ppest_estimate*> part_ptrs;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    id_ptrs.push_back(ids[k].c_str());
    part_ptrs.push_back(parts[k].get());
  }
  ppest_estimate* raw = nullptr;
  check(ppest_estimate_stratified(id_ptrs.data(), part_ptrs.data(), parts.size(), &raw));
  return EstimatePtr(raw);
}

void run_estimate(const Config& cfg, const fs::path& out) {
  const std::string kind = cfg.required("estimator");
  EstimatePtr est;
  if (kind == "strat") {
    est = build_stratified(cfg);
  } else {
    const SamplePtr s = load_sample(cfg.required("sample"));
    std::optional<long long> N;
    std::optional<double> aux;
    if (cfg.has("N")) N = cfg.integer("N");
    if (cfg.has("aux_total")) aux = cfg.real("aux_total");
    est = estimate_one(kind, s.get(), N, aux);
  }
  const double z = z_of(cfg);
  const Meta meta = cfg.meta();
  const fs::path p = out_path(out, "estimate.csv");
  check(ppest_records_write(p.string().c_str(), est.get(), z, nullptr, meta.get()));

  ppest_estimate_info info{};
  check(ppest_estimate_info_get(est.get(), &info));
  std::cout << ppest_estimator_name(info.estimator) << " total=" << fmt(info.total);
  if (info.has_variance) {
    double lo = 0, hi = 0;
    check(ppest_confidence_interval(est.get(), z, &lo, &hi));
    std::cout << " se=" << fmt(std::sqrt(info.variance)) << " ci=[" << fmt(lo) << ", " << fmt(hi) << "]";
  }
  std::cout << "\n";

  if (cfg.has("t_f") && info.has_variance) {
    ppest_under_reporting u{};
    check(ppest_under_reporting_get(est.get(), cfg.integer("t_f"), z, &u));
    std::string text = header_lines(cfg) + "point,lo,hi,truncated\n" + fmt(u.point) + "," + fmt(u.lo) + "," +
                       fmt(u.hi) + "," + (u.truncated ? "1" : "0") + "\n";
    write_text(out_path(out, "under_reporting.csv"), text);
    std::cout << "under-reporting " << fmt(u.point) << " [" << fmt(u.lo) << ", " << fmt(u.hi) << "]"
              << (u.truncated ? " (truncated at 0)" : "") << "\n";
  }
  if (!info.has_variance) {
    fail(PPEST_E_VARIANCE_UNDEFINED, "variance undefined: the estimate has fewer than 2 draws in some stratum");
  }
}

// ---------------------------------------------------------------------------
// simulate

std::string hist_name(const std::string& prefix, const char* est) { return prefix + "_" + est + ".csv"; }

void run_simulate(const Config& cfg, const fs::path& out, unsigned threads) {
  const FramePtr frame = load_frame(cfg.required("frame"));
  ppest_sim_config base{};
  ppest_sim_config_default(&base);
  base.n = cfg.count("n");
  base.R = cfg.count("R");
  base.seed = *cfg.seed;
  base.tau = cfg.real("tau");
  base.allocation = rule_of(cfg);
  base.threads = threads;

  std::vector<ppest_sim_estimator> which;
  const std::string est = cfg.required("estimator");
  if (est == "all") {
    which = {PPEST_SIM_EST_SRS, PPEST_SIM_HH, PPEST_SIM_DIFF, PPEST_SIM_STRAT_SRS, PPEST_SIM_STRAT_DIFF};
  } else {
    for (const auto& name : split(est, ',')) {
      ppest_sim_estimator e{};
      if (ppest_parse_sim_estimator(name.c_str(), &e) != PPEST_OK) config_error(ppest_last_error());
      which.push_back(e);
    }
  }
  if (which.empty()) config_error("no estimator selected");

  ReportPtr baseline;
  if (cfg.flag("baseline")) {
    ppest_sim_config c = base;
    c.estimator = PPEST_SIM_EST_SRS;
    ppest_sim_report* raw = nullptr;
    check(ppest_simulate(frame.get(), &c, &raw));
    baseline.reset(raw);
  }

  const Meta meta = cfg.meta();
  for (ppest_sim_estimator e : which) {
    ppest_sim_config c = base;
    c.estimator = e;
    ppest_sim_report* raw = nullptr;
    check(ppest_simulate(frame.get(), &c, &raw));
    const ReportPtr report(raw);
    if (baseline) check(ppest_sim_attach_baseline(report.get(), baseline.get()));

    const char* name = ppest_sim_estimator_name(e);
    check(ppest_sim_write_json(out_path(out, std::string("report_") + name + ".json").string().c_str(), report.get(),
                               meta.get()));
    check(ppest_sim_write_replicates(out_path(out, hist_name("replicates", name)).string().c_str(), report.get(),
                                     meta.get()));
    check(ppest_sim_write_histogram(out_path(out, hist_name("histogram", name)).string().c_str(), report.get(), 0,
                                    meta.get()));
    ppest_sim_summary s{};
    check(ppest_sim_summary_get(report.get(), &s));
    if (s.stratified) {
      check(ppest_sim_write_histogram(out_path(out, hist_name("zero_histogram", name)).string().c_str(),
                                      report.get(), 1, meta.get()));
    }
    std::cout << name << ": mean=" << fmt_fixed(s.empirical_mean, 2) << " se=" << fmt_fixed(s.empirical_se, 2);
    if (s.has_deff) std::cout << " deff=" << fmt_fixed(s.deff_vs_srs, 4);
    if (s.stratified) {
      std::cout << " n1=" << s.n_one << " n0=" << s.n_zero
                << " zero_empty=" << fmt_fixed(s.zero_stratum_empty_fraction, 4)
                << " (hypergeometric " << fmt_fixed(s.zero_stratum_empty_predicted, 4) << ")";
    }
    std::cout << "\n";
    for (std::size_t k = 0; k < s.warnings; ++k) {
      const char* w = nullptr;
      check(ppest_sim_warning(report.get(), k, &w));
      std::cerr << "warning: " << w << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// f1

EstimatePtr main_record(const std::string& path) {
  ppest_records* raw = nullptr;
  check(ppest_records_load(path.c_str(), &raw, nullptr));
  const RecordsPtr recs(raw);
  if (ppest_records_count(recs.get()) == 0) fail(PPEST_E_INGESTION, "'" + path + "' holds no estimate record");
  ppest_estimate* e = nullptr;
  check(ppest_records_estimate(recs.get(), 0, &e));
  return EstimatePtr(e);
}

void run_f1(const Config& cfg, const fs::path& out) {
  const EstimatePtr s1 = main_record(cfg.required("stratum1"));
  const EstimatePtr s0 = main_record(cfg.required("stratum0"));
  ppest_confusion flagged{};
  flagged.tp = cfg.real("flagged_tp");
  flagged.fn = cfg.real("flagged_fn");
  ppest_f1_result r{};
  check(ppest_f1_two_stratum(s1.get(), s0.get(), &flagged, cfg.integer("c"), &r));
  const std::string text =
      header_lines(cfg) + "f1,variance,se\n" + fmt(r.f1) + "," + fmt(r.variance) + "," + fmt(r.se) + "\n";
  write_text(out_path(out, "f1.csv"), text);
  std::cout << "f1=" << fmt_fixed(r.f1, 4) << " variance=" << fmt(r.variance) << " se=" << fmt_fixed(r.se, 4)
            << "\n";
}

// ---------------------------------------------------------------------------
// report

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : std::string(w - s.size(), ' ') + s; }

std::string render(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t k = 0; k < r.size(); ++k) width[k] = std::max(width[k], r[k].size());
  }
  std::string s;
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) s += (k ? "  " : "") + pad(r[k], width[k]);
    s += "\n";
  }
  return s;
}

std::string csv_rows(const std::vector<std::vector<std::string>>& rows) {
  std::string s;
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      const bool quote = r[k].find_first_of(",\"") != std::string::npos;
      std::string field = r[k];
      if (quote) {
        std::string q = "\"";
        for (char c : field) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        field = q + "\"";
      }
      s += (k ? "," : "") + field;
    }
    s += "\n";
  }
  return s;
}

std::string label_of(const ppest_meta* meta, const std::string& fallback) {
  const char* v = nullptr;
  if (meta && ppest_meta_get(meta, "label", &v) == PPEST_OK && v && *v) return v;
  return fallback;
}

std::vector<std::vector<std::string>> report_estimates(const Config& cfg, const std::vector<std::string>& inputs) {
  const bool paper = cfg.paper_mode();
  const auto num = [&](double v) { return paper ? fmt_fixed(v, 0) : fmt_fixed(v, 2); };
  std::vector<std::vector<std::string>> rows{{"estimator", "estimate", "se", "ci_lo", "ci_hi", "deff"}};
  for (const auto& path : inputs) {
    ppest_records* raw = nullptr;
    ppest_meta* mraw = nullptr;
    check(ppest_records_load(path.c_str(), &raw, &mraw));
    const RecordsPtr recs(raw);
    const Meta meta(mraw);
    if (ppest_records_count(recs.get()) == 0) continue;
    ppest_record r{};
    check(ppest_records_at(recs.get(), 0, &r));
    const double z = paper ? 2.0 : r.z;
    std::vector<std::string> row{label_of(meta.get(), r.estimator), num(r.total)};
    row.push_back(r.has_se ? num(r.se) : "");
    row.push_back(r.has_se ? num(r.total - z * r.se) : "");
    row.push_back(r.has_se ? num(r.total + z * r.se) : "");
    row.push_back(r.has_deff ? fmt_fixed(r.deff, 4) : "");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::vector<std::string>> report_strata(const Config& cfg, const std::vector<std::string>& inputs) {
  const bool paper = cfg.paper_mode();
  std::vector<std::vector<std::string>> rows{{"stratum", "N", "n", "proportion", "se_proportion", "total", "se_total"}};
  for (const auto& path : inputs) {
    ppest_records* raw = nullptr;
    check(ppest_records_load(path.c_str(), &raw, nullptr));
    const RecordsPtr recs(raw);
    const std::size_t count = ppest_records_count(recs.get());
    // Component rows first, the overall row last.
    for (std::size_t pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < count; ++i) {
        ppest_record r{};
        check(ppest_records_at(recs.get(), i, &r));
        const std::string name = r.estimator;
        const bool component = name.find('/') != std::string::npos;
        if ((pass == 0) != component) continue;
        const double Nd = static_cast<double>(r.N);
        std::vector<std::string> row{component ? name.substr(0, name.find('/')) : "total", std::to_string(r.N),
                                     std::to_string(r.n)};
        row.push_back(Nd > 0 ? fmt_fixed(r.total / Nd, 3) : "");
        row.push_back(Nd > 0 && r.has_se ? fmt_fixed(r.se / Nd, 3) : "");
        row.push_back(paper ? fmt_fixed(r.total, 0) : fmt_fixed(r.total, 2));
        row.push_back(r.has_se ? (paper ? fmt_fixed(r.se, 0) : fmt_fixed(r.se, 2)) : "");
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<std::vector<std::string>> report_montecarlo(const Config& cfg, const std::vector<std::string>& inputs) {
  const bool paper = cfg.paper_mode();
  std::vector<std::vector<std::string>> rows{{"estimator", "mean", "se", "deff", "bias", "skewness"}};
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) fail(PPEST_E_IO, "cannot open '" + path + "'");
    ordered_json j;
    try {
      j = ordered_json::parse(in);
    } catch (const std::exception& e) {
      fail(PPEST_E_INGESTION, "'" + path + "' is not a simulation report: " + e.what());
    }
    if (!j.contains("estimator") || !j.contains("empirical_se")) {
      fail(PPEST_E_INGESTION, "'" + path + "' is not a simulation report");
    }
    const auto num = [&](const ordered_json& v, int digits) {
      return v.is_number() ? fmt_fixed(v.get<double>(), digits) : std::string();
    };
    rows.push_back({j["estimator"].get<std::string>(), num(j["empirical_mean"], paper ? 0 : 2),
                    num(j["empirical_se"], paper ? 0 : 2), num(j["deff_vs_srs"], paper ? 3 : 4),
                    num(j["bias"], 2), num(j["skewness"], 3)});
  }
  return rows;
}

void run_report(const Config& cfg, const fs::path& out) {
  const std::string layout = cfg.required("layout");
  const auto inputs = split(cfg.required("inputs"), ';');
  std::vector<std::vector<std::string>> rows;
  if (layout == "estimates") rows = report_estimates(cfg, inputs);
  else if (layout == "strata") rows = report_strata(cfg, inputs);
  else if (layout == "montecarlo") rows = report_montecarlo(cfg, inputs);
  else config_error("layout must be estimates, strata or montecarlo");
  write_text(out_path(out, "report.csv"), header_lines(cfg) + csv_rows(rows));
  std::cout << render(rows);
}

// ---------------------------------------------------------------------------

struct Command {
  std::string name;
  std::string help;
  bool stochastic;
  std::vector<Param> params;
};

std::vector<Command> commands() {
  return {
      {"generate",
       "synthesize a labeled frame from the conditional Beta model",
       true,
       {{"N", "", "population size"},
        {"positives", "", "number of label-1 units"},
        {"a1", "1", "Beta shape a for positives"},
        {"b1", "1", "Beta shape b for positives"},
        {"a0", "1", "Beta shape a for negatives"},
        {"b0", "1", "Beta shape b for negatives"},
        {"profile", "", "profile file overriding a1..b0"},
        {"calibrate", "none", "none | f1 | loss (mean per-unit loss)"},
        {"target", "", "calibration target"},
        {"tau", "0.5", "decision threshold"}}},
      {"metrics",
       "loss, confusion counts and F1 of a labeled frame",
       false,
       {{"frame", "", "frame CSV"}, {"tau", "0.5", "decision threshold"}}},
      {"sample",
       "draw a sample for annotation",
       true,
       {{"frame", "", "frame CSV"},
        {"design_type", "srs", "srs | pps | stratified"},
        {"n", "", "sample size (total for stratified)"},
        {"tau", "0.5", "stratification threshold"},
        {"allocation", "neyman_proxy", "neyman_oracle | neyman_proxy | proportional | equal"},
        {"stratum", "", "sample within one stratum only (one | zero)"}}},
      {"estimate",
       "estimate a total from a labeled sample",
       false,
       {{"estimator", "", "hh | srs | diff | strat"},
        {"sample", "", "sample CSV"},
        {"N", "", "population size (default: sample metadata)"},
        {"aux_total", "", "sum of p_hat over the population (default: sample metadata)"},
        {"z", "1.96", "normal quantile for the interval"},
        {"strata", "", "stratum part id=FILE:srs|diff|hh", true},
        {"census", "", "census stratum id=TOTAL:N", true},
        {"t_f", "", "confirmed count for the under-reporting interval"},
        {"label", "", "row label used by report"}}},
      {"simulate",
       "Monte Carlo replicates of a design/estimator pair",
       true,
       {{"frame", "", "labeled frame CSV"},
        {"estimator", "all", "hh | srs | diff | strat-srs | strat-diff | all (comma list allowed)"},
        {"n", "500", "sample size"},
        {"R", "10000", "replicates"},
        {"tau", "0.5", "stratification threshold"},
        {"allocation", "neyman_oracle", "neyman_oracle | neyman_proxy | proportional | equal"},
        {"baseline", "true", "run an SRS baseline for design effects"}}},
      {"f1",
       "two-stratum F1 with a delta-method SE",
       false,
       {{"stratum1", "", "estimate CSV for stratum 1 (TP among unflagged model positives)"},
        {"stratum0", "", "estimate CSV for stratum 0 (FN among unflagged model negatives)"},
        {"flagged_tp", "", "known TP among flagged units"},
        {"flagged_fn", "", "known FN among flagged units"},
        {"c", "", "number of predicted positives"}}},
      {"report",
       "summary table from earlier outputs",
       false,
       {{"layout", "estimates", "estimates | strata | montecarlo"},
        {"inputs", "", "input file", true}}},
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ppest: totals and F1 of rare labels with classifier-assisted sampling designs"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  bool paper_mode = false;
  unsigned threads = 1;
  app.add_option("--config", config_path, "key=value config file, or an earlier output to rerun");
  app.add_option("--seed", seed, "random seed (required by generate, sample and simulate)");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--paper-mode", paper_mode, "z = 2 and integer table layout");

  const auto specs = commands();
  std::vector<std::map<std::string, std::string>> flag_values(specs.size());
  std::vector<std::map<std::string, std::vector<std::string>>> list_values(specs.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    CLI::App* sub = app.add_subcommand(specs[i].name, specs[i].help);
    sub->fallthrough();
    for (const auto& p : specs[i].params) {
      const std::string help = p.help + (p.fallback.empty() ? "" : " [" + p.fallback + "]");
      if (p.list) sub->add_option("--" + p.key, list_values[i][p.key], help)->take_all();
      else sub->add_option("--" + p.key, flag_values[i][p.key], help);
    }
    if (specs[i].name == "simulate") {
      sub->add_option("--threads", threads, "worker threads (results do not depend on this)")
          ->check(CLI::Range(1u, 1024u));
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: code=config message=\"" << escape(e.what()) << "\"\n";
    return 2;
  }

  try {
    std::size_t which = 0;
    while (!subs[which]->parsed()) ++which;
    const Command& cmd = specs[which];
    Config cfg(cmd.name, cmd.params);
    cfg.stochastic = cmd.stochastic;

    if (!config_path.empty()) {
      bool from_header = false;
      for (const auto& [k, v] : read_config_file(config_path, from_header)) {
        if (k == "command") {
          if (v != cmd.name) config_error("config '" + config_path + "' was written by '" + v + "', not '" + cmd.name + "'");
          continue;
        }
        if (k == "seed") {
          std::uint64_t s = 0;
          if (std::from_chars(v.data(), v.data() + v.size(), s).ptr != v.data() + v.size()) {
            config_error("seed in '" + config_path + "' is not an unsigned integer");
          }
          if (!seed) seed = s;
          continue;
        }
        if (!cfg.knows(k)) {
          if (from_header) continue;
          config_error("unknown setting '" + k + "' in '" + config_path + "' for " + cmd.name);
        }
        cfg.set(k, v);
      }
    }
    for (const auto& p : cmd.params) {
      CLI::Option* opt = subs[which]->get_option("--" + p.key);
      if (opt->count() == 0) continue;
      if (p.list) {
        std::string joined;
        for (const auto& v : list_values[which][p.key]) joined += (joined.empty() ? "" : ";") + v;
        cfg.set(p.key, joined);
      } else {
        cfg.set(p.key, flag_values[which][p.key]);
      }
    }
    if (paper_mode) cfg.set("paper_mode", "true");
    cfg.seed = seed;
    if (cmd.stochastic && !cfg.seed) config_error(cmd.name + " is stochastic and needs --seed");

    const fs::path out(out_dir);
    if (cmd.name == "generate") run_generate(cfg, out);
    else if (cmd.name == "metrics") run_metrics(cfg, out);
    else if (cmd.name == "sample") run_sample(cfg, out);
    else if (cmd.name == "estimate") run_estimate(cfg, out);
    else if (cmd.name == "simulate") run_simulate(cfg, out, threads);
    else if (cmd.name == "f1") run_f1(cfg, out);
    else run_report(cfg, out);
    return 0;
  } catch (const Failure& f) {
    std::cerr << "error: code=" << ppest_status_name(f.status) << " message=\"" << escape(f.message) << "\"\n";
    return exit_code_for(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: code=internal message=\"" << escape(e.what()) << "\"\n";
    return 2;
  }
}
