#include "ppest/designs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "csv.hpp"
#include "ppest/error.hpp"
#include "summation.hpp"

namespace ppest {

const char* design_name(Design d) noexcept {
  return d == Design::kPpsWr ? "pps_wr" : "srs_wor";
}

Design parse_design(const std::string& name) {
  if (name == "srs_wor" || name == "srs") return Design::kSrsWor;
  if (name == "pps_wr" || name == "pps") return Design::kPpsWr;
  throw ArgumentError("unknown design '" + name + "'");
}

AliasTable::AliasTable(std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw ArgumentError("alias table needs at least one weight");
  detail::CompensatedSum total;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("alias weights must be finite and nonnegative");
    total.add(w);
  }
  if (!(total.value() > 0.0)) throw ArgumentError("alias weights must have a positive sum");

  prob_.assign(n, 1.0);
  alias_.resize(n);
  std::iota(alias_.begin(), alias_.end(), std::size_t{0});
  std::vector<double> scaled(n);
  const double scale = static_cast<double>(n) / total.value();
  std::vector<std::size_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * scale;
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t less = small.back();
    small.pop_back();
    const std::size_t more = large.back();
    prob_[less] = scaled[less];
    alias_[less] = more;
    scaled[more] = (scaled[more] + scaled[less]) - 1.0;
    if (scaled[more] < 1.0) {
      large.pop_back();
      small.push_back(more);
    }
  }
  // Leftovers are 1 up to rounding.
  for (std::size_t i : small) prob_[i] = 1.0;
  for (std::size_t i : large) prob_[i] = 1.0;
}

namespace {

std::vector<double> aux_weights(const Frame& frame) {
  std::vector<double> w(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) w[i] = frame[i].aux_prob;
  return w;
}

Draw make_draw(const Frame& frame, std::size_t unit, double pi) {
  const Unit& u = frame[unit];
  return Draw{unit, pi, u.aux_prob, u.label};
}

}  // namespace

PpsSampler::PpsSampler(const Frame& frame) : frame_(&frame), table_(aux_weights(frame)) {
  if (!(frame.aux_total() > 0.0)) throw ArgumentError("PPS requires a positive auxiliary total");
}

Sample PpsSampler::draw(std::size_t n, Rng& rng) const {
  if (n == 0) throw ArgumentError("PPS sample size must be at least 1");
  Sample s;
  s.design = Design::kPpsWr;
  s.parent_N = frame_->size();
  s.parent_aux_total = frame_->aux_total();
  s.draws.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t unit = table_(rng);
    s.draws.push_back(make_draw(*frame_, unit, (*frame_)[unit].aux_prob / s.parent_aux_total));
  }
  return s;
}

Sample pps_wr(const Frame& frame, std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return PpsSampler(frame).draw(n, rng);
}

Sample srs_wor(const Frame& frame, std::size_t n, Rng& rng) {
  const std::size_t N = frame.size();
  if (n == 0 || n > N) throw ArgumentError("SRS sample size must satisfy 1 <= n <= N");
  Sample s;
  s.design = Design::kSrsWor;
  s.parent_N = N;
  s.parent_aux_total = frame.aux_total();
  s.draws.reserve(n);
  const double pi = static_cast<double>(n) / static_cast<double>(N);

  // Same swap sequence either way; the sparse map keeps small samples from
  // large frames at O(n).
  if (4 * n >= N) {
    std::vector<std::size_t> perm(N);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + uniform_below(rng, N - i);
      std::swap(perm[i], perm[j]);
      s.draws.push_back(make_draw(frame, perm[i], pi));
    }
  } else {
    std::unordered_map<std::size_t, std::size_t> moved;
    moved.reserve(2 * n);
    const auto at = [&](std::size_t k) {
      const auto it = moved.find(k);
      return it == moved.end() ? k : it->second;
    };
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + uniform_below(rng, N - i);
      const std::size_t vi = at(i);
      const std::size_t vj = at(j);
      moved[j] = vi;
      s.draws.push_back(make_draw(frame, vj, pi));
    }
  }
  return s;
}

Sample srs_wor(const Frame& frame, std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return srs_wor(frame, n, rng);
}

const char* allocation_rule_name(AllocationRule r) noexcept {
  switch (r) {
    case AllocationRule::kNeymanOracle: return "neyman_oracle";
    case AllocationRule::kNeymanProxy: return "neyman_proxy";
    case AllocationRule::kProportional: return "proportional";
    case AllocationRule::kEqual: return "equal";
  }
  return "unknown";
}

AllocationRule parse_allocation_rule(const std::string& name) {
  if (name == "neyman_oracle" || name == "neyman") return AllocationRule::kNeymanOracle;
  if (name == "neyman_proxy") return AllocationRule::kNeymanProxy;
  if (name == "proportional") return AllocationRule::kProportional;
  if (name == "equal") return AllocationRule::kEqual;
  throw ArgumentError("unknown allocation rule '" + name + "'");
}

std::size_t AllocationPlan::total() const noexcept {
  std::size_t t = 0;
  for (const auto& [id, n] : sizes) t += n;
  return t;
}

std::size_t AllocationPlan::size_of(const std::string& stratum) const {
  for (const auto& [id, n] : sizes) {
    if (id == stratum) return n;
  }
  throw ArgumentError("allocation has no stratum '" + stratum + "'");
}

namespace {

double stratum_sd(const Frame& frame, bool use_labels) {
  const std::size_t n = frame.size();
  if (n < 2) return 0.0;
  detail::CompensatedSum sum;
  for (const auto& u : frame.units()) {
    if (use_labels && !u.label) throw AllocationError("Neyman oracle allocation requires labeled strata");
    sum.add(use_labels ? *u.label : u.aux_prob);
  }
  const double mean = sum.value() / static_cast<double>(n);
  detail::CompensatedSum ss;
  for (const auto& u : frame.units()) {
    const double d = (use_labels ? *u.label : u.aux_prob) - mean;
    ss.add(d * d);
  }
  return std::sqrt(ss.value() / static_cast<double>(n - 1));
}

// Largest-remainder apportionment of `total` in proportion to `weights`.
// Ties in the remainder go to the lower index.
std::vector<std::size_t> largest_remainder(std::size_t total, const std::vector<double>& weights) {
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> out(weights.size(), 0);
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double quota = static_cast<double>(total) * weights[i] / wsum;
    out[i] = static_cast<std::size_t>(std::floor(quota));
    assigned += out[i];
    rema.emplace_back(quota - std::floor(quota), i);
  }
  std::stable_sort(rema.begin(), rema.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++out[rema[k % rema.size()].second];
  return out;
}

}  // namespace

AllocationPlan allocate(const StratifiedFrame& strata, std::size_t n, AllocationRule rule) {
  const auto& list = strata.strata();
  const std::size_t H = list.size();
  std::vector<double> weight(H, 0.0);
  std::vector<std::size_t> cap(H), floor_size(H);
  std::size_t active = 0;
  std::size_t capacity = 0;
  for (std::size_t h = 0; h < H; ++h) {
    cap[h] = list[h].size();
    floor_size[h] = std::min<std::size_t>(2, cap[h]);
    capacity += cap[h];
    if (cap[h] == 0) continue;
    ++active;
    const double Nh = static_cast<double>(cap[h]);
    switch (rule) {
      case AllocationRule::kNeymanOracle: weight[h] = Nh * stratum_sd(*list[h].frame, true); break;
      case AllocationRule::kNeymanProxy: weight[h] = Nh * stratum_sd(*list[h].frame, false); break;
      case AllocationRule::kProportional: weight[h] = Nh; break;
      case AllocationRule::kEqual: weight[h] = 1.0; break;
    }
  }
  if (n < 2 * active) {
    throw AllocationError("sample size " + std::to_string(n) + " is below 2 per nonempty stratum");
  }
  if (n > capacity) throw AllocationError("sample size exceeds the population size");

  std::vector<std::optional<std::size_t>> pinned(H);
  for (std::size_t h = 0; h < H; ++h) {
    if (cap[h] == 0) pinned[h] = 0;
  }
  std::vector<std::size_t> result(H, 0);
  for (;;) {
    std::vector<std::size_t> free_idx;
    std::size_t remaining = n;
    for (std::size_t h = 0; h < H; ++h) {
      if (pinned[h]) remaining -= std::min(remaining, *pinned[h]);
      else free_idx.push_back(h);
    }
    if (free_idx.empty()) break;
    std::vector<double> w;
    for (std::size_t h : free_idx) w.push_back(weight[h]);
    // Neyman with no within-stratum variation anywhere: fall back to N_h.
    if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) {
      for (std::size_t k = 0; k < free_idx.size(); ++k) w[k] = static_cast<double>(cap[free_idx[k]]);
    }
    const auto quota = largest_remainder(remaining, w);
    // Floors are pinned before caps; pinning both in one pass can overshoot n.
    bool violated = false;
    for (std::size_t k = 0; k < free_idx.size(); ++k) {
      const std::size_t h = free_idx[k];
      if (quota[k] < floor_size[h]) {
        pinned[h] = floor_size[h];
        violated = true;
      }
    }
    for (std::size_t k = 0; k < free_idx.size() && !violated; ++k) {
      const std::size_t h = free_idx[k];
      if (quota[k] > cap[h]) {
        pinned[h] = cap[h];
        violated = true;
      }
    }
    if (!violated) {
      for (std::size_t k = 0; k < free_idx.size(); ++k) result[free_idx[k]] = quota[k];
      break;
    }
  }
  for (std::size_t h = 0; h < H; ++h) {
    if (pinned[h]) result[h] = *pinned[h];
  }
  // Every stratum pinned with draws left over (zero-weight strata at their
  // floor next to saturated ones): spread the rest by remaining headroom.
  for (std::size_t placed = std::accumulate(result.begin(), result.end(), std::size_t{0}); placed < n;) {
    std::vector<double> headroom(H);
    for (std::size_t h = 0; h < H; ++h) headroom[h] = static_cast<double>(cap[h] - result[h]);
    const auto extra = largest_remainder(n - placed, headroom);
    for (std::size_t h = 0; h < H; ++h) {
      const std::size_t add = std::min(extra[h], cap[h] - result[h]);
      result[h] += add;
      placed += add;
    }
  }

  AllocationPlan plan;
  plan.rule = rule;
  for (std::size_t h = 0; h < H; ++h) {
    if (result[h] > cap[h] || (cap[h] > 0 && result[h] < floor_size[h])) {
      throw AllocationError("no feasible allocation for stratum '" + list[h].id + "'");
    }
    plan.sizes.emplace_back(list[h].id, result[h]);
  }
  if (plan.total() != n) throw AllocationError("allocation cannot place all " + std::to_string(n) + " draws");
  return plan;
}

void write_sample(const std::string& path, const Sample& sample, const Frame& frame, const Metadata& meta) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  Metadata header = {
      {"design", design_name(sample.design)},
      {"parent_N", std::to_string(sample.parent_N)},
      {"parent_aux_total", csv::format_double(sample.parent_aux_total)},
  };
  header.insert(header.end(), meta.begin(), meta.end());
  csv::write_meta(out, header);
  out << "draw_index,unit_id,pi,y,p_hat\n";
  for (std::size_t k = 0; k < sample.draws.size(); ++k) {
    const Draw& d = sample.draws[k];
    if (d.unit >= frame.size()) throw ArgumentError("draw references a unit outside the frame");
    out << (k + 1) << ',' << csv::quote(frame[d.unit].id) << ',' << csv::format_double(d.pi) << ',';
    if (d.label) out << static_cast<int>(*d.label);
    out << ',' << csv::format_double(d.aux_prob) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

LoadedSample load_sample(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  LoadedSample out;
  out.meta = table.meta;
  Sample& s = out.sample;
  bool have_design = false;
  for (const auto& [key, value] : table.meta) {
    if (key == "design") {
      s.design = parse_design(value);
      have_design = true;
    } else if (key == "parent_N") {
      const auto v = csv::parse_int(value);
      if (!v || *v < 1) throw IngestionError(path + ": bad parent_N");
      s.parent_N = static_cast<std::size_t>(*v);
    } else if (key == "parent_aux_total") {
      const auto v = csv::parse_double(value);
      if (!v) throw IngestionError(path + ": bad parent_aux_total");
      s.parent_aux_total = *v;
    }
  }
  if (!have_design) throw IngestionError(path + ": missing '#! design=' metadata");

  const auto col_id = table.column("unit_id");
  const auto col_pi = table.column("pi");
  const auto col_y = table.column("y");
  const auto col_p = table.column("p_hat");
  if (!col_id || !col_pi || !col_y || !col_p) {
    throw IngestionError(path + ": expected columns draw_index,unit_id,pi,y,p_hat");
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = path + ":" + std::to_string(table.line_numbers[r]);
    const auto field = [&](std::size_t col) -> std::string_view {
      return col < row.size() ? std::string_view(row[col]) : std::string_view{};
    };
    Draw d;
    const auto pi = csv::parse_double(field(*col_pi));
    if (!pi || !(*pi > 0.0 && *pi <= 1.0)) throw IngestionError(where + ": pi must lie in (0,1]");
    d.pi = *pi;
    const auto p = csv::parse_double(field(*col_p));
    if (!p || !(*p >= 0.0 && *p <= 1.0)) throw IngestionError(where + ": p_hat must lie in [0,1]");
    d.aux_prob = clamp_aux(*p);
    const auto y = csv::trim(field(*col_y));
    if (y == "1") d.label = 1;
    else if (y == "0") d.label = 0;
    else if (!y.empty()) throw IngestionError(where + ": y '" + std::string(y) + "' not in {0,1,blank}");
    out.unit_ids.emplace_back(csv::trim(field(*col_id)));
    s.draws.push_back(d);
  }
  return out;
}

}  // namespace ppest
