#include "ppest/population.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "csv.hpp"
#include "ppest/error.hpp"
#include "summation.hpp"

namespace ppest {

double clamp_aux(double p) noexcept { return std::clamp(p, kAuxFloor, kAuxCeil); }

Frame::Frame(std::vector<Unit> units) : units_(std::move(units)) {
  if (units_.empty()) throw ArgumentError("frame must contain at least one unit");
  detail::CompensatedSum aux;
  bool all_labeled = true;
  for (auto& u : units_) {
    if (!std::isfinite(u.aux_prob)) throw ArgumentError("unit '" + u.id + "' has non-finite aux_prob");
    u.aux_prob = clamp_aux(u.aux_prob);
    aux.add(u.aux_prob);
    if (u.label) {
      if (*u.label > 1) throw ArgumentError("unit '" + u.id + "' has a label outside {0,1}");
      labeled_positives_ += *u.label;
    } else {
      all_labeled = false;
    }
  }
  aux_total_ = aux.value();
  if (all_labeled) true_total_ = labeled_positives_;
}

const StratifiedFrame::Stratum& StratifiedFrame::stratum(const std::string& id) const {
  for (const auto& s : strata_) {
    if (s.id == id) return s;
  }
  throw ArgumentError("unknown stratum '" + id + "'");
}

Frame load_frame(const std::string& path, const FrameSchema& schema, Metadata* meta) {
  const csv::Table table = csv::read_file(path);
  const auto id_col = table.column(schema.id_column);
  const auto label_col = table.column(schema.label_column);
  const auto aux_col = table.column(schema.aux_column);
  if (!id_col) throw IngestionError(path + ": missing column '" + schema.id_column + "'");
  if (!aux_col) throw IngestionError(path + ": missing column '" + schema.aux_column + "'");

  std::vector<Unit> units;
  units.reserve(table.rows.size());
  std::unordered_set<std::string> seen;
  seen.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = path + ":" + std::to_string(table.line_numbers[r]);
    const auto field = [&](std::size_t col) -> std::string_view {
      return col < row.size() ? std::string_view(row[col]) : std::string_view{};
    };

    Unit u;
    u.id = std::string(csv::trim(field(*id_col)));
    if (u.id.empty()) throw IngestionError(where + ": missing id");
    if (!seen.insert(u.id).second) throw IngestionError(where + ": duplicate id '" + u.id + "'");

    const auto p = csv::parse_double(field(*aux_col));
    if (!p || !(*p >= 0.0 && *p <= 1.0)) {
      throw IngestionError(where + ": p_hat '" + std::string(field(*aux_col)) +
                           "' is not a probability in [0,1]");
    }
    u.aux_prob = *p;

    if (label_col) {
      const auto text = csv::trim(field(*label_col));
      if (text == "1") {
        u.label = 1;
      } else if (text == "0") {
        u.label = 0;
      } else if (!text.empty()) {
        throw IngestionError(where + ": label '" + std::string(text) + "' not in {0,1,blank}");
      }
    }
    units.push_back(std::move(u));
  }
  if (units.empty()) throw IngestionError(path + ": no units");
  if (meta) *meta = table.meta;
  return Frame(std::move(units));
}

void write_frame(const std::string& path, const Frame& frame, const Metadata& meta) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  csv::write_meta(out, meta);
  out << "id,label,p_hat\n";
  for (const auto& u : frame.units()) {
    out << csv::quote(u.id) << ',';
    if (u.label) out << static_cast<int>(*u.label);
    out << ',' << csv::format_double(u.aux_prob) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

StratifiedFrame stratify_by_prediction(const Frame& frame, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ArgumentError("threshold tau must lie in (0,1)");
  StratifiedFrame::Stratum one{kStratumOne, std::nullopt, {}};
  StratifiedFrame::Stratum zero{kStratumZero, std::nullopt, {}};
  std::vector<Unit> one_units, zero_units;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    Unit u = frame[i];
    if (u.predicted(tau) == 1) {
      u.stratum = kStratumOne;
      one_units.push_back(std::move(u));
      one.parent_index.push_back(i);
    } else {
      u.stratum = kStratumZero;
      zero_units.push_back(std::move(u));
      zero.parent_index.push_back(i);
    }
  }
  if (!one_units.empty()) one.frame.emplace(std::move(one_units));
  if (!zero_units.empty()) zero.frame.emplace(std::move(zero_units));
  std::vector<StratifiedFrame::Stratum> strata;
  strata.push_back(std::move(one));
  strata.push_back(std::move(zero));
  return StratifiedFrame(std::move(strata), tau, frame.size());
}

}  // namespace ppest
