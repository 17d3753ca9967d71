#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ppest {

inline constexpr double kAuxFloor = 1e-6;
inline constexpr double kAuxCeil = 1.0 - 1e-6;

/// Clamp a predicted probability into [1e-6, 1 - 1e-6]. Idempotent.
double clamp_aux(double p) noexcept;

/// One population element.
struct Unit {
  std::string id;
  std::optional<std::uint8_t> label;  // 0 or 1; absent when unannotated
  double aux_prob = 0.5;              // clamped predicted probability
  std::string stratum;                // empty when unstratified

  /// Predicted class at threshold tau (ties go to 1).
  int predicted(double tau) const noexcept { return aux_prob >= tau ? 1 : 0; }
};

/// Ordered key/value pairs carried as `#! key=value` lines in CSV files.
using Metadata = std::vector<std::pair<std::string, std::string>>;

/// The finite population. Immutable after construction.
class Frame {
 public:
  /// Clamps each unit's aux_prob and caches the aggregates. Throws
  /// ArgumentError on an empty unit list or a label outside {0,1}.
  explicit Frame(std::vector<Unit> units);

  const std::vector<Unit>& units() const noexcept { return units_; }
  const Unit& operator[](std::size_t i) const noexcept { return units_[i]; }
  std::size_t size() const noexcept { return units_.size(); }
  double aux_total() const noexcept { return aux_total_; }
  /// Count of label-1 units; only defined when every unit is labeled.
  std::optional<std::int64_t> true_total() const noexcept { return true_total_; }
  bool fully_labeled() const noexcept { return true_total_.has_value(); }
  std::int64_t labeled_positives() const noexcept { return labeled_positives_; }

 private:
  std::vector<Unit> units_;
  double aux_total_ = 0.0;
  std::int64_t labeled_positives_ = 0;
  std::optional<std::int64_t> true_total_;
};

inline constexpr const char* kStratumOne = "one";
inline constexpr const char* kStratumZero = "zero";

/// Prediction-defined strata. Stratum frames may be empty (size 0), in which
/// case `frame()` is nullopt and `size()` reports 0.
class StratifiedFrame {
 public:
  struct Stratum {
    std::string id;
    std::optional<Frame> frame;
    std::vector<std::size_t> parent_index;  // positions in the parent frame

    std::size_t size() const noexcept { return parent_index.size(); }
  };

  StratifiedFrame(std::vector<Stratum> strata, double threshold, std::size_t parent_size)
      : strata_(std::move(strata)), threshold_(threshold), parent_size_(parent_size) {}

  const std::vector<Stratum>& strata() const noexcept { return strata_; }
  /// Throws ArgumentError for an unknown id.
  const Stratum& stratum(const std::string& id) const;
  double threshold() const noexcept { return threshold_; }
  std::size_t parent_size() const noexcept { return parent_size_; }

 private:
  std::vector<Stratum> strata_;
  double threshold_;
  std::size_t parent_size_;
};

struct FrameSchema {
  std::string id_column = "id";
  std::string label_column = "label";
  std::string aux_column = "p_hat";
};

/// Load a frame from a CSV file with a header row. Lines starting with `#`
/// are skipped; `#! key=value` lines are returned through `meta` when given.
Frame load_frame(const std::string& path, const FrameSchema& schema = {},
                 Metadata* meta = nullptr);

/// Write `id,label,p_hat` with shortest round-trip formatting.
void write_frame(const std::string& path, const Frame& frame, const Metadata& meta = {});

/// Split into "one" (aux_prob >= tau) and "zero" strata, both always present.
StratifiedFrame stratify_by_prediction(const Frame& frame, double tau);

}  // namespace ppest
