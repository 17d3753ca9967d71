#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ppest/population.hpp"
#include "ppest/rng.hpp"

namespace ppest {

enum class Design { kSrsWor, kPpsWr };

const char* design_name(Design d) noexcept;
/// Accepts "srs_wor"/"srs" and "pps_wr"/"pps". Throws ArgumentError otherwise.
Design parse_design(const std::string& name);

inline constexpr std::size_t kUnknownUnit = std::numeric_limits<std::size_t>::max();

struct Draw {
  std::size_t unit = kUnknownUnit;  // index into the parent frame
  double pi = 0.0;                  // PPS: per-draw selection probability; SRS: n/N
  double aux_prob = 0.0;
  std::optional<std::uint8_t> label;
};

struct Sample {
  Design design = Design::kSrsWor;
  std::vector<Draw> draws;
  std::size_t parent_N = 0;
  double parent_aux_total = 0.0;

  std::size_t n() const noexcept { return draws.size(); }
};

/// Walker/Vose alias table: O(N) build, O(1) per draw.
class AliasTable {
 public:
  /// Weights must be nonnegative with a positive finite sum.
  explicit AliasTable(std::span<const double> weights);

  std::size_t size() const noexcept { return prob_.size(); }
  std::size_t operator()(Rng& rng) const {
    const std::size_t column = uniform_below(rng, prob_.size());
    return uniform01(rng) < prob_[column] ? column : alias_[column];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

/// PPS-with-replacement sampler over one frame; the alias table is built
/// once and reused across samples. The frame must outlive the sampler.
class PpsSampler {
 public:
  explicit PpsSampler(const Frame& frame);
  Sample draw(std::size_t n, Rng& rng) const;

 private:
  const Frame* frame_;
  AliasTable table_;
};

/// Uniform sample without replacement by partial Fisher-Yates.
Sample srs_wor(const Frame& frame, std::size_t n, Rng& rng);
Sample srs_wor(const Frame& frame, std::size_t n, std::uint64_t seed);

/// n independent draws with P(unit i) = p_hat_i / sum_U p_hat_j.
Sample pps_wr(const Frame& frame, std::size_t n, std::uint64_t seed);

enum class AllocationRule { kNeymanOracle, kNeymanProxy, kProportional, kEqual };

const char* allocation_rule_name(AllocationRule r) noexcept;
/// Accepts neyman_oracle|neyman|neyman_proxy|proportional|equal.
AllocationRule parse_allocation_rule(const std::string& name);

struct AllocationPlan {
  AllocationRule rule = AllocationRule::kEqual;
  std::vector<std::pair<std::string, std::size_t>> sizes;  // stratum id -> n_h

  std::size_t total() const noexcept;
  std::size_t size_of(const std::string& stratum) const;
};

/// Split n across the strata. Neyman weights are N_h * S_h with S_h the
/// (n-1)-divisor standard deviation of y (oracle) or of p_hat (proxy).
/// Fractions are rounded by largest remainder; every nonempty stratum gets at
/// least min(2, N_h) and at most N_h. Throws AllocationError if infeasible.
AllocationPlan allocate(const StratifiedFrame& strata, std::size_t n, AllocationRule rule);

/// Sample CSV `draw_index,unit_id,pi,y,p_hat` (y blank when unobserved),
/// preceded by `#!` design metadata and any extra `meta` lines.
void write_sample(const std::string& path, const Sample& sample, const Frame& frame,
                  const Metadata& meta = {});

struct LoadedSample {
  Sample sample;
  std::vector<std::string> unit_ids;
  Metadata meta;
};

/// Reads a sample CSV. Design, parent_N and parent_aux_total come from the
/// `#!` metadata when present.
LoadedSample load_sample(const std::string& path);

}  // namespace ppest
