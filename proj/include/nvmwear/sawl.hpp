#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "nvmwear/translation.hpp"

namespace nvmwear {

struct AdaptiveConfig {
  std::uint64_t observation_window = 1ull << 22;
  std::uint64_t settling_window = 1ull << 22;
  std::uint64_t sample_interval = 100000;
  double merge_threshold = 0.90;
  double split_threshold = 0.95;
  double skew_threshold = 0.99;

  void validate() const {
    if (observation_window == 0 || settling_window == 0 || sample_interval == 0)
      throw ConfigError("sawl windows and sample_interval must be positive");
    if (!(merge_threshold > 0 && merge_threshold < split_threshold && split_threshold <= skew_threshold &&
          skew_threshold <= 1))
      throw ConfigError("sawl thresholds must satisfy 0 < merge < split <= skew <= 1");
  }
};

enum class Signal { none, merge, split };

inline std::string_view signal_name(Signal s) {
  switch (s) {
    case Signal::merge: return "merge";
    case Signal::split: return "split";
    default: return "none";
  }
}

/// Hit/miss outcomes of the last `capacity` translations.
class HitRateWindow {
 public:
  explicit HitRateWindow(std::uint64_t capacity) : bits_(capacity, 0) {}

  void push(bool hit) {
    if (filled_ == bits_.size()) {
      hits_ -= bits_[next_];
    } else {
      ++filled_;
    }
    bits_[next_] = hit ? 1 : 0;
    hits_ += bits_[next_];
    if (++next_ == bits_.size()) next_ = 0;
  }

  void clear() {
    std::fill(bits_.begin(), bits_.end(), 0);
    next_ = filled_ = hits_ = 0;
  }

  std::uint64_t size() const { return filled_; }
  std::uint64_t hits() const { return hits_; }
  double rate() const { return filled_ == 0 ? 0.0 : static_cast<double>(hits_) / static_cast<double>(filled_); }

 private:
  std::vector<std::uint8_t> bits_;
  std::uint64_t next_ = 0;
  std::uint64_t filled_ = 0;
  std::uint64_t hits_ = 0;
};

/// Thresholds plus the settling counter. classify() is the instantaneous
/// reading of one sample; decide() only fires once a reading has persisted
/// for a full settling window.
class AdaptiveState {
 public:
  explicit AdaptiveState(const AdaptiveConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

  Signal classify(double hit_rate, std::uint64_t first_half_hits, std::uint64_t second_half_hits) const {
    if (hit_rate < cfg_.merge_threshold) return Signal::merge;
    if (hit_rate > cfg_.split_threshold) return Signal::split;
    const std::uint64_t total = first_half_hits + second_half_hits;
    if (total > 0) {
      const double share = static_cast<double>(std::max(first_half_hits, second_half_hits)) / static_cast<double>(total);
      if (share >= cfg_.skew_threshold) return Signal::split;
    }
    return Signal::none;
  }

  /// Called once per sample, which stands for sample_interval requests.
  Signal decide(double hit_rate, std::uint64_t first_half_hits, std::uint64_t second_half_hits) {
    const Signal s = classify(hit_rate, first_half_hits, second_half_hits);
    if (s != pending_) {
      pending_ = s;
      persisted_ = 0;
    }
    if (s == Signal::none) return Signal::none;
    persisted_ += cfg_.sample_interval;
    if (persisted_ < cfg_.settling_window) return Signal::none;
    persisted_ = 0;
    return s;
  }

  void reset() {
    pending_ = Signal::none;
    persisted_ = 0;
  }

  std::uint64_t persisted() const { return persisted_; }
  const AdaptiveConfig& config() const { return cfg_; }

 private:
  AdaptiveConfig cfg_;
  Signal pending_ = Signal::none;
  std::uint64_t persisted_ = 0;
};

/// Plan that fuses the region holding `lrn` with its equally sized buddy.
/// Returns nothing when the buddy is split finer or the result would exceed
/// the maximum size.
///
/// The merged region lands on the 2Q-aligned physical block that already
/// holds the initiating region. Its key is chosen so the initiator's lines
/// stay put; the buddy moves into the other half, and whatever occupied that
/// half shifts, keys unchanged, into the space the buddy vacates. Occupants
/// of the other half are never larger than Q, since a larger aligned region
/// there would also contain the initiator.
inline std::optional<RegionPlan> plan_merge(const TieredTranslation& tt, std::uint64_t lrn) {
  const RegionAssignment a = tt.region_at(lrn);
  if (a.level >= tt.max_level()) return std::nullopt;
  const std::uint64_t buddy_base = a.base_lrn ^ (1ull << a.level);
  const RegionAssignment b = tt.region_at(buddy_base);
  if (b.base_lrn != buddy_base || b.level != a.level) return std::nullopt;

  const std::uint64_t p = tt.granularity();
  const std::uint64_t q = p << a.level;
  const std::uint64_t a_block = a.d & ~(q - 1);
  const std::uint64_t b_block = b.d & ~(q - 1);
  const std::uint64_t target = a_block & ~(2 * q - 1);
  const std::uint64_t a_half = (a_block - target) / q;
  const std::uint64_t a_logical_half = a.base_lrn < b.base_lrn ? 0 : 1;
  const std::uint64_t key = ((a_half ^ a_logical_half) * q) | (a.d & (q - 1));

  RegionPlan plan;
  plan.push_back({std::min(a.base_lrn, b.base_lrn), a.level + 1, target + key});
  const std::uint64_t free_half = target + (1 - a_half) * q;
  if (b_block != free_half) {
    for (std::uint64_t pb = free_half / p; pb < (free_half + q) / p;) {
      const RegionAssignment o = tt.region_at(tt.owner_of_block(pb));
      const std::uint64_t oq = p << o.level;
      const std::uint64_t obase = o.d & ~(oq - 1);
      plan.push_back({o.base_lrn, o.level, b_block + (obase - free_half) + (o.d & (oq - 1))});
      pb += 1ull << o.level;
    }
  }
  return plan;
}

/// Plan that halves a region without moving data: for half j the physical
/// half is j XOR the key's top bit and the key loses that bit.
inline std::optional<RegionPlan> plan_split(const TieredTranslation& tt, std::uint64_t lrn) {
  const RegionAssignment r = tt.region_at(lrn);
  if (r.level == 0) return std::nullopt;
  const std::uint64_t q = tt.granularity() << (r.level - 1);
  const std::uint64_t block = r.d & ~(2 * q - 1);
  const std::uint64_t key = r.d & (2 * q - 1);
  const std::uint64_t msb = key / q;
  RegionPlan plan;
  for (std::uint64_t j = 0; j < 2; ++j)
    plan.push_back({r.base_lrn + (j << (r.level - 1)), r.level - 1, block + (j ^ msb) * q + (key & (q - 1))});
  return plan;
}

/// Merges the region holding `lrn` with its buddy, first coalescing the
/// buddy's range when it is split finer. Returns false if nothing merged.
inline bool merge_region(TieredTranslation& tt, std::uint64_t lrn, MovementList& out) {
  const RegionAssignment a = tt.region_at(lrn);
  if (a.level >= tt.max_level()) return false;
  const std::uint64_t buddy_base = a.base_lrn ^ (1ull << a.level);
  while (tt.region_at(buddy_base).level < a.level)
    if (!merge_region(tt, buddy_base, out)) return false;
  const auto plan = plan_merge(tt, a.base_lrn);
  if (!plan) return false;
  tt.update_after_movement(*plan, out);
  return true;
}

inline bool split_region(TieredTranslation& tt, std::uint64_t lrn, MovementList& out) {
  const auto plan = plan_split(tt, lrn);
  if (!plan) return false;
  tt.update_after_movement(*plan, out);
  return true;
}

struct TimelineRecord {
  std::uint64_t request_index = 0;
  double hit_rate = 0;
  double avg_q = 0;
  Signal action = Signal::none;
  friend bool operator==(const TimelineRecord&, const TimelineRecord&) = default;
};

/// The adaptive policy. Feed it every translation outcome; every
/// sample_interval requests it samples the windowed hit rate and, once a
/// signal has settled, merges every cached region with its buddy or splits
/// every enlarged region by one level.
class AdaptiveController {
 public:
  explicit AdaptiveController(const AdaptiveConfig& cfg) : state_(cfg), window_(cfg.observation_window) {}

  void record(bool hit) {
    window_.push(hit);
    ++requests_;
    if (++since_window_ == state_.config().observation_window) since_window_ = 0, window_boundary_ = true;
  }

  bool sample_due() const { return requests_ > 0 && requests_ % state_.config().sample_interval == 0; }

  /// Takes a sample and applies any settled action.
  TimelineRecord sample(TieredTranslation& tt, MovementList& out) {
    MappingCache& cmt = tt.cmt();
    if (window_boundary_) {
      window_boundary_ = false;
      cmt.reset_registers();
    }
    TimelineRecord rec{requests_, window_.rate(), 0, Signal::none};
    rec.action = state_.decide(rec.hit_rate, cmt.first_half_hits(), cmt.second_half_hits());
    if (rec.action == Signal::merge)
      merge_pass(tt, out);
    else if (rec.action == Signal::split)
      split_pass(tt, out);
    if (rec.action != Signal::none) {
      // Outcomes from before the change say nothing about the new layout.
      window_.clear();
      cmt.reset_registers();
    }
    rec.avg_q = tt.average_region_lines();
    return rec;
  }

  /// Sample without acting.
  TimelineRecord observe(const TieredTranslation& tt) {
    if (window_boundary_) window_boundary_ = false;
    return {requests_, window_.rate(), tt.average_region_lines(), Signal::none};
  }

  static std::uint64_t merge_pass(TieredTranslation& tt, MovementList& out) {
    std::set<std::uint64_t> fresh;
    std::uint64_t merged = 0;
    for (const auto& e : tt.cmt().entries_mru()) {
      const RegionAssignment r = tt.region_at(e.base_lrn);
      if (fresh.contains(r.base_lrn)) continue;
      if (merge_region(tt, r.base_lrn, out)) {
        ++merged;
        fresh.insert(tt.region_at(r.base_lrn).base_lrn);
      }
    }
    return merged;
  }

  static std::uint64_t split_pass(TieredTranslation& tt, MovementList& out) {
    std::vector<std::uint64_t> bases;
    for (std::uint64_t lrn = 0; lrn < tt.imt().size();) {
      const RegionAssignment r = tt.region_at(lrn);
      if (r.level > 0) bases.push_back(r.base_lrn);
      lrn = r.base_lrn + (1ull << r.level);
    }
    for (std::uint64_t base : bases) split_region(tt, base, out);
    return bases.size();
  }

  const AdaptiveState& state() const { return state_; }
  const HitRateWindow& window() const { return window_; }
  std::uint64_t requests() const { return requests_; }

 private:
  AdaptiveState state_;
  HitRateWindow window_;
  std::uint64_t requests_ = 0;
  std::uint64_t since_window_ = 0;
  bool window_boundary_ = false;
};

}  // namespace nvmwear
