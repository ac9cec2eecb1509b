#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <numeric>
#include <vector>

#include "nvmwear/rng.hpp"
#include "nvmwear/wear_leveler.hpp"

namespace nvmwear {

/// Multi-way region migration (MWSR). Each logical region keeps the physical
/// region and key of the previous and current rounds plus a migration
/// pointer. A round moves the region line by line into a free physical
/// region drawn at random from a small pool; lines with logical offset below
/// the pointer resolve through the current mapping, the rest through the
/// previous one. Every `period` writes to a region either starts a round or
/// migrates one more line. When the pool is empty, the oldest unfinished
/// round is completed at once to free its old region.
class MultiWayMigration final : public WearLeveler {
 public:
  struct RegionState {
    RegionEntry prev;
    RegionEntry cur;
    std::uint64_t progress = 0;  // == region_lines when idle
    std::uint64_t writes = 0;
  };

  MultiWayMigration(std::uint64_t lines, std::uint64_t regions, std::uint64_t period, std::uint64_t free_regions,
                    std::uint64_t seed)
      : lines_(lines), regions_(regions), period_(period), rng_(Rng::substream(seed, Stream::engine)) {
    if (!is_pow2(regions) || regions > lines) throw ConfigError("mwsr.regions must be a power of two <= geometry.lines");
    if (free_regions == 0) throw ConfigError("mwsr.free_regions must be at least 1");
    region_lines_ = lines / regions;
    const std::uint64_t physical_regions = regions + free_regions;
    std::vector<std::uint64_t> perm(physical_regions);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::uint64_t i = physical_regions; i > 1; --i) std::swap(perm[i - 1], perm[rng_.uniform(i)]);
    state_.resize(regions);
    for (std::uint64_t r = 0; r < regions; ++r) {
      const RegionEntry e{perm[r], rng_.uniform(region_lines_)};
      state_[r] = {e, e, region_lines_, 0};
    }
    free_.assign(perm.begin() + static_cast<std::ptrdiff_t>(regions), perm.end());
  }

  std::string_view name() const override { return "mwsr"; }
  std::uint64_t logical_lines() const override { return lines_; }
  std::uint64_t physical_lines() const override { return (regions_ + free_.size() + migrating_) * region_lines_; }
  std::uint64_t region_lines() const override { return region_lines_; }

  LineAddr translate(LineAddr lma) const override {
    const RegionState& st = state_[lma / region_lines_];
    const std::uint64_t lao = lma % region_lines_;
    const RegionEntry& e = lao < st.progress ? st.cur : st.prev;
    return compose_pma(e.prn, region_lines_, intra_region_map(lao, e.key));
  }

  void on_write(LineAddr lma, MovementList& out) override {
    const std::uint64_t r = lma / region_lines_;
    RegionState& st = state_[r];
    if (period_ == 0 || ++st.writes < period_) return;
    st.writes = 0;
    if (st.progress < region_lines_) {
      migrate_next(r, out);
    } else {
      if (free_.empty()) finish_round(active_.front(), out);
      const std::uint64_t pick = rng_.uniform(free_.size());
      begin_round(r, {free_[pick], rng_.uniform(region_lines_)});
    }
  }

  const RegionState& region_state(std::uint64_t region) const { return state_[region]; }
  std::size_t free_region_count() const { return free_.size(); }

  /// Test hook: starts a round for `region` into a given free physical region.
  void begin_round(std::uint64_t region, RegionEntry target) {
    RegionState& st = state_[region];
    for (std::size_t i = 0; i < free_.size(); ++i) {
      if (free_[i] == target.prn) {
        free_[i] = free_.back();
        free_.pop_back();
        st.cur = target;
        st.progress = 0;
        ++migrating_;
        active_.push_back(region);
        return;
      }
    }
    throw ConfigError("begin_round: physical region is not free");
  }

  void migrate_next(std::uint64_t region, MovementList& out) {
    RegionState& st = state_[region];
    const LineAddr lma = region * region_lines_ + st.progress;
    const LineAddr from = translate(lma);
    ++st.progress;
    out.push_back({MoveKind::data, lma, from, translate(lma)});
    if (st.progress == region_lines_) {
      free_.push_back(st.prev.prn);
      st.prev = st.cur;
      --migrating_;
      active_.erase(std::find(active_.begin(), active_.end(), region));
    }
  }

  void finish_round(std::uint64_t region, MovementList& out) {
    while (state_[region].progress < region_lines_) migrate_next(region, out);
  }

 private:
  std::uint64_t lines_;
  std::uint64_t regions_;
  std::uint64_t period_;
  std::uint64_t region_lines_ = 0;
  Rng rng_;
  std::vector<RegionState> state_;
  std::vector<std::uint64_t> free_;
  std::uint64_t migrating_ = 0;
  std::deque<std::uint64_t> active_;  // regions mid-round, oldest first
};

}  // namespace nvmwear
