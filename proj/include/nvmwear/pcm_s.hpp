#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "nvmwear/rng.hpp"
#include "nvmwear/wear_leveler.hpp"

namespace nvmwear {

/// Region-swapping hybrid scheme (PCM-S). A table maps each logical region to
/// a physical region and an XOR key. A global write counter fires every
/// `period` writes; the written line's region then trades physical regions
/// with a uniformly chosen region, and both get fresh keys.
class RegionSwap final : public WearLeveler {
 public:
  RegionSwap(std::uint64_t lines, std::uint64_t regions, std::uint64_t period, std::uint64_t seed,
             Stream stream = Stream::engine)
      : lines_(lines), regions_(regions), period_(period), rng_(Rng::substream(seed, stream)) {
    if (!is_pow2(regions) || regions > lines) throw ConfigError("pcms.regions must be a power of two <= geometry.lines");
    region_lines_ = lines / regions;
    entries_.resize(regions);
    p2l_.resize(regions);
    std::vector<std::uint64_t> perm(regions);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::uint64_t i = regions; i > 1; --i) std::swap(perm[i - 1], perm[rng_.uniform(i)]);
    for (std::uint64_t r = 0; r < regions; ++r) {
      entries_[r] = {perm[r], rng_.uniform(region_lines_)};
      p2l_[perm[r]] = r;
    }
  }

  std::string_view name() const override { return "pcms"; }
  std::uint64_t logical_lines() const override { return lines_; }
  std::uint64_t physical_lines() const override { return lines_; }
  std::uint64_t region_lines() const override { return region_lines_; }

  LineAddr translate(LineAddr lma) const override {
    const RegionEntry& e = entries_[lma / region_lines_];
    return compose_pma(e.prn, region_lines_, intra_region_map(lma % region_lines_, e.key));
  }

  void on_write(LineAddr lma, MovementList& out) override {
    if (period_ == 0 || ++writes_ < period_) return;
    writes_ = 0;
    const std::uint64_t a = lma / region_lines_;
    const std::uint64_t b = p2l_[rng_.uniform(regions_)];
    const std::uint64_t ka = rng_.uniform(region_lines_);
    const std::uint64_t kb = rng_.uniform(region_lines_);
    swap_regions(a, b, ka, kb, out);
  }

  /// Exchanges the physical regions of logical regions a and b and installs
  /// the given keys (a == b re-keys in place).
  void swap_regions(std::uint64_t a, std::uint64_t b, std::uint64_t key_a, std::uint64_t key_b, MovementList& out) {
    std::vector<LineAddr> lmas;
    lmas.reserve(2 * region_lines_);
    for (std::uint64_t off = 0; off < region_lines_; ++off) lmas.push_back(a * region_lines_ + off);
    if (b != a)
      for (std::uint64_t off = 0; off < region_lines_; ++off) lmas.push_back(b * region_lines_ + off);
    std::vector<LineAddr> before(lmas.size());
    for (std::size_t i = 0; i < lmas.size(); ++i) before[i] = translate(lmas[i]);
    if (a == b) {
      entries_[a].key = key_a;
    } else {
      std::swap(entries_[a].prn, entries_[b].prn);
      entries_[a].key = key_a;
      entries_[b].key = key_b;
      p2l_[entries_[a].prn] = a;
      p2l_[entries_[b].prn] = b;
    }
    std::vector<LineAddr> after(lmas.size());
    for (std::size_t i = 0; i < lmas.size(); ++i) after[i] = translate(lmas[i]);
    emit_relocations(lmas, before, after, out);
  }

  /// Test hook: replaces the whole table; `entries` must be a permutation.
  void set_entries(std::vector<RegionEntry> entries) {
    entries_ = std::move(entries);
    for (std::uint64_t r = 0; r < regions_; ++r) p2l_[entries_[r].prn] = r;
  }

  const RegionEntry& entry(std::uint64_t region) const { return entries_[region]; }
  std::uint64_t region_count() const { return regions_; }

 private:
  std::uint64_t lines_;
  std::uint64_t regions_;
  std::uint64_t period_;
  std::uint64_t region_lines_ = 0;
  Rng rng_;
  std::vector<RegionEntry> entries_;
  std::vector<std::uint64_t> p2l_;
  std::uint64_t writes_ = 0;
};

}  // namespace nvmwear
