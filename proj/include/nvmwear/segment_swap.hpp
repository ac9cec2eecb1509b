#pragma once

#include <cstdint>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "nvmwear/wear_leveler.hpp"

namespace nvmwear {

/// Table-based segment swapping. Each physical segment has a lifetime write
/// counter; after `threshold` writes since its last swap, a segment trades
/// place with the least-written physical segment. Intra-segment offsets are
/// never permuted.
class SegmentSwap final : public WearLeveler {
 public:
  /// threshold == 0 disables swapping.
  SegmentSwap(std::uint64_t lines, std::uint64_t segment_lines, std::uint64_t threshold)
      : lines_(lines),
        segment_lines_(segment_lines),
        threshold_(threshold),
        l2p_(lines / segment_lines),
        p2l_(lines / segment_lines),
        wear_(lines / segment_lines, 0),
        since_swap_(lines / segment_lines, 0) {
    if (!is_pow2(segment_lines) || segment_lines > lines)
      throw ConfigError("segswap.segment_lines must be a power of two not larger than geometry.lines");
    std::iota(l2p_.begin(), l2p_.end(), 0);
    std::iota(p2l_.begin(), p2l_.end(), 0);
    for (std::uint64_t p = 0; p < wear_.size(); ++p) by_wear_.emplace(0, p);
  }

  std::string_view name() const override { return "segswap"; }
  std::uint64_t logical_lines() const override { return lines_; }
  std::uint64_t physical_lines() const override { return lines_; }
  std::uint64_t region_lines() const override { return segment_lines_; }

  LineAddr translate(LineAddr lma) const override {
    return l2p_[lma / segment_lines_] * segment_lines_ + lma % segment_lines_;
  }

  void on_write(LineAddr lma, MovementList& out) override {
    const std::uint64_t phys = l2p_[lma / segment_lines_];
    bump_wear(phys, 1);
    if (threshold_ == 0 || ++since_swap_[phys] < threshold_) return;
    since_swap_[phys] = 0;
    const std::uint64_t coldest = by_wear_.begin()->second;
    if (coldest == phys) return;
    swap_segments(phys, coldest, out);
  }

  std::uint64_t segment_count() const { return l2p_.size(); }
  std::uint64_t physical_segment_of(std::uint64_t logical_segment) const { return l2p_[logical_segment]; }
  std::uint64_t segment_wear(std::uint64_t physical_segment) const { return wear_[physical_segment]; }

 private:
  void bump_wear(std::uint64_t phys, std::uint64_t by) {
    by_wear_.erase({wear_[phys], phys});
    wear_[phys] += by;
    by_wear_.emplace(wear_[phys], phys);
  }

  void swap_segments(std::uint64_t pa, std::uint64_t pb, MovementList& out) {
    const std::uint64_t la = p2l_[pa];
    const std::uint64_t lb = p2l_[pb];
    for (std::uint64_t off = 0; off < segment_lines_; ++off) {
      out.push_back({MoveKind::data, la * segment_lines_ + off, pa * segment_lines_ + off, pb * segment_lines_ + off});
      out.push_back({MoveKind::data, lb * segment_lines_ + off, pb * segment_lines_ + off, pa * segment_lines_ + off});
    }
    l2p_[la] = pb;
    l2p_[lb] = pa;
    p2l_[pa] = lb;
    p2l_[pb] = la;
    bump_wear(pa, segment_lines_);
    bump_wear(pb, segment_lines_);
  }

  std::uint64_t lines_;
  std::uint64_t segment_lines_;
  std::uint64_t threshold_;
  std::vector<std::uint64_t> l2p_;
  std::vector<std::uint64_t> p2l_;
  std::vector<std::uint64_t> wear_;
  std::vector<std::uint64_t> since_swap_;
  // Ordered by (wear, physical index): begin() is the least-written segment
  // with the lowest index among ties.
  std::set<std::pair<std::uint64_t, std::uint64_t>> by_wear_;
};

}  // namespace nvmwear
