#pragma once

#include <cstdint>
#include <vector>

#include "nvmwear/rng.hpp"
#include "nvmwear/wear_leveler.hpp"

namespace nvmwear {

/// Static invertible scrambler over [0, 2^bits): x -> ((x * a) ^ k) * b.
/// Odd multipliers are units modulo 2^bits, so the map is a bijection.
class AddressScrambler {
 public:
  AddressScrambler() = default;
  AddressScrambler(unsigned bits, Rng& rng) : mask_(bits >= 64 ? ~0ull : (1ull << bits) - 1) {
    a_ = (rng.next() | 1) & mask_;
    b_ = (rng.next() | 1) & mask_;
    k_ = rng.next() & mask_;
    a_inv_ = inverse(a_);
    b_inv_ = inverse(b_);
  }

  std::uint64_t forward(std::uint64_t x) const { return ((((x * a_) & mask_) ^ k_) * b_) & mask_; }
  std::uint64_t backward(std::uint64_t y) const { return ((((y * b_inv_) & mask_) ^ k_) * a_inv_) & mask_; }

 private:
  // Newton iteration for the inverse of an odd number modulo 2^64.
  std::uint64_t inverse(std::uint64_t a) const {
    std::uint64_t x = a;
    for (int i = 0; i < 6; ++i) x *= 2 - a * x;
    return x & mask_;
  }

  std::uint64_t mask_ = 0;
  std::uint64_t a_ = 1, b_ = 1, k_ = 0, a_inv_ = 1, b_inv_ = 1;
};

/// Region-based Start-Gap. Each region of R logical lines owns R + 1
/// physical slots; one of them is the gap. Every `period` writes to a region
/// the line next to the gap moves into it. Optionally a static scrambler
/// spreads logical addresses over regions first.
class StartGap final : public WearLeveler {
 public:
  struct RegionState {
    std::uint64_t start = 0;
    std::uint64_t gap = 0;
    std::uint64_t writes = 0;
  };

  StartGap(std::uint64_t lines, std::uint64_t regions, std::uint64_t period, bool randomize, std::uint64_t seed)
      : lines_(lines), regions_(regions), period_(period), randomize_(randomize) {
    if (!is_pow2(regions) || regions > lines) throw ConfigError("rbsg.regions must be a power of two <= geometry.lines");
    region_lines_ = lines / regions;
    state_.assign(regions, RegionState{0, region_lines_, 0});
    if (randomize_) {
      Rng rng = Rng::substream(seed, Stream::randomizer);
      scrambler_ = AddressScrambler(log2_exact(lines), rng);
    }
  }

  std::string_view name() const override { return "rbsg"; }
  std::uint64_t logical_lines() const override { return lines_; }
  std::uint64_t physical_lines() const override { return regions_ * (region_lines_ + 1); }
  std::uint64_t region_lines() const override { return region_lines_; }

  LineAddr translate(LineAddr lma) const override {
    const std::uint64_t ia = randomize_ ? scrambler_.forward(lma) : lma;
    const std::uint64_t region = ia / region_lines_;
    return region * (region_lines_ + 1) + slot_of(state_[region], ia % region_lines_);
  }

  void on_write(LineAddr lma, MovementList& out) override {
    const std::uint64_t ia = randomize_ ? scrambler_.forward(lma) : lma;
    const std::uint64_t region = ia / region_lines_;
    RegionState& st = state_[region];
    if (period_ == 0 || ++st.writes < period_) return;
    st.writes = 0;
    move_gap(region, out);
  }

  const RegionState& region_state(std::uint64_t region) const { return state_[region]; }

 private:
  std::uint64_t slot_of(const RegionState& st, std::uint64_t la) const {
    std::uint64_t pa = (la + st.start) % region_lines_;
    if (pa >= st.gap) ++pa;
    return pa;
  }

  std::uint64_t logical_at(const RegionState& st, std::uint64_t slot) const {
    const std::uint64_t p = slot < st.gap ? slot : slot - 1;
    return (p + region_lines_ - st.start) % region_lines_;
  }

  void move_gap(std::uint64_t region, MovementList& out) {
    RegionState& st = state_[region];
    const std::uint64_t base = region * (region_lines_ + 1);
    const std::uint64_t src = st.gap == 0 ? region_lines_ : st.gap - 1;
    const std::uint64_t dst = st.gap == 0 ? 0 : st.gap;
    const std::uint64_t ia = region * region_lines_ + logical_at(st, src);
    const LineAddr lma = randomize_ ? scrambler_.backward(ia) : ia;
    out.push_back({MoveKind::data, lma, base + src, base + dst});
    if (st.gap == 0) {
      st.gap = region_lines_;
      st.start = (st.start + 1) % region_lines_;
    } else {
      --st.gap;
    }
  }

  std::uint64_t lines_;
  std::uint64_t regions_;
  std::uint64_t period_;
  bool randomize_;
  std::uint64_t region_lines_ = 0;
  std::vector<RegionState> state_;
  AddressScrambler scrambler_;
};

}  // namespace nvmwear
