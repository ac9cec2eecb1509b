#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nvmwear/rng.hpp"
#include "nvmwear/wear_leveler.hpp"

namespace nvmwear {

/// One Security Refresh domain over `size` slots (a power of two).
///
/// Within a round, logical x sits at x ^ PK until its pair {x, x ^ PK ^ CK}
/// is refreshed, and at x ^ CK afterwards. Pairs are refreshed in order of
/// their low member. A refresh step remaps one line: the first step of a pair
/// swaps both slots, the second is free. With PK == CK every pair is a
/// single line and nothing moves. A round ends after `size` steps.
class RefreshDomain {
 public:
  RefreshDomain() = default;
  RefreshDomain(std::uint64_t size, std::uint64_t previous_key, std::uint64_t current_key)
      : size_(size), pk_(previous_key), ck_(current_key) {}

  std::uint64_t size() const { return size_; }
  std::uint64_t previous_key() const { return pk_; }
  std::uint64_t current_key() const { return ck_; }
  std::uint64_t steps() const { return steps_; }

  bool remapped(std::uint64_t x) const {
    const std::uint64_t d = pk_ ^ ck_;
    if (d == 0) return x < steps_;
    return pair_index(x, d) < (steps_ + 1) / 2;
  }

  std::uint64_t map(std::uint64_t x) const { return x ^ (remapped(x) ? ck_ : pk_); }

  std::uint64_t unmap(std::uint64_t slot) const {
    const std::uint64_t x = slot ^ ck_;
    return remapped(x) ? x : slot ^ pk_;
  }

  /// Low member of the pair the next step swaps, or nothing if the step is
  /// free. Swapped lines are x and x ^ PK ^ CK.
  struct Step {
    bool moves = false;
    std::uint64_t x = 0;
  };

  Step next_step() const {
    const std::uint64_t d = pk_ ^ ck_;
    if (d == 0 || steps_ % 2 == 1) return {};
    return {true, pair_low(steps_ / 2, d)};
  }

  /// Advances one step. Returns true when the round just completed.
  bool advance() {
    ++steps_;
    return steps_ == size_;
  }

  void start_round(std::uint64_t new_key) {
    pk_ = ck_;
    ck_ = new_key;
    steps_ = 0;
  }

  /// Test hook: sets the round position directly.
  void set_steps(std::uint64_t steps) { steps_ = steps; }

 private:
  static unsigned top_bit(std::uint64_t d) { return 63u - static_cast<unsigned>(std::countl_zero(d)); }

  // Rank of the pair {x, x ^ d} among all pairs, ordered by low member.
  static std::uint64_t pair_index(std::uint64_t x, std::uint64_t d) {
    const unsigned b = top_bit(d);
    if ((x >> b) & 1) x ^= d;
    const std::uint64_t low = x & ((1ull << b) - 1);
    return ((x >> (b + 1)) << b) | low;
  }

  static std::uint64_t pair_low(std::uint64_t index, std::uint64_t d) {
    const unsigned b = top_bit(d);
    const std::uint64_t low = index & ((1ull << b) - 1);
    return ((index >> b) << (b + 1)) | low;
  }

  std::uint64_t size_ = 1;
  std::uint64_t pk_ = 0;
  std::uint64_t ck_ = 0;
  std::uint64_t steps_ = 0;
};

/// Two-level Security Refresh. The outer domain spans the whole memory at
/// line granularity and maps logical to intermediate addresses; each inner
/// sub-region of R lines maps intermediate to physical addresses. Each level
/// counts user writes (outer: all of them, inner: those landing in the
/// sub-region) and takes one refresh step every period writes.
class TwoLevelSecurityRefresh final : public WearLeveler {
 public:
  TwoLevelSecurityRefresh(std::uint64_t lines, std::uint64_t regions, std::uint64_t inner_period,
                          std::uint64_t outer_period, std::uint64_t seed)
      : lines_(lines),
        regions_(regions),
        inner_period_(inner_period),
        outer_period_(outer_period),
        rng_(Rng::substream(seed, Stream::engine)) {
    if (!is_pow2(regions) || regions > lines) throw ConfigError("tlsr.regions must be a power of two <= geometry.lines");
    region_lines_ = lines / regions;
    const std::uint64_t ok = rng_.uniform(lines_);
    outer_ = RefreshDomain(lines_, ok, ok);
    outer_.set_steps(lines_);
    outer_.start_round(fresh_key(lines_, ok));
    inner_.reserve(regions);
    for (std::uint64_t r = 0; r < regions; ++r) {
      const std::uint64_t k = rng_.uniform(region_lines_);
      RefreshDomain dom(region_lines_, k, k);
      dom.set_steps(region_lines_);
      dom.start_round(fresh_key(region_lines_, k));
      inner_.push_back(dom);
    }
    inner_writes_.assign(regions, 0);
  }

  std::string_view name() const override { return "tlsr"; }
  std::uint64_t logical_lines() const override { return lines_; }
  std::uint64_t physical_lines() const override { return lines_; }
  std::uint64_t region_lines() const override { return region_lines_; }

  LineAddr translate(LineAddr lma) const override { return inner_map(outer_.map(lma)); }

  void on_write(LineAddr lma, MovementList& out) override {
    const std::uint64_t region = outer_.map(lma) / region_lines_;
    if (inner_period_ != 0 && ++inner_writes_[region] >= inner_period_) {
      inner_writes_[region] = 0;
      inner_step(region, out);
    }
    if (outer_period_ != 0 && ++outer_writes_ >= outer_period_) {
      outer_writes_ = 0;
      outer_step(out);
    }
  }

  const RefreshDomain& outer() const { return outer_; }
  const RefreshDomain& inner(std::uint64_t region) const { return inner_[region]; }

 private:
  std::uint64_t fresh_key(std::uint64_t size, std::uint64_t current) {
    if (size <= 1) return 0;
    const std::uint64_t k = rng_.uniform(size - 1);
    return k >= current ? k + 1 : k;
  }

  std::uint64_t inner_map(std::uint64_t ia) const {
    const std::uint64_t region = ia / region_lines_;
    return region * region_lines_ + inner_[region].map(ia % region_lines_);
  }

  void inner_step(std::uint64_t region, MovementList& out) {
    RefreshDomain& dom = inner_[region];
    const auto step = dom.next_step();
    if (step.moves) {
      const std::uint64_t base = region * region_lines_;
      const std::uint64_t d = dom.previous_key() ^ dom.current_key();
      const std::array<LineAddr, 2> lmas{outer_.unmap(base + step.x), outer_.unmap(base + (step.x ^ d))};
      const std::array<LineAddr, 2> before{translate(lmas[0]), translate(lmas[1])};
      dom.advance();
      const std::array<LineAddr, 2> after{translate(lmas[0]), translate(lmas[1])};
      emit_relocations(lmas, before, after, out);
      if (dom.steps() == dom.size()) dom.start_round(fresh_key(region_lines_, dom.current_key()));
      return;
    }
    if (dom.advance()) dom.start_round(fresh_key(region_lines_, dom.current_key()));
  }

  void outer_step(MovementList& out) {
    const auto step = outer_.next_step();
    if (step.moves) {
      const std::uint64_t d = outer_.previous_key() ^ outer_.current_key();
      const std::array<LineAddr, 2> lmas{step.x, step.x ^ d};
      const std::array<LineAddr, 2> before{translate(lmas[0]), translate(lmas[1])};
      outer_.advance();
      const std::array<LineAddr, 2> after{translate(lmas[0]), translate(lmas[1])};
      emit_relocations(lmas, before, after, out);
      if (outer_.steps() == outer_.size()) outer_.start_round(fresh_key(lines_, outer_.current_key()));
      return;
    }
    if (outer_.advance()) outer_.start_round(fresh_key(lines_, outer_.current_key()));
  }

  std::uint64_t lines_;
  std::uint64_t regions_;
  std::uint64_t inner_period_;
  std::uint64_t outer_period_;
  std::uint64_t region_lines_ = 0;
  Rng rng_;
  RefreshDomain outer_;
  std::vector<RefreshDomain> inner_;
  std::vector<std::uint64_t> inner_writes_;
  std::uint64_t outer_writes_ = 0;
};

}  // namespace nvmwear
