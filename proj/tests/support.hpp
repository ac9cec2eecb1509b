#pragma once

// Shared test helpers: a location tracker that replays movement lists and
// cross-checks them against a mapping, and small config builders.

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "nvmwear/nvmwear.hpp"

namespace nvmwear::testing {

/// Follows every logical line through the data movements it is told about.
/// A movement whose source is not where the line currently lives means the
/// engine described a copy of the wrong data.
class LocationTracker {
 public:
  explicit LocationTracker(std::uint64_t lines, const std::function<LineAddr(LineAddr)>& map) : loc_(lines) {
    for (std::uint64_t x = 0; x < lines; ++x) loc_[x] = map(x);
  }

  ::testing::AssertionResult apply(const MovementList& moves) {
    for (const Movement& m : moves) {
      if (m.kind != MoveKind::data) continue;
      if (loc_[m.lma] != m.from)
        return ::testing::AssertionFailure() << "line " << m.lma << " lives at " << loc_[m.lma] << " but moved from "
                                             << m.from;
      loc_[m.lma] = m.to;
    }
    return ::testing::AssertionSuccess();
  }

  LineAddr where(LineAddr lma) const { return loc_[lma]; }

  /// Tracked locations agree with `map` and form a permutation of [0, span).
  ::testing::AssertionResult matches(const std::function<LineAddr(LineAddr)>& map, std::uint64_t span) const {
    std::vector<std::uint8_t> seen(span, 0);
    for (std::uint64_t x = 0; x < loc_.size(); ++x) {
      const LineAddr p = map(x);
      if (p != loc_[x])
        return ::testing::AssertionFailure() << "line " << x << " maps to " << p << " but data is at " << loc_[x];
      if (p >= span) return ::testing::AssertionFailure() << "line " << x << " maps outside: " << p;
      if (seen[p]++) return ::testing::AssertionFailure() << "physical line " << p << " holds two lines";
    }
    return ::testing::AssertionSuccess();
  }

 private:
  std::vector<LineAddr> loc_;
};

/// Simulated physical contents for read-after-write checks. Each slot holds
/// (owner line, value). Moves copy whatever the source slot holds; a line
/// whose slot is overwritten before it moved is parked in a staging buffer,
/// the way the controller stages a swap, and a later move of that line may
/// read it from there.
class ShadowMemory {
 public:
  static constexpr std::uint64_t kEmpty = ~0ull;

  ShadowMemory(std::uint64_t lines, std::uint64_t span, const std::function<LineAddr(LineAddr)>& map)
      : owner_(span, kEmpty), value_(span, 0), expected_(lines, 0) {
    for (std::uint64_t x = 0; x < lines; ++x) owner_[map(x)] = x;
  }

  void write(LineAddr lma, LineAddr pma) {
    owner_.at(pma) = lma;
    value_[pma] = ++stamp_;
    expected_[lma] = stamp_;
  }

  ::testing::AssertionResult read(LineAddr lma, LineAddr pma) const {
    if (owner_.at(pma) != lma || value_[pma] != expected_[lma])
      return ::testing::AssertionFailure() << "read of line " << lma << " at " << pma << " returned stale data";
    return ::testing::AssertionSuccess();
  }

  ::testing::AssertionResult apply(const MovementList& moves) {
    staged_.clear();
    for (const Movement& m : moves) {
      if (m.kind != MoveKind::data) continue;
      std::uint64_t v;
      if (owner_.at(m.from) == m.lma) {
        v = value_[m.from];
        owner_[m.from] = kEmpty;  // the stale copy left behind belongs to nobody
      } else {
        auto it = std::find_if(staged_.begin(), staged_.end(), [&](const auto& s) { return s.lma == m.lma; });
        if (it == staged_.end() || it->slot != m.from)
          return ::testing::AssertionFailure() << "move of line " << m.lma << " from " << m.from
                                               << " finds no copy of it";
        v = it->value;
        staged_.erase(it);
      }
      const std::uint64_t victim = owner_.at(m.to);
      if (victim != kEmpty && victim != m.lma) staged_.push_back({victim, m.to, value_[m.to]});
      owner_[m.to] = m.lma;
      value_[m.to] = v;
    }
    return ::testing::AssertionSuccess();
  }

  /// Every line sits at `map(x)` with its last written value.
  ::testing::AssertionResult consistent(std::uint64_t lines, const std::function<LineAddr(LineAddr)>& map) const {
    for (std::uint64_t x = 0; x < lines; ++x) {
      const auto r = read(x, map(x));
      if (!r) return r;
    }
    return ::testing::AssertionSuccess();
  }

 private:
  struct Staged {
    std::uint64_t lma;
    std::uint64_t slot;
    std::uint64_t value;
  };
  std::vector<std::uint64_t> owner_;
  std::vector<std::uint64_t> value_;
  std::vector<std::uint64_t> expected_;
  std::vector<Staged> staged_;
  std::uint64_t stamp_ = 0;
};

/// Is `map` injective on [0, lines) into [0, span)?
inline ::testing::AssertionResult is_injective(std::uint64_t lines, std::uint64_t span,
                                               const std::function<LineAddr(LineAddr)>& map) {
  std::vector<std::uint8_t> seen(span, 0);
  for (std::uint64_t x = 0; x < lines; ++x) {
    const LineAddr p = map(x);
    if (p >= span) return ::testing::AssertionFailure() << x << " -> " << p << " out of range";
    if (seen[p]++) return ::testing::AssertionFailure() << "collision at physical " << p;
  }
  return ::testing::AssertionSuccess();
}

inline SimConfig small_config(const std::string& scheme, std::uint64_t lines = 1 << 12) {
  SimConfig c;
  c.scheme = scheme;
  c.geometry.lines = lines;
  c.cmt.capacity = 64;
  c.rbsg.regions = 16;
  c.tlsr.regions = 16;
  c.segswap.segment_lines = 64;
  c.sawl.max_merge_factor = 16;
  c.sawl.sample_interval = 1000;
  c.sawl.observation_window = 4000;
  c.sawl.settling_window = 2000;
  c.endurance.limit = 1000000;
  c.tiered.gtd_period = 16;
  c.resolve();
  return c;
}

}  // namespace nvmwear::testing
