#pragma once

#include <cstdint>
#include <string_view>

#include "nvmwear/movement.hpp"

namespace nvmwear {

/// Common surface of the baseline wear-leveling engines.
///
/// translate() is a bijection from [0, logical_lines()) into
/// [0, physical_lines()) between on_write() calls. Engines that keep gap or
/// free lines have more physical than logical lines. on_write() is called
/// once per user write (after the write landed) and appends every
/// relocation it performs.
class WearLeveler {
 public:
  virtual ~WearLeveler() = default;

  virtual std::string_view name() const = 0;
  virtual std::uint64_t logical_lines() const = 0;
  virtual std::uint64_t physical_lines() const = 0;
  virtual LineAddr translate(LineAddr lma) const = 0;
  virtual void on_write(LineAddr lma, MovementList& out) = 0;
  /// Lines covered by one mapping decision; used for reporting only.
  virtual std::uint64_t region_lines() const = 0;
};

/// Identity mapping, no movement.
class NoWearLeveling final : public WearLeveler {
 public:
  explicit NoWearLeveling(std::uint64_t lines) : lines_(lines) {}

  std::string_view name() const override { return "none"; }
  std::uint64_t logical_lines() const override { return lines_; }
  std::uint64_t physical_lines() const override { return lines_; }
  LineAddr translate(LineAddr lma) const override { return lma; }
  void on_write(LineAddr, MovementList&) override {}
  std::uint64_t region_lines() const override { return 1; }

 private:
  std::uint64_t lines_;
};

/// Appends a data movement for each line whose physical address changed.
/// `before` and `after` are parallel to `lmas`.
template <class Lmas, class Before, class After>
void emit_relocations(const Lmas& lmas, const Before& before, const After& after, MovementList& out) {
  for (std::size_t i = 0; i < lmas.size(); ++i) {
    if (before[i] != after[i]) out.push_back({MoveKind::data, lmas[i], before[i], after[i]});
  }
}

}  // namespace nvmwear
