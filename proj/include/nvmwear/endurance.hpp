#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "nvmwear/address_space.hpp"

namespace nvmwear {

class SimulationTerminated : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class WriteOutcome { alive, line_failed, system_failed };

/// Per-line wear with a shared spare pool. A device line fails when its
/// count reaches the endurance limit; the spare that replaces it sits
/// outside the address space and wears the same way.
class WearMap {
 public:
  WearMap(std::uint64_t lines, std::uint64_t endurance, std::uint64_t spares)
      : endurance_(endurance), spares_(spares), addressed_(lines, 0), wear_(lines, 0), remap_(lines, kNone) {
    if (endurance == 0) throw ConfigError("endurance.limit must be positive");
  }

  WriteOutcome record_physical_write(LineAddr pma) {
    if (failed_) throw SimulationTerminated("write after system failure");
    if (pma >= wear_.size()) throw AddressRangeError("physical address out of range");
    ++addressed_[pma];
    ++total_;
    const std::uint32_t spare = remap_[pma];
    std::uint64_t& count = spare == kNone ? wear_[pma] : spare_wear_[spare];
    if (++count < endurance_) return WriteOutcome::alive;
    ++lines_failed_;
    if (spare_wear_.size() == spares_) {
      failed_ = true;
      return WriteOutcome::system_failed;
    }
    remap_[pma] = static_cast<std::uint32_t>(spare_wear_.size());
    spare_wear_.push_back(0);
    return WriteOutcome::line_failed;
  }

  bool system_failed() const { return failed_; }
  std::uint64_t total_writes() const { return total_; }
  std::uint64_t lines_failed() const { return lines_failed_; }
  std::uint64_t spares_used() const { return spare_wear_.size(); }
  std::uint64_t line_count() const { return wear_.size(); }
  std::uint64_t endurance() const { return endurance_; }

  /// All writes ever addressed to `pma`, including those served by spares.
  std::uint64_t writes_to(LineAddr pma) const { return addressed_[pma]; }
  std::span<const std::uint64_t> addressed_counts() const { return addressed_; }

 private:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  std::uint64_t endurance_;
  std::uint64_t spares_;
  std::vector<std::uint64_t> addressed_;
  std::vector<std::uint64_t> wear_;
  std::vector<std::uint32_t> remap_;
  std::vector<std::uint64_t> spare_wear_;
  std::uint64_t total_ = 0;
  std::uint64_t lines_failed_ = 0;
  bool failed_ = false;
};

struct IdealLifetime {
  double user_writes = 0;
  double seconds = 0;
};

/// Lifetime if every line absorbs exactly its endurance.
inline IdealLifetime ideal_lifetime(double lines, double endurance, double lines_per_second) {
  if (!(lines > 0) || !(endurance > 0) || !(lines_per_second > 0))
    throw std::invalid_argument("ideal_lifetime: inputs must be positive");
  const double writes = lines * endurance;
  return {writes, writes / lines_per_second};
}

/// Expected fraction of extra writes when each level remaps one line every
/// period user writes.
inline double overhead_fraction(std::span<const std::uint64_t> periods) {
  double f = 0;
  for (std::uint64_t p : periods) {
    if (p == 0) throw std::invalid_argument("overhead_fraction: periods must be >= 1");
    f += 1.0 / static_cast<double>(p);
  }
  return f;
}

struct LifetimeResult {
  std::uint64_t user_writes = 0;
  std::uint64_t physical_writes = 0;
  std::uint64_t movement_writes = 0;
  std::uint64_t metadata_writes = 0;
  bool failed = false;
  std::uint64_t failure_user_writes = 0;
  double ideal_user_writes = 0;
  double normalized_lifetime = 0;
  double extra_write_fraction = 0;
  std::uint64_t lines_failed = 0;
  std::uint64_t spares_used = 0;
};

}  // namespace nvmwear
