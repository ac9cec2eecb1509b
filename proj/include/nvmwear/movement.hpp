#pragma once

#include <cstdint>
#include <vector>

#include "nvmwear/address_space.hpp"

namespace nvmwear {

enum class MoveKind : std::uint8_t { data, metadata };

/// One physical line write caused by wear leveling rather than by the user.
/// For data moves, the content of logical line `lma` is copied from `from` to
/// `to`. A batch of moves is applied as a unit: all sources are read before
/// any destination is written (the controller buffer stages swaps).
/// For metadata moves, `lma` is the logical translation line and `to` the
/// physical translation line being written.
struct Movement {
  MoveKind kind = MoveKind::data;
  LineAddr lma = 0;
  LineAddr from = 0;
  LineAddr to = 0;
  friend bool operator==(const Movement&, const Movement&) = default;
};

using MovementList = std::vector<Movement>;

}  // namespace nvmwear
