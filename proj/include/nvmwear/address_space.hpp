#pragma once

// Line/region arithmetic shared by every wear-leveling scheme: region
// numbering, the XOR intra-region map, and the packed mapping-entry word.

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace nvmwear {

using LineAddr = std::uint64_t;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class AddressRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

constexpr bool is_pow2(std::uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

constexpr unsigned log2_exact(std::uint64_t x) {
  return static_cast<unsigned>(std::countr_zero(x));
}

struct Geometry {
  std::uint64_t lines = 1ull << 20;      // M
  std::uint64_t granularity = 4;         // P, initial/minimum region size
  std::uint32_t entries_per_line = 6;    // K, IMT entries per translation line
  std::uint32_t line_size = 256;         // bytes

  std::uint64_t region_count() const { return lines / granularity; }
  unsigned address_bits() const { return log2_exact(lines); }

  void validate() const {
    if (!is_pow2(lines)) throw ConfigError("geometry.lines must be a power of two");
    if (!is_pow2(granularity)) throw ConfigError("geometry.granularity must be a power of two");
    if (granularity > lines) throw ConfigError("geometry.granularity must not exceed geometry.lines");
    if (entries_per_line == 0) throw ConfigError("geometry.entries_per_line must be positive");
    if (line_size == 0) throw ConfigError("geometry.line_size must be positive");
  }
};

inline std::uint64_t lrn_of(LineAddr lma, std::uint64_t granularity) { return lma / granularity; }

inline std::uint64_t lrn_of(const Geometry& g, LineAddr lma) {
  if (lma >= g.lines)
    throw AddressRangeError("logical address " + std::to_string(lma) + " outside [0, " +
                            std::to_string(g.lines) + ")");
  return lrn_of(lma, g.granularity);
}

/// Physical offset of a logical offset under an XOR key. An involution for a
/// fixed key and a bijection on [0, Q) for any key < Q.
constexpr std::uint64_t intra_region_map(std::uint64_t lao, std::uint64_t key) { return lao ^ key; }

constexpr LineAddr compose_pma(std::uint64_t prn, std::uint64_t q, std::uint64_t pao) {
  return prn * q + pao;
}

struct RegionEntry {
  std::uint64_t prn = 0;
  std::uint64_t key = 0;
  friend bool operator==(const RegionEntry&, const RegionEntry&) = default;
};

inline void require_pow2_granularity(std::uint64_t q) {
  if (!is_pow2(q)) throw ConfigError("granularity " + std::to_string(q) + " is not a power of two");
}

/// D = prn * Q + key. Because key < Q, D always lies inside the region's own
/// physical range, so distinct regions never share a D.
inline std::uint64_t pack_entry(std::uint64_t prn, std::uint64_t key, std::uint64_t q) {
  require_pow2_granularity(q);
  return prn * q + key;
}

inline RegionEntry unpack_entry(std::uint64_t d, std::uint64_t q) {
  require_pow2_granularity(q);
  return {d >> log2_exact(q), d & (q - 1)};
}

/// Region size in lines for `lrn`: P times the size of the maximal aligned
/// run of identical entries containing it.
inline std::uint64_t effective_granularity(std::span<const std::uint64_t> entries, std::uint64_t lrn,
                                           std::uint64_t granularity) {
  const std::uint64_t d = entries[lrn];
  std::uint64_t run = 1;
  while (run * 2 <= entries.size()) {
    const std::uint64_t span_len = run * 2;
    const std::uint64_t start = lrn & ~(span_len - 1);
    bool same = true;
    for (std::uint64_t i = start; i < start + span_len; ++i) {
      if (entries[i] != d) {
        same = false;
        break;
      }
    }
    if (!same) break;
    run = span_len;
  }
  return run * granularity;
}

/// Bit split of an entry word for region size Q: m region-address bits and
/// n offset bits with m + n = log2(M).
struct EntryLayout {
  unsigned region_bits = 0;
  unsigned offset_bits = 0;
  friend bool operator==(const EntryLayout&, const EntryLayout&) = default;
};

inline EntryLayout entry_layout(std::uint64_t lines, std::uint64_t q) {
  require_pow2_granularity(q);
  const unsigned total = log2_exact(lines);
  const unsigned n = log2_exact(q);
  return {total - n, n};
}

}  // namespace nvmwear
