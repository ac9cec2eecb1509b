#pragma once

// Tiered address translation: the full mapping table (IMT) lives in a
// reserved NVM area packed into translation lines, the CMT caches recently
// used entries on chip, and the GTD maps logical translation lines to their
// wear-leveled physical location.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvmwear/address_space.hpp"
#include "nvmwear/mapping_cache.hpp"
#include "nvmwear/movement.hpp"
#include "nvmwear/pcm_s.hpp"
#include "nvmwear/rng.hpp"

namespace nvmwear {

class ConsistencyFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct LatencyModel {
  double sram_ns = 5;
  double memory_read_ns = 50;
  double device_read_ns = 50;
  double device_write_ns = 350;

  double hit_ns() const { return sram_ns; }
  double miss_ns() const { return sram_ns + memory_read_ns; }
};

struct TranslationResult {
  LineAddr pma = 0;
  bool hit = false;
  double latency_ns = 0;
};

struct DirectoryConfig {
  std::uint64_t period = 128;       // GTD swap period, in translation-line writes
  std::uint64_t region_lines = 4;   // translation lines per GTD region
};

/// A region as seen through the table: lrns [base_lrn, base_lrn + 2^level)
/// share entry d and cover Q = P * 2^level lines.
struct RegionAssignment {
  std::uint64_t base_lrn = 0;
  unsigned level = 0;
  std::uint64_t d = 0;
  friend bool operator==(const RegionAssignment&, const RegionAssignment&) = default;
};

/// New table contents for a set of regions. Applied atomically.
using RegionPlan = std::vector<RegionAssignment>;

enum class InitialMapping { random, identity };

class TieredTranslation {
 public:
  TieredTranslation(const Geometry& geometry, std::size_t cmt_capacity, unsigned max_level,
                    const LatencyModel& latency, const DirectoryConfig& directory, std::uint64_t seed,
                    InitialMapping init = InitialMapping::random)
      : geom_(geometry),
        p_shift_(log2_exact(geometry.granularity)),
        max_level_(max_level),
        latency_(latency),
        imt_(geometry.region_count()),
        level_(geometry.region_count(), 0),
        owner_(geometry.region_count()),
        cmt_(cmt_capacity, geometry.region_count(), max_level),
        translation_lines_((geometry.region_count() + geometry.entries_per_line - 1) / geometry.entries_per_line),
        directory_area_(std::bit_ceil(std::max<std::uint64_t>(translation_lines_, directory.region_lines))),
        gtd_(directory_area_, directory_area_ / directory.region_lines, directory.period, seed, Stream::directory) {
    geom_.validate();
    if ((geometry.granularity << max_level) > geometry.lines)
      throw ConfigError("maximum region size exceeds geometry.lines");
    const std::uint64_t n = geometry.region_count();
    const std::uint64_t p = geometry.granularity;
    if (init == InitialMapping::identity) {
      for (std::uint64_t r = 0; r < n; ++r) {
        imt_[r] = r * p;
        owner_[r] = r;
      }
    } else {
      Rng rng = Rng::substream(seed, Stream::engine);
      std::vector<std::uint64_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      for (std::uint64_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform(i)]);
      for (std::uint64_t r = 0; r < n; ++r) {
        imt_[r] = perm[r] * p + rng.uniform(p);
        owner_[perm[r]] = r;
      }
    }
  }

  const Geometry& geometry() const { return geom_; }
  std::uint64_t granularity() const { return geom_.granularity; }
  unsigned max_level() const { return max_level_; }
  std::uint64_t data_lines() const { return geom_.lines; }
  std::uint64_t translation_lines() const { return translation_lines_; }
  /// Reserved NVM area holding the IMT, rounded up for the GTD engine.
  std::uint64_t metadata_lines() const { return directory_area_; }
  const LatencyModel& latency() const { return latency_; }

  /// Logical translation line holding lrn's entry: consecutive groups of K
  /// lrns share a line.
  std::uint64_t tlma_of(std::uint64_t lrn) const { return lrn / geom_.entries_per_line; }

  TranslationResult translate(LineAddr lma) {
    const std::uint64_t lrn = lma >> p_shift_;
    if (auto hit = cmt_.lookup(lrn)) {
      ++hits_;
      return {resolve(lma, hit->d, hit->level), true, latency_.hit_ns()};
    }
    ++misses_;
    last_fetch_tpma_ = gtd_.translate(tlma_of(lrn));
    const RegionAssignment r = region_at(lrn);
    cmt_.insert({r.base_lrn, r.d, r.level});
    return {resolve(lma, r.d, r.level), false, latency_.miss_ns()};
  }

  /// Table-only lookup; touches neither the CMT nor the counters.
  LineAddr peek(LineAddr lma) const {
    const std::uint64_t lrn = lma >> p_shift_;
    return resolve(lma, imt_[lrn], level_[lrn]);
  }

  RegionAssignment region_at(std::uint64_t lrn) const {
    const unsigned level = level_[lrn];
    const std::uint64_t base = lrn & ~((1ull << level) - 1);
    return {base, level, imt_[base]};
  }

  std::uint64_t region_lines_at(std::uint64_t lrn) const { return geom_.granularity << level_[lrn]; }

  /// Base lrn of the region occupying physical P-sized block `pblock`.
  std::uint64_t owner_of_block(std::uint64_t pblock) const { return owner_[pblock]; }

  std::uint64_t region_count() const { return regions_; }
  double average_region_lines() const {
    return static_cast<double>(geom_.lines) / static_cast<double>(regions_);
  }

  /// Applies a plan: validates that it re-partitions the same logical lrns
  /// onto the same physical lines, rewrites the IMT (write-through), patches
  /// cached CMT copies, and appends data movements for every relocated line
  /// plus one metadata write per touched translation line (and any GTD
  /// relocation those writes trigger).
  void update_after_movement(const RegionPlan& plan, MovementList& out) {
    if (plan.empty()) return;
    const std::uint64_t n_lrn = geom_.region_count();
    const std::uint64_t p = geom_.granularity;

    // New logical ranges: sorted, aligned, disjoint.
    std::vector<RegionAssignment> fresh(plan);
    std::sort(fresh.begin(), fresh.end(),
              [](const RegionAssignment& a, const RegionAssignment& b) { return a.base_lrn < b.base_lrn; });
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      const auto& a = fresh[i];
      const std::uint64_t len = 1ull << a.level;
      if (a.level > max_level_ || (a.base_lrn & (len - 1)) != 0 || a.base_lrn + len > n_lrn)
        throw ConsistencyFault("plan region at lrn " + std::to_string(a.base_lrn) + " is misaligned");
      if (i > 0 && fresh[i - 1].base_lrn + (1ull << fresh[i - 1].level) > a.base_lrn)
        throw ConsistencyFault("plan regions overlap at lrn " + std::to_string(a.base_lrn));
      if (a.d >= geom_.lines) throw ConsistencyFault("plan entry outside physical space");
    }

    // Old regions overlapping the plan must lie inside it.
    std::vector<RegionAssignment> old;
    for (const auto& a : fresh) {
      const std::uint64_t end = a.base_lrn + (1ull << a.level);
      std::uint64_t lrn = a.base_lrn;
      while (lrn < end) {
        const RegionAssignment r = region_at(lrn);
        if (old.empty() || old.back().base_lrn != r.base_lrn) old.push_back(r);
        lrn = r.base_lrn + (1ull << r.level);
      }
    }
    std::sort(old.begin(), old.end(),
              [](const RegionAssignment& a, const RegionAssignment& b) { return a.base_lrn < b.base_lrn; });
    old.erase(std::unique(old.begin(), old.end(),
                          [](const RegionAssignment& a, const RegionAssignment& b) { return a.base_lrn == b.base_lrn; }),
              old.end());
    if (coalesce_logical(old) != coalesce_logical(fresh))
      throw ConsistencyFault("plan does not cover whole regions");
    if (coalesce_physical(old) != coalesce_physical(fresh, true))
      throw ConsistencyFault("plan is not a bijection onto the vacated physical lines");

    // Lines of every touched region, with their current location.
    std::vector<LineAddr> lmas;
    for (const auto& r : old) {
      const std::uint64_t first = r.base_lrn * p;
      const std::uint64_t count = p << r.level;
      for (std::uint64_t i = 0; i < count; ++i) lmas.push_back(first + i);
    }
    std::vector<LineAddr> before(lmas.size());
    for (std::size_t i = 0; i < lmas.size(); ++i) before[i] = peek(lmas[i]);

    patch_cache(old, fresh);

    std::vector<std::uint64_t> dirty_lines;
    for (const auto& a : fresh) {
      const std::uint64_t len = 1ull << a.level;
      for (std::uint64_t lrn = a.base_lrn; lrn < a.base_lrn + len; ++lrn) {
        if (imt_[lrn] != a.d) {
          imt_[lrn] = a.d;
          dirty_lines.push_back(tlma_of(lrn));
        }
        level_[lrn] = static_cast<std::uint8_t>(a.level);
      }
      const std::uint64_t first_block = (a.d >> (p_shift_ + a.level)) << a.level;
      for (std::uint64_t b = first_block; b < first_block + len; ++b) owner_[b] = a.base_lrn;
    }
    regions_ = regions_ + fresh.size() - old.size();

    for (std::size_t i = 0; i < lmas.size(); ++i) {
      const LineAddr now = peek(lmas[i]);
      if (now != before[i]) out.push_back({MoveKind::data, lmas[i], before[i], now});
    }

    std::sort(dirty_lines.begin(), dirty_lines.end());
    dirty_lines.erase(std::unique(dirty_lines.begin(), dirty_lines.end()), dirty_lines.end());
    for (std::uint64_t tlma : dirty_lines) write_translation_line(tlma, out);
  }

  /// Tier-level swap engine (the data exchange module): every `period` user
  /// writes, the written line's region trades its physical block with a
  /// random equally sized block; every region involved gets a fresh key.
  void exchange_on_write(LineAddr lma, std::uint64_t period, Rng& rng, MovementList& out) {
    if (period == 0 || ++exchange_writes_ < period) return;
    exchange_writes_ = 0;
    update_after_movement(plan_exchange(lma >> p_shift_, rng), out);
  }

  RegionPlan plan_exchange(std::uint64_t lrn, Rng& rng) const {
    const RegionAssignment a = region_at(lrn);
    const unsigned shift = p_shift_ + a.level;
    const std::uint64_t q = 1ull << shift;
    const std::uint64_t home = a.d >> shift;
    const std::uint64_t blocks = geom_.lines >> shift;
    for (int attempt = 0; attempt < 8; ++attempt) {
      const std::uint64_t target = rng.uniform(blocks);
      if (target == home) break;
      RegionPlan plan;
      bool fits = true;
      const std::uint64_t first = target << a.level;
      for (std::uint64_t b = first; b < first + (1ull << a.level);) {
        const RegionAssignment o = region_at(owner_[b]);
        if (o.level > a.level) {
          fits = false;
          break;
        }
        const std::uint64_t oq = geom_.granularity << o.level;
        const std::uint64_t obase = o.d & ~(oq - 1);
        const std::uint64_t moved = (home << shift) + (obase - (target << shift));
        plan.push_back({o.base_lrn, o.level, moved + rng.uniform(oq)});
        b += 1ull << o.level;
      }
      if (!fits) continue;
      plan.push_back({a.base_lrn, a.level, (target << shift) + rng.uniform(q)});
      return plan;
    }
    return {{a.base_lrn, a.level, (home << shift) + rng.uniform(q)}};
  }

  MappingCache& cmt() { return cmt_; }
  const MappingCache& cmt() const { return cmt_; }
  const std::vector<std::uint64_t>& imt() const { return imt_; }
  const RegionSwap& gtd() const { return gtd_; }
  LineAddr gtd_lookup(std::uint64_t tlma) const { return gtd_.translate(tlma); }
  LineAddr last_fetch_tpma() const { return last_fetch_tpma_; }

  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }

  /// Cross-checks the cached region sizes against adjacency in the IMT and
  /// every CMT entry against the IMT. Throws ConsistencyFault on mismatch.
  void verify() const {
    for (std::uint64_t lrn = 0; lrn < imt_.size(); ++lrn) {
      const std::uint64_t q = effective_granularity(imt_, lrn, geom_.granularity);
      if (q != region_lines_at(lrn)) throw ConsistencyFault("region size disagrees with IMT at lrn " + std::to_string(lrn));
    }
    for (const auto& e : cmt_.entries_mru()) {
      const RegionAssignment r = region_at(e.base_lrn);
      if (r.base_lrn != e.base_lrn || r.level != e.level || r.d != e.d)
        throw ConsistencyFault("stale CMT entry at lrn " + std::to_string(e.base_lrn));
    }
  }

  /// Diagnostic dump: `lrn D Q` per IMT entry, then the CMT in MRU order.
  void write_snapshot(std::ostream& os) const {
    os << "# imt\n";
    for (std::uint64_t lrn = 0; lrn < imt_.size(); ++lrn)
      os << lrn << ' ' << imt_[lrn] << ' ' << region_lines_at(lrn) << '\n';
    os << "# cmt\n";
    for (const auto& e : cmt_.entries_mru())
      os << e.base_lrn << ' ' << e.d << ' ' << (geom_.granularity << e.level) << '\n';
  }

 private:
  LineAddr resolve(LineAddr lma, std::uint64_t d, unsigned level) const {
    const unsigned shift = p_shift_ + level;
    const std::uint64_t mask = (1ull << shift) - 1;
    // prn * Q + (lao ^ key), with prn * Q == d & ~mask.
    return (d & ~mask) | ((lma & mask) ^ (d & mask));
  }

  using Span = std::pair<std::uint64_t, std::uint64_t>;

  static std::vector<Span> coalesce(std::vector<Span> spans) {
    std::sort(spans.begin(), spans.end());
    std::vector<Span> out;
    for (const auto& s : spans) {
      if (!out.empty() && out.back().second == s.first)
        out.back().second = s.second;
      else
        out.push_back(s);
    }
    return out;
  }

  static std::vector<Span> coalesce_logical(const std::vector<RegionAssignment>& rs) {
    std::vector<Span> spans;
    for (const auto& r : rs) spans.emplace_back(r.base_lrn, r.base_lrn + (1ull << r.level));
    return coalesce(spans);
  }

  std::vector<Span> coalesce_physical(const std::vector<RegionAssignment>& rs, bool check_disjoint = false) const {
    std::vector<Span> spans;
    for (const auto& r : rs) {
      const std::uint64_t q = geom_.granularity << r.level;
      const std::uint64_t base = r.d & ~(q - 1);
      spans.emplace_back(base, base + q);
    }
    if (check_disjoint) {
      std::vector<Span> sorted = spans;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i - 1].second > sorted[i].first) throw ConsistencyFault("plan regions overlap physically");
    }
    return coalesce(spans);
  }

  // Each cached old region hands its LRU slot to the new region containing
  // its base lrn; if several land in one new region the most recent wins.
  void patch_cache(const std::vector<RegionAssignment>& old, const std::vector<RegionAssignment>& fresh) {
    std::map<std::uint64_t, std::int32_t> keep;  // new base -> node
    std::vector<std::int32_t> drop;
    for (const auto& r : old) {
      const auto node = cmt_.find(r.base_lrn);
      if (!node) continue;
      auto it = std::upper_bound(fresh.begin(), fresh.end(), r.base_lrn,
                                 [](std::uint64_t v, const RegionAssignment& a) { return v < a.base_lrn; });
      const RegionAssignment& target = *std::prev(it);
      auto [slot, inserted] = keep.emplace(target.base_lrn, *node);
      if (!inserted) {
        if (cmt_.stamp(*node) > cmt_.stamp(slot->second)) {
          drop.push_back(slot->second);
          slot->second = *node;
        } else {
          drop.push_back(*node);
        }
      }
    }
    for (std::int32_t n : drop) cmt_.erase(n);
    for (const auto& a : fresh) {
      auto it = keep.find(a.base_lrn);
      if (it != keep.end()) cmt_.repurpose(it->second, {a.base_lrn, a.d, a.level});
    }
  }

  void write_translation_line(std::uint64_t tlma, MovementList& out) {
    const LineAddr tpma = gtd_.translate(tlma);
    out.push_back({MoveKind::metadata, tlma, tpma, tpma});
    scratch_.clear();
    gtd_.on_write(tlma, scratch_);
    for (const Movement& m : scratch_) out.push_back({MoveKind::metadata, m.lma, m.from, m.to});
  }

  Geometry geom_;
  unsigned p_shift_;
  unsigned max_level_;
  LatencyModel latency_;
  std::vector<std::uint64_t> imt_;
  std::vector<std::uint8_t> level_;
  std::vector<std::uint64_t> owner_;
  MappingCache cmt_;
  std::uint64_t translation_lines_;
  std::uint64_t directory_area_;
  RegionSwap gtd_;
  MovementList scratch_;
  std::uint64_t regions_ = geom_.region_count();
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
  std::uint64_t exchange_writes_ = 0;
  LineAddr last_fetch_tpma_ = 0;
};

}  // namespace nvmwear
