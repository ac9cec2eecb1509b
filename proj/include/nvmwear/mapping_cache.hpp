#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nvmwear/address_space.hpp"

namespace nvmwear {

/// On-chip LRU cache of mapping entries (the CMT).
///
/// Entries are keyed by the first lrn of the region they describe and cover
/// 2^level consecutive lrns. The LRU stack is kept as two linked segments:
/// the front segment always holds the floor(C/2) most recently used entries,
/// so whether a hit lands in the first or second half of the stack is known
/// without walking the list.
class MappingCache {
 public:
  struct Entry {
    std::uint64_t base_lrn = 0;
    std::uint64_t d = 0;
    unsigned level = 0;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  MappingCache(std::size_t capacity, std::uint64_t lrn_count, unsigned max_level)
      : capacity_(capacity), front_cap_(capacity / 2), max_level_(max_level), slot_(lrn_count, kNil) {
    if (capacity == 0) throw ConfigError("cmt.capacity must be positive");
    nodes_.resize(capacity);
    for (std::size_t i = 0; i < capacity; ++i) free_.push_back(static_cast<std::int32_t>(capacity - 1 - i));
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return front_.count + back_.count; }

  /// Node covering `lrn`, if cached. Does not change recency.
  std::optional<std::int32_t> probe(std::uint64_t lrn) const {
    for (unsigned level = 0; level <= max_level_; ++level) {
      const std::uint64_t base = lrn & ~((1ull << level) - 1);
      const std::int32_t n = slot_[base];
      if (n != kNil && lrn - base < (1ull << nodes_[n].entry.level)) return n;
    }
    return std::nullopt;
  }

  /// Probe, and on a hit record the half-queue register and promote to MRU.
  std::optional<Entry> lookup(std::uint64_t lrn) {
    const auto n = probe(lrn);
    if (!n) return std::nullopt;
    if (nodes_[*n].in_front)
      ++first_half_hits_;
    else
      ++second_half_hits_;
    touch(*n);
    return nodes_[*n].entry;
  }

  /// Installs at MRU. Returns the evicted entry, if any.
  std::optional<Entry> insert(const Entry& e) {
    std::optional<Entry> evicted;
    if (size() == capacity_) {
      const std::int32_t victim = back_.tail != kNil ? back_.tail : front_.tail;
      evicted = nodes_[victim].entry;
      erase_node(victim);
    }
    const std::int32_t n = free_.back();
    free_.pop_back();
    nodes_[n].entry = e;
    nodes_[n].stamp = ++clock_;
    slot_[e.base_lrn] = n;
    push_front(n);
    return evicted;
  }

  /// Node keyed exactly at `base_lrn`.
  std::optional<std::int32_t> find(std::uint64_t base_lrn) const {
    const std::int32_t n = slot_[base_lrn];
    if (n == kNil) return std::nullopt;
    return n;
  }

  const Entry& entry(std::int32_t node) const { return nodes_[node].entry; }
  std::uint64_t stamp(std::int32_t node) const { return nodes_[node].stamp; }

  void erase(std::int32_t node) { erase_node(node); }

  /// Rewrites a node in place, keeping its LRU position.
  void repurpose(std::int32_t node, const Entry& e) {
    slot_[nodes_[node].entry.base_lrn] = kNil;
    nodes_[node].entry = e;
    slot_[e.base_lrn] = node;
  }

  /// 0 = MRU.
  std::optional<std::size_t> position_of(std::uint64_t base_lrn) const {
    std::size_t pos = 0;
    for (const Segment* seg : {&front_, &back_}) {
      for (std::int32_t n = seg->head; n != kNil; n = nodes_[n].next, ++pos)
        if (nodes_[n].entry.base_lrn == base_lrn) return pos;
    }
    return std::nullopt;
  }

  std::vector<Entry> entries_mru() const {
    std::vector<Entry> out;
    out.reserve(size());
    for (const Segment* seg : {&front_, &back_})
      for (std::int32_t n = seg->head; n != kNil; n = nodes_[n].next) out.push_back(nodes_[n].entry);
    return out;
  }

  /// Half-queue registers: a hit at `position` counts toward the first half
  /// when position < C/2.
  void record_hit_position(std::size_t position) {
    if (position < capacity_ / 2)
      ++first_half_hits_;
    else
      ++second_half_hits_;
  }

  std::uint64_t first_half_hits() const { return first_half_hits_; }
  std::uint64_t second_half_hits() const { return second_half_hits_; }
  void reset_registers() { first_half_hits_ = second_half_hits_ = 0; }

 private:
  static constexpr std::int32_t kNil = -1;

  struct Node {
    Entry entry;
    std::uint64_t stamp = 0;
    std::int32_t prev = kNil;
    std::int32_t next = kNil;
    bool in_front = false;
  };

  struct Segment {
    std::int32_t head = kNil;
    std::int32_t tail = kNil;
    std::size_t count = 0;
  };

  void link_head(Segment& s, std::int32_t n, bool front) {
    nodes_[n].prev = kNil;
    nodes_[n].next = s.head;
    if (s.head != kNil) nodes_[s.head].prev = n;
    s.head = n;
    if (s.tail == kNil) s.tail = n;
    nodes_[n].in_front = front;
    ++s.count;
  }

  void link_tail(Segment& s, std::int32_t n, bool front) {
    nodes_[n].next = kNil;
    nodes_[n].prev = s.tail;
    if (s.tail != kNil) nodes_[s.tail].next = n;
    s.tail = n;
    if (s.head == kNil) s.head = n;
    nodes_[n].in_front = front;
    ++s.count;
  }

  void unlink(std::int32_t n) {
    Segment& s = nodes_[n].in_front ? front_ : back_;
    Node& node = nodes_[n];
    if (node.prev != kNil) nodes_[node.prev].next = node.next; else s.head = node.next;
    if (node.next != kNil) nodes_[node.next].prev = node.prev; else s.tail = node.prev;
    node.prev = node.next = kNil;
    --s.count;
  }

  void push_front(std::int32_t n) {
    link_head(front_, n, true);
    if (front_.count > front_cap_) {
      const std::int32_t demote = front_.tail;
      unlink(demote);
      link_head(back_, demote, false);
    }
  }

  void touch(std::int32_t n) {
    nodes_[n].stamp = ++clock_;
    if (nodes_[n].in_front && front_.head == n) return;
    unlink(n);
    push_front(n);
  }

  void erase_node(std::int32_t n) {
    const bool was_front = nodes_[n].in_front;
    unlink(n);
    slot_[nodes_[n].entry.base_lrn] = kNil;
    free_.push_back(n);
    if (was_front && back_.count > 0) {
      const std::int32_t promote = back_.head;
      unlink(promote);
      link_tail(front_, promote, true);
    }
  }

  std::size_t capacity_;
  std::size_t front_cap_;
  unsigned max_level_;
  std::vector<Node> nodes_;
  std::vector<std::int32_t> free_;
  std::vector<std::int32_t> slot_;
  Segment front_;
  Segment back_;
  std::uint64_t clock_ = 0;
  std::uint64_t first_half_hits_ = 0;
  std::uint64_t second_half_hits_ = 0;
};

}  // namespace nvmwear
