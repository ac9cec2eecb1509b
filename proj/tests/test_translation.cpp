#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "support.hpp"

using namespace nvmwear;
using nvmwear::testing::is_injective;

namespace {

TieredTranslation make_tt(std::uint64_t lines, std::uint64_t p, std::size_t cmt = 8, unsigned max_level = 4,
                          DirectoryConfig dir = {1u << 20, 4}, InitialMapping init = InitialMapping::identity,
                          std::uint64_t seed = 1) {
  Geometry g;
  g.lines = lines;
  g.granularity = p;
  max_level = std::min(max_level, log2_exact(lines / p));
  return TieredTranslation(g, cmt, max_level, LatencyModel{}, dir, seed, init);
}

// Full-table plan assigning lrn r to physical region perm[r] with key keys[r].
RegionPlan permutation_plan(const std::vector<std::uint64_t>& perm, const std::vector<std::uint64_t>& keys,
                            std::uint64_t p) {
  RegionPlan plan;
  for (std::uint64_t r = 0; r < perm.size(); ++r) plan.push_back({r, 0, perm[r] * p + keys[r]});
  return plan;
}

}  // namespace

TEST(Translate, PackedWordWalkthrough) {
  auto tt = make_tt(16, 2);
  MovementList out;
  tt.update_after_movement({{2, 0, 7}, {3, 0, 4}}, out);
  // Steps 5-7 by hand: prn = 7 / 2, key = 7 % 2, lao = 5 % 2.
  const std::uint64_t prn = 7 / 2, key = 7 % 2, lao = 5 % 2;
  EXPECT_EQ(tt.translate(5).pma, prn * 2 + (lao ^ key));
  EXPECT_EQ(tt.translate(5).pma, 6u);
}

TEST(Translate, IdentityHitAndMissLatency) {
  auto tt = make_tt(64, 4);
  for (LineAddr x = 0; x < 64; ++x) EXPECT_EQ(tt.peek(x), x);
  const auto first = tt.translate(9);
  EXPECT_FALSE(first.hit);
  EXPECT_DOUBLE_EQ(first.latency_ns, 55.0);
  const auto second = tt.translate(10);
  EXPECT_TRUE(second.hit);
  EXPECT_DOUBLE_EQ(second.latency_ns, 5.0);
  EXPECT_EQ(second.pma, 10u);
}

TEST(Translate, FigureSixPreMergeLayout) {
  // 16 regions of 2 lines: lrn0 -> prn3, lrn1 -> prn8, lrn5 -> prn2, the
  // rest fill the remaining physical regions in order.
  std::vector<std::uint64_t> perm(16, 0);
  perm[0] = 3;
  perm[1] = 8;
  perm[5] = 2;
  std::vector<std::uint64_t> rest;
  for (std::uint64_t p = 0; p < 16; ++p)
    if (p != 3 && p != 8 && p != 2) rest.push_back(p);
  for (std::uint64_t r = 0, i = 0; r < 16; ++r)
    if (r != 0 && r != 1 && r != 5) perm[r] = rest[i++];
  auto tt = make_tt(32, 2);
  MovementList out;
  tt.update_after_movement(permutation_plan(perm, std::vector<std::uint64_t>(16, 0), 2), out);
  for (LineAddr lma : {0, 1}) EXPECT_EQ(tt.translate(lma).pma / 2, 3u);
  for (LineAddr lma : {2, 3}) EXPECT_EQ(tt.translate(lma).pma / 2, 8u);
  for (LineAddr lma : {10, 11}) EXPECT_EQ(tt.translate(lma).pma / 2, 2u);
  EXPECT_TRUE(is_injective(32, 32, [&](LineAddr x) { return tt.peek(x); }));
}

TEST(Translate, HitAccountingAndLatencyIdentity) {
  auto tt = make_tt(1 << 10, 4, 16, 4, {1u << 20, 4}, InitialMapping::random);
  Rng rng(5);
  double total = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) total += tt.translate(rng.uniform(64) * 3 % 1024).latency_ns;
  EXPECT_EQ(tt.hits() + tt.misses(), static_cast<std::uint64_t>(n));
  EXPECT_EQ(total, 5.0 * tt.hits() + 55.0 * tt.misses());
}

TEST(Translate, LruLoopOfCapacityHitsAfterFirstPass) {
  const std::size_t c = 8;
  auto tt = make_tt(64, 1, c);
  for (int pass = 0; pass < 5; ++pass)
    for (LineAddr x = 0; x < c; ++x) EXPECT_EQ(tt.translate(x).hit, pass > 0);
}

TEST(Translate, LruLoopOfCapacityPlusOneThrashes) {
  const std::size_t c = 8;
  auto tt = make_tt(64, 1, c);
  for (int pass = 0; pass < 5; ++pass)
    for (LineAddr x = 0; x <= c; ++x) EXPECT_FALSE(tt.translate(x).hit);
}

TEST(Translate, HalfQueueRegistersFollowStackPosition) {
  MappingCache cmt(8, 64, 0);
  cmt.record_hit_position(2);
  EXPECT_EQ(cmt.first_half_hits(), 1u);
  cmt.record_hit_position(4);
  EXPECT_EQ(cmt.second_half_hits(), 1u);
}

TEST(Translate, LookupRegistersMatchPositionWalk) {
  // The O(1) segment bookkeeping must agree with walking the LRU list.
  MappingCache cmt(16, 256, 0);
  MappingCache shadow(16, 256, 0);
  Rng rng(11);
  std::uint64_t first = 0, second = 0;
  for (int i = 0; i < 20000; ++i) {
    const std::uint64_t lrn = rng.uniform(rng.unit() < 0.8 ? 12 : 40);
    const auto pos = cmt.position_of(lrn);
    if (pos) (*pos < 8 ? first : second)++;
    if (!cmt.lookup(lrn)) cmt.insert({lrn, lrn, 0});
  }
  EXPECT_EQ(cmt.first_half_hits(), first);
  EXPECT_EQ(cmt.second_half_hits(), second);
  EXPECT_EQ(cmt.first_half_hits() + cmt.second_half_hits(), first + second);
}

TEST(Translate, MruSkewedStreamFavoursFirstHalf) {
  MappingCache cmt(64, 1 << 16, 0);
  Rng rng(3);
  // Geometric reuse distance: mostly re-touch one of the last few lrns.
  std::vector<std::uint64_t> recent;
  std::uint64_t fresh = 0;
  for (int i = 0; i < 200000; ++i) {
    std::uint64_t lrn;
    if (!recent.empty() && rng.unit() < 0.9) {
      std::uint64_t back = 0;
      while (back + 1 < recent.size() && rng.unit() < 0.5) ++back;
      lrn = recent[recent.size() - 1 - back];
    } else {
      lrn = fresh++ % (1 << 16);
    }
    recent.push_back(lrn);
    if (recent.size() > 64) recent.erase(recent.begin());
    if (!cmt.lookup(lrn)) cmt.insert({lrn, lrn, 0});
  }
  EXPECT_GT(cmt.first_half_hits(), 100000u);
  EXPECT_GT(cmt.first_half_hits(), 50 * cmt.second_half_hits());
}

TEST(UpdateAfterMovement, RegionSwapRewritesTwoEntriesAndPatchesCache) {
  auto tt = make_tt(64, 4, 8);
  tt.translate(0);   // cache lrn 0
  tt.translate(28);  // cache lrn 7
  const auto before = tt.imt();
  MovementList out;
  tt.update_after_movement({{0, 0, 7 * 4 + 1}, {7, 0, 0 * 4 + 2}}, out);
  std::uint64_t changed = 0;
  for (std::uint64_t r = 0; r < before.size(); ++r) changed += before[r] != tt.imt()[r];
  EXPECT_EQ(changed, 2u);
  // lrn 0 and lrn 7 sit in translation lines 0 and 1 (six entries per line).
  const auto meta = std::count_if(out.begin(), out.end(), [](const Movement& m) { return m.kind == MoveKind::metadata; });
  EXPECT_EQ(meta, 2);
  const auto data = std::count_if(out.begin(), out.end(), [](const Movement& m) { return m.kind == MoveKind::data; });
  EXPECT_EQ(data, 8);
  EXPECT_NO_THROW(tt.verify());
  const auto hit = tt.translate(0);
  EXPECT_TRUE(hit.hit);
  EXPECT_EQ(hit.pma, 7u * 4 + 1);
}

TEST(UpdateAfterMovement, EmptyPlanIsNoOp) {
  auto tt = make_tt(64, 4, 8, 4, {1u << 20, 4}, InitialMapping::random);
  const auto before = tt.imt();
  MovementList out;
  tt.update_after_movement({}, out);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(tt.imt(), before);
}

TEST(UpdateAfterMovement, RejectsNonBijectivePlan) {
  auto tt = make_tt(64, 4);
  MovementList out;
  EXPECT_THROW(tt.update_after_movement({{0, 0, 4}}, out), ConsistencyFault);
  EXPECT_THROW(tt.update_after_movement({{0, 0, 4}, {1, 0, 5}}, out), ConsistencyFault);
  EXPECT_THROW(tt.update_after_movement({{1, 1, 0}}, out), ConsistencyFault);
  EXPECT_NO_THROW(tt.verify());
}

TEST(UpdateAfterMovement, DirectoryRemapRedirectsNextFetch) {
  auto tt = make_tt(1 << 10, 4, 4, 4, {1, 4});
  const std::uint64_t lrn = 30;
  const std::uint64_t tlma = tt.tlma_of(lrn);
  const LineAddr start = tt.gtd_lookup(tlma);
  MovementList out;
  bool moved = false;
  for (int i = 0; i < 200 && !moved; ++i) {
    const RegionAssignment r = tt.region_at(lrn);
    tt.update_after_movement({{r.base_lrn, 0, (r.d & ~3ull) | ((r.d + 1) & 3)}}, out);
    moved = tt.gtd_lookup(tlma) != start;
  }
  ASSERT_TRUE(moved);
  EXPECT_TRUE(std::any_of(out.begin(), out.end(),
                          [](const Movement& m) { return m.kind == MoveKind::metadata && m.from != m.to; }));
  // Push lrn 30 out of the four-entry cache, then miss on it.
  for (std::uint64_t other : {100, 200, 300, 400, 500}) tt.translate(other * 4);
  const auto res = tt.translate(lrn * 4);
  EXPECT_FALSE(res.hit);
  EXPECT_EQ(tt.last_fetch_tpma(), tt.gtd_lookup(tlma));
  EXPECT_TRUE(is_injective(tt.metadata_lines(), tt.metadata_lines(), [&](LineAddr t) { return tt.gtd_lookup(t); }));
}

TEST(Translate, TranslationLineIsLrnOverK) {
  auto tt = make_tt(1 << 10, 4);
  for (std::uint64_t lrn = 0; lrn < 256; ++lrn) EXPECT_EQ(tt.tlma_of(lrn), lrn / 6);
  EXPECT_EQ(tt.translation_lines(), (256u + 5) / 6);
}

TEST(Translate, SnapshotListsImtThenCmt) {
  auto tt = make_tt(16, 4, 2);
  tt.translate(5);
  std::ostringstream os;
  tt.write_snapshot(os);
  EXPECT_EQ(os.str(), "# imt\n0 0 4\n1 4 4\n2 8 4\n3 12 4\n# cmt\n1 4 4\n");
}

TEST(Translate, RandomInitialMappingIsBijective) {
  auto tt = make_tt(1 << 12, 4, 8, 4, {128, 4}, InitialMapping::random, 99);
  EXPECT_TRUE(is_injective(1 << 12, 1 << 12, [&](LineAddr x) { return tt.peek(x); }));
  EXPECT_NO_THROW(tt.verify());
}

TEST(Exchange, EveryWriteOrderStaysBijectiveExhaustive) {
  auto tt = make_tt(1 << 12, 4, 32, 3, {16, 4}, InitialMapping::random, 7);
  nvmwear::testing::LocationTracker track(1 << 12, [&](LineAddr x) { return tt.peek(x); });
  Rng rng(17), ex(18);
  MovementList out;
  for (int i = 0; i < 400; ++i) {
    out.clear();
    const LineAddr lma = rng.uniform(1 << 12);
    tt.translate(lma);
    if (i % 5 == 0) merge_region(tt, lma >> 2, out);
    tt.exchange_on_write(lma, 1, ex, out);
    ASSERT_TRUE(track.apply(out));
    ASSERT_TRUE(track.matches([&](LineAddr x) { return tt.peek(x); }, 1 << 12)) << "after event " << i;
  }
  EXPECT_NO_THROW(tt.verify());
}
