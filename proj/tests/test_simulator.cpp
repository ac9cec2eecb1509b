#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "nvmwear/report_io.hpp"
#include "support.hpp"

using namespace nvmwear;
using nvmwear::testing::LocationTracker;
using nvmwear::testing::ShadowMemory;
using nvmwear::testing::small_config;

namespace {

const std::vector<std::string> kSchemes = {"none", "segswap", "rbsg", "tlsr", "pcms", "mwsr", "nwl", "sawl"};

// Alternates a memory-wide phase (low hit rate, merges) with a tiny hot set
// (high hit rate, splits).
SimConfig shifting(const std::string& scheme, std::uint64_t seed = 1) {
  SimConfig c = small_config(scheme);
  c.seed = seed;
  c.workload.kind = "phases";
  c.workload.phases = {{20000, 4096, 0, 0.0, 0.25}, {20000, 32, 512, 0.0, 0.25}};
  c.tiered.period = 16;
  c.segswap.threshold = 16;
  c.rbsg.period = 4;
  c.tlsr.inner_period = 4;
  c.tlsr.outer_period = 8;
  c.pcms.period = 16;
  c.mwsr.period = 4;
  c.stop.max_requests = 0;
  c.resolve();
  return c;
}

std::string report_text(const Report& r) { return report_to_json(r).dump(2) + timeline_csv(r) + wear_csv(r); }

}  // namespace

TEST(Run, NoWearLevelingRepeatedAddressFailsAtEndurance) {
  SimConfig c = small_config("none");
  c.endurance.limit = 100;
  c.endurance.spares = 0;
  c.workload.kind = "raa";
  c.workload.address = 9;
  c.stop.max_requests = 0;
  c.resolve();
  const Report r = run(c);
  EXPECT_TRUE(r.lifetime.failed);
  EXPECT_EQ(r.lifetime.failure_user_writes, 100u);
  EXPECT_EQ(r.requests, 100u);
}

TEST(Run, TlsrUniformOverheadMatchesPeriods) {
  SimConfig c = small_config("tlsr", 1 << 16);
  c.tlsr.regions = 256;
  c.stop.max_requests = 1000000;
  c.resolve();
  const Report r = run(c);
  EXPECT_NEAR(r.lifetime.extra_write_fraction, 0.15625, 0.005);
}

TEST(Run, SameSeedByteIdenticalReports) {
  for (const std::string& scheme : kSchemes) {
    SimConfig c = shifting(scheme, 5);
    c.stop.max_requests = 100000;
    c.report.wear_histogram = true;
    EXPECT_EQ(report_text(run(c)), report_text(run(c))) << scheme;
  }
}

TEST(Run, AccountingClosure) {
  for (const std::string& scheme : kSchemes) {
    SimConfig c = shifting(scheme);
    c.stop.max_requests = 100000;
    c.report.wear_histogram = true;
    const Report r = run(c);
    ASSERT_FALSE(r.lifetime.failed) << scheme;
    const std::uint64_t charged = std::accumulate(r.wear_histogram.begin(), r.wear_histogram.end(), std::uint64_t{0});
    EXPECT_EQ(charged, r.lifetime.physical_writes) << scheme;
    EXPECT_EQ(r.requests, r.reads + r.lifetime.user_writes) << scheme;
    EXPECT_EQ(r.requests, r.hits + r.misses) << scheme;
  }
}

TEST(Run, TranslationLatencyIsFiveHitsFiftyFiveMisses) {
  for (const std::string& scheme : kSchemes) {
    const Report r = run([&] {
      SimConfig c = shifting(scheme);
      c.stop.max_requests = 60000;
      return c;
    }());
    const double h = r.hit_rate();
    EXPECT_NEAR(r.avg_translation_ns(), 5 * h + 55 * (1 - h), 1e-9) << scheme;
    const double device = (350.0 * r.lifetime.user_writes + 50.0 * r.reads) / r.requests;
    EXPECT_NEAR(r.amat_ns(), device + 5 * h + 55 * (1 - h), 1e-9) << scheme;
  }
}

TEST(Run, TimelineSampledEveryInterval) {
  SimConfig c = shifting("sawl");
  c.stop.max_requests = 55500;
  const Report r = run(c);
  ASSERT_EQ(r.timeline.size(), 55u);
  for (std::size_t i = 0; i < r.timeline.size(); ++i) EXPECT_EQ(r.timeline[i].request_index, (i + 1) * 1000);
}

TEST(Run, RejectsOutOfRangeRequests) {
  SimConfig c = small_config("none");
  c.resolve();
  auto ctrl = make_controller(c);
  RepeatedAddress w(1 << 12);
  EXPECT_THROW(run(c, *ctrl, w), AddressRangeError);
}

// Every scheme, live adaptation included: data written is the data read back
// and the mapping stays a bijection at every event.
TEST(Integrity, ReadAfterWriteFuzzAllSchemes) {
  for (const std::string& scheme : kSchemes) {
    const SimConfig c = shifting(scheme, 3);
    auto ctrl = make_controller(c);
    auto workload = make_workload(c);
    const std::uint64_t lines = c.geometry.lines;
    auto map = [&](LineAddr x) { return ctrl->peek(x); };
    ShadowMemory mem(lines, ctrl->data_lines(), map);
    LocationTracker where(lines, map);
    std::uint64_t merges = 0, splits = 0, checks = 0;
    for (std::uint64_t i = 1; i <= 1000000; ++i) {
      const Request req = *workload->next();
      const TranslationResult tr = ctrl->translate(req.lma);
      MovementList out;
      if (req.op == Op::read) {
        ASSERT_TRUE(mem.read(req.lma, tr.pma)) << scheme << " request " << i;
      } else {
        mem.write(req.lma, tr.pma);
        ctrl->on_write(req.lma, out);
      }
      if (i % c.sawl.sample_interval == 0) {
        const Signal s = ctrl->sample(i, out).action;
        merges += s == Signal::merge;
        splits += s == Signal::split;
      }
      if (out.empty()) continue;
      ASSERT_TRUE(mem.apply(out)) << scheme << " request " << i;
      ASSERT_TRUE(where.apply(out)) << scheme << " request " << i;
      if (++checks % 16 == 0 || i % c.sawl.sample_interval == 0)
        ASSERT_TRUE(where.matches(map, ctrl->data_lines())) << scheme << " request " << i;
    }
    EXPECT_TRUE(mem.consistent(lines, map)) << scheme;
    if (scheme == "sawl") {
      EXPECT_GT(merges, 5u);
      EXPECT_GT(splits, 5u);
    }
  }
}

TEST(Sweep, EmptyAxesEqualsSingleRun) {
  Json patch = to_json(shifting("sawl"));
  patch["stop"]["max_requests"] = 50000;
  const auto reports = sweep(patch, {});
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(report_text(reports[0]), report_text(run(config_from_patch(patch))));
}

TEST(Sweep, OrderedProductIndependentOfJobs) {
  Json patch = to_json(shifting("tlsr"));
  patch["stop"]["max_requests"] = 30000;
  const std::vector<Axis> axes = {{"scheme", {"tlsr", "pcms", "sawl"}}, {"seed", {1, 2}}};
  const auto serial = sweep(patch, axes, 1);
  const auto parallel = sweep(patch, axes, 4);
  ASSERT_EQ(serial.size(), 6u);
  ASSERT_EQ(parallel.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(serial[i].config.scheme, std::vector<std::string>({"tlsr", "pcms", "sawl"})[i / 2]);
    EXPECT_EQ(serial[i].config.seed, i % 2 + 1);
    EXPECT_EQ(report_text(serial[i]), report_text(parallel[i])) << i;
    Json single = patch;
    single["scheme"] = serial[i].config.scheme;
    single["seed"] = serial[i].config.seed;
    EXPECT_EQ(report_text(serial[i]), report_text(run(config_from_patch(single)))) << i;
  }
}

TEST(Sweep, BareFieldNamesResolve) {
  Json patch = to_json(small_config("tlsr"));
  patch["stop"]["max_requests"] = 1000;
  const auto reports = sweep(patch, {{"inner_period", {8, 16}}});
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[1].config.tlsr.inner_period, 16u);
}

TEST(Sweep, UnknownOrAmbiguousAxisIsAConfigError) {
  const Json patch = Json::object();
  EXPECT_THROW(sweep(patch, {{"no_such_field", {1}}}), ConfigError);
  EXPECT_THROW(sweep(patch, {{"tlsr.bogus", {1}}}), ConfigError);
  EXPECT_THROW(sweep(patch, {{"regions", {1}}}), ConfigError);  // rbsg, tlsr, pcms, mwsr
  EXPECT_THROW(sweep(patch, {{"seed", {}}}), ConfigError);
}

TEST(Config, DefaultsMatchDocumentedValues) {
  SimConfig c;
  c.resolve();
  EXPECT_EQ(c.geometry.lines, 1u << 20);
  EXPECT_EQ(c.geometry.granularity, 4u);
  EXPECT_EQ(c.geometry.entries_per_line, 6u);
  EXPECT_EQ(c.endurance.spares, (1 << 20) / 64);
  EXPECT_EQ(c.pcms.regions, c.cmt.capacity);
  EXPECT_EQ(c.mwsr.regions, c.cmt.capacity / 2);
  EXPECT_EQ(c.tiered.period, 128u);
  EXPECT_EQ(c.rbsg.regions, 4096u);
  EXPECT_EQ(c.sawl.max_merge_factor, 64u);
  EXPECT_DOUBLE_EQ(c.latency.hit_ns(), 5.0);
  EXPECT_DOUBLE_EQ(c.latency.miss_ns(), 55.0);
}

TEST(Config, UnknownKeysAndTypeMismatchesRejected) {
  EXPECT_THROW(config_from_patch(Json{{"sceme", "tlsr"}}), ConfigError);
  EXPECT_THROW(config_from_patch(Json{{"tlsr", {{"inner", 8}}}}), ConfigError);
  EXPECT_THROW(config_from_patch(Json{{"tlsr", {{"inner_period", "8"}}}}), ConfigError);
  EXPECT_THROW(config_from_patch(Json{{"tlsr", 8}}), ConfigError);
  EXPECT_THROW(config_from_patch(Json{{"seed", -1}}), ConfigError);
  EXPECT_THROW(config_from_patch(Json{{"scheme", "magic"}}), ConfigError);
  EXPECT_THROW(config_from_patch(Json{{"tlsr", {{"regions", 3}}}}), ConfigError);
  EXPECT_THROW(config_from_patch(Json{{"sawl", {{"merge_threshold", 0.96}}}}), ConfigError);
  EXPECT_THROW(config_from_patch(Json{{"geometry", {{"lines", 1000}}}}), ConfigError);
  EXPECT_THROW(config_from_patch(Json{{"workload", {{"kind", "phases"}}}}), ConfigError);
  EXPECT_THROW(parse_json_text("{", "inline"), ConfigError);
}

TEST(Config, OverridesApplyAfterLoad) {
  Json patch = Json{{"tlsr", {{"inner_period", 16}}}};
  apply_override(patch, "inner_period=32");
  apply_override(patch, "scheme=tlsr");
  apply_override(patch, "workload.kind=\"bpa\"");
  apply_override(patch, "sawl.merge_threshold=0.85");
  const SimConfig c = config_from_patch(patch);
  EXPECT_EQ(c.tlsr.inner_period, 32u);
  EXPECT_EQ(c.scheme, "tlsr");
  EXPECT_EQ(c.workload.kind, "bpa");
  EXPECT_DOUBLE_EQ(c.sawl.merge_threshold, 0.85);
  Json p2;
  EXPECT_THROW(apply_override(p2, "bogus=1"), ConfigError);
  EXPECT_THROW(apply_override(p2, "=1"), ConfigError);
  EXPECT_THROW(apply_override(p2, "seed"), ConfigError);
}

TEST(Config, DumpIsIdempotent) {
  SimConfig c = shifting("sawl", 42);
  const Json once = to_json(c);
  const SimConfig back = config_from_patch(once);
  EXPECT_EQ(to_json(back).dump(), once.dump());
  EXPECT_EQ(to_json(config_from_patch(to_json(back))).dump(), once.dump());
}
