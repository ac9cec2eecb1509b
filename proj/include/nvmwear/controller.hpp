#pragma once

// Memory controller front ends. Each one translates a request, reports the
// translation cost, and lists the physical writes wear leveling adds.

#include <memory>
#include <string>
#include <string_view>

#include "nvmwear/config.hpp"
#include "nvmwear/mwsr.hpp"
#include "nvmwear/pcm_s.hpp"
#include "nvmwear/sawl.hpp"
#include "nvmwear/security_refresh.hpp"
#include "nvmwear/segment_swap.hpp"
#include "nvmwear/start_gap.hpp"
#include "nvmwear/translation.hpp"
#include "nvmwear/wear_leveler.hpp"

namespace nvmwear {

class MemoryController {
 public:
  virtual ~MemoryController() = default;
  virtual std::string_view name() const = 0;
  /// Physical data lines; metadata lines are numbered after them.
  virtual std::uint64_t data_lines() const = 0;
  virtual std::uint64_t metadata_lines() const { return 0; }
  virtual TranslationResult translate(LineAddr lma) = 0;
  /// Current mapping without side effects.
  virtual LineAddr peek(LineAddr lma) const = 0;
  virtual void on_write(LineAddr lma, MovementList& out) = 0;
  /// Called every sample_interval requests.
  virtual TimelineRecord sample(std::uint64_t request_index, MovementList& out) = 0;
  virtual double average_region_lines() const = 0;
};

/// Baseline engines keep their whole table on chip: every translation hits.
class EngineController final : public MemoryController {
 public:
  EngineController(std::unique_ptr<WearLeveler> engine, const LatencyModel& latency)
      : engine_(std::move(engine)), latency_(latency) {}

  std::string_view name() const override { return engine_->name(); }
  std::uint64_t data_lines() const override { return engine_->physical_lines(); }
  TranslationResult translate(LineAddr lma) override { return {engine_->translate(lma), true, latency_.hit_ns()}; }
  LineAddr peek(LineAddr lma) const override { return engine_->translate(lma); }
  void on_write(LineAddr lma, MovementList& out) override { engine_->on_write(lma, out); }
  TimelineRecord sample(std::uint64_t request_index, MovementList&) override {
    return {request_index, 1.0, average_region_lines(), Signal::none};
  }
  double average_region_lines() const override { return static_cast<double>(engine_->region_lines()); }

  WearLeveler& engine() { return *engine_; }

 private:
  std::unique_ptr<WearLeveler> engine_;
  LatencyModel latency_;
};

/// Tiered translation with the region exchanger; adaptive region sizing
/// when `adaptive` is set (SAWL), fixed granularity otherwise (NWL).
class TieredController final : public MemoryController {
 public:
  TieredController(const SimConfig& cfg, bool adaptive, InitialMapping init = InitialMapping::random)
      : adaptive_(adaptive),
        period_(cfg.tiered.period),
        tt_(cfg.geometry, cfg.cmt.capacity, adaptive ? cfg.max_level() : 0, cfg.latency,
            DirectoryConfig{cfg.tiered.gtd_period, cfg.tiered.gtd_region_lines}, cfg.seed, init),
        policy_(cfg.sawl),
        rng_(Rng::substream(cfg.seed, Stream::exchange)) {}

  std::string_view name() const override { return adaptive_ ? "sawl" : "nwl"; }
  std::uint64_t data_lines() const override { return tt_.data_lines(); }
  std::uint64_t metadata_lines() const override { return tt_.metadata_lines(); }

  TranslationResult translate(LineAddr lma) override {
    const TranslationResult r = tt_.translate(lma);
    policy_.record(r.hit);
    return r;
  }

  LineAddr peek(LineAddr lma) const override { return tt_.peek(lma); }

  void on_write(LineAddr lma, MovementList& out) override { tt_.exchange_on_write(lma, period_, rng_, out); }

  TimelineRecord sample(std::uint64_t request_index, MovementList& out) override {
    TimelineRecord rec = adaptive_ ? policy_.sample(tt_, out) : policy_.observe(tt_);
    rec.request_index = request_index;
    return rec;
  }

  double average_region_lines() const override { return tt_.average_region_lines(); }

  TieredTranslation& translation() { return tt_; }
  const TieredTranslation& translation() const { return tt_; }
  AdaptiveController& policy() { return policy_; }

 private:
  bool adaptive_;
  std::uint64_t period_;
  TieredTranslation tt_;
  AdaptiveController policy_;
  Rng rng_;
};

inline std::unique_ptr<WearLeveler> make_engine(const SimConfig& c) {
  const std::uint64_t m = c.geometry.lines;
  if (c.scheme == "none") return std::make_unique<NoWearLeveling>(m);
  if (c.scheme == "segswap") return std::make_unique<SegmentSwap>(m, c.segswap.segment_lines, c.segswap.threshold);
  if (c.scheme == "rbsg") return std::make_unique<StartGap>(m, c.rbsg.regions, c.rbsg.period, c.rbsg.randomize, c.seed);
  if (c.scheme == "tlsr")
    return std::make_unique<TwoLevelSecurityRefresh>(m, c.tlsr.regions, c.tlsr.inner_period, c.tlsr.outer_period, c.seed);
  if (c.scheme == "pcms") return std::make_unique<RegionSwap>(m, c.pcms.regions, c.pcms.period, c.seed);
  if (c.scheme == "mwsr")
    return std::make_unique<MultiWayMigration>(m, c.mwsr.regions, c.mwsr.period, c.mwsr.free_regions, c.seed);
  throw ConfigError("scheme: '" + c.scheme + "' is not a table engine");
}

inline std::unique_ptr<MemoryController> make_controller(const SimConfig& c) {
  if (c.scheme == "sawl") return std::make_unique<TieredController>(c, true);
  if (c.scheme == "nwl") return std::make_unique<TieredController>(c, false);
  return std::make_unique<EngineController>(make_engine(c), c.latency);
}

}  // namespace nvmwear
