#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "nvmwear/config.hpp"
#include "nvmwear/controller.hpp"
#include "nvmwear/endurance.hpp"
#include "nvmwear/workloads.hpp"

namespace nvmwear {

struct Report {
  SimConfig config;
  std::uint64_t requests = 0;
  std::uint64_t reads = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  double translation_ns_total = 0;
  double device_ns_total = 0;
  LifetimeResult lifetime;
  std::vector<TimelineRecord> timeline;
  std::uint64_t merges = 0;
  std::uint64_t splits = 0;
  double final_avg_q = 0;
  std::vector<std::uint64_t> wear_histogram;

  double hit_rate() const { return requests == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(requests); }
  double avg_translation_ns() const { return requests == 0 ? 0.0 : translation_ns_total / static_cast<double>(requests); }
  double amat_ns() const {
    return requests == 0 ? 0.0 : (translation_ns_total + device_ns_total) / static_cast<double>(requests);
  }
};

inline std::unique_ptr<Workload> make_workload(const SimConfig& c) {
  const auto& w = c.workload;
  const std::uint64_t m = c.geometry.lines;
  if (w.kind == "raa") return std::make_unique<RepeatedAddress>(w.address);
  if (w.kind == "bpa") return std::make_unique<BirthdayParadox>(m, c.seed);
  if (w.kind == "trace") return std::make_unique<TraceReader>(w.trace_path, m, w.wrap);
  std::vector<Phase> phases = w.phases;
  if (w.kind != "phases") {
    const double theta = w.kind == "zipf" ? w.theta : 0.0;
    phases = {Phase{UINT64_MAX, w.working_set, w.base, theta, w.read_fraction}};
  }
  return std::make_unique<PhaseSchedule>(std::move(phases), m, w.scatter, c.seed);
}

/// Runs one simulation to its stop condition. The config must be resolved.
inline Report run(const SimConfig& cfg, MemoryController& ctrl, Workload& workload) {
  Report rep;
  rep.config = cfg;
  const std::uint64_t m = cfg.geometry.lines;
  const std::uint64_t data_lines = ctrl.data_lines();
  WearMap wear(data_lines + ctrl.metadata_lines(), cfg.endurance.limit, static_cast<std::uint64_t>(cfg.endurance.spares));
  LifetimeResult& life = rep.lifetime;
  const std::uint64_t interval = cfg.sawl.sample_interval;
  MovementList moves;

  auto charge = [&](LineAddr pma) {
    if (life.failed) return;
    if (wear.record_physical_write(pma) == WriteOutcome::system_failed) {
      life.failed = true;
      life.failure_user_writes = life.user_writes;
    }
  };

  while (cfg.stop.max_requests == 0 || rep.requests < cfg.stop.max_requests) {
    if (life.failed && cfg.stop.on_failure) break;
    const auto req = workload.next();
    if (!req) break;
    if (req->lma >= m) throw AddressRangeError("request address " + std::to_string(req->lma) + " outside memory");
    ++rep.requests;
    const TranslationResult tr = ctrl.translate(req->lma);
    rep.translation_ns_total += tr.latency_ns;
    ++(tr.hit ? rep.hits : rep.misses);
    moves.clear();
    if (req->op == Op::write) {
      ++life.user_writes;
      ++life.physical_writes;
      rep.device_ns_total += cfg.latency.device_write_ns;
      charge(tr.pma);
      ctrl.on_write(req->lma, moves);
    } else {
      ++rep.reads;
      rep.device_ns_total += cfg.latency.device_read_ns;
    }
    if (rep.requests % interval == 0) {
      const TimelineRecord rec = ctrl.sample(rep.requests, moves);
      if (rec.action == Signal::merge) ++rep.merges;
      if (rec.action == Signal::split) ++rep.splits;
      rep.timeline.push_back(rec);
    }
    for (const Movement& mv : moves) {
      ++life.physical_writes;
      if (mv.kind == MoveKind::data) {
        ++life.movement_writes;
        charge(mv.to);
      } else {
        ++life.metadata_writes;
        charge(data_lines + mv.to);
      }
    }
    if (!moves.empty()) workload.observe(moves);
  }

  life.ideal_user_writes = static_cast<double>(m) * static_cast<double>(cfg.endurance.limit);
  const std::uint64_t lived = life.failed ? life.failure_user_writes : life.user_writes;
  life.normalized_lifetime = static_cast<double>(lived) / life.ideal_user_writes;
  life.extra_write_fraction =
      life.user_writes == 0 ? 0.0
                            : static_cast<double>(life.physical_writes - life.user_writes) / static_cast<double>(life.user_writes);
  life.lines_failed = wear.lines_failed();
  life.spares_used = wear.spares_used();
  rep.final_avg_q = ctrl.average_region_lines();
  if (cfg.report.wear_histogram) rep.wear_histogram.assign(wear.addressed_counts().begin(), wear.addressed_counts().end());
  return rep;
}

inline Report run(const SimConfig& cfg) {
  auto ctrl = make_controller(cfg);
  auto workload = make_workload(cfg);
  return run(cfg, *ctrl, *workload);
}

/// One sweep axis: a config field and the values it takes.
struct Axis {
  std::string field;
  std::vector<Json> values;
};

/// Config patches for the Cartesian product of `axes`, first axis outermost.
inline std::vector<Json> expand_axes(const Json& patch, const std::vector<Axis>& axes) {
  std::vector<Json> out{patch};
  for (const Axis& axis : axes) {
    if (axis.values.empty()) throw ConfigError(axis.field + ": axis has no values");
    const std::string field = resolve_field(axis.field);
    std::vector<Json> next;
    for (const Json& base : out)
      for (const Json& v : axis.values) {
        Json p = base;
        apply_override(p, field, v);
        next.push_back(std::move(p));
      }
    out = std::move(next);
  }
  return out;
}

/// Runs every point; results are in axis order whatever `jobs` is.
inline std::vector<Report> sweep(const Json& patch, const std::vector<Axis>& axes, unsigned jobs = 1) {
  std::vector<SimConfig> configs;
  for (const Json& p : expand_axes(patch, axes)) configs.push_back(config_from_patch(p));
  std::vector<Report> reports(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        reports[i] = run(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return reports;
}

}  // namespace nvmwear
