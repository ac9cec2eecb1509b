#pragma once

// Simulation configuration: a JSON document overlaid on built-in defaults.
// Unknown keys are errors, and automatic values (spares, region counts) are
// resolved before use so a dumped config reproduces the run exactly.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvmwear/address_space.hpp"
#include "nvmwear/sawl.hpp"
#include "nvmwear/translation.hpp"
#include "nvmwear/workloads.hpp"

namespace nvmwear {

using Json = nlohmann::ordered_json;

struct SimConfig {
  std::uint64_t seed = 1;
  std::string scheme = "sawl";
  Geometry geometry;
  struct {
    std::uint64_t limit = 1000;
    std::int64_t spares = -1;  // -1: lines / 64
  } endurance;
  LatencyModel latency;
  struct {
    std::uint64_t capacity = 1024;
  } cmt;
  struct {
    std::uint64_t segment_lines = 256;
    std::uint64_t threshold = 128;
  } segswap;
  struct {
    std::uint64_t regions = 4096;
    std::uint64_t period = 128;
    bool randomize = true;
  } rbsg;
  struct {
    std::uint64_t regions = 4096;
    std::uint64_t inner_period = 8;
    std::uint64_t outer_period = 32;
  } tlsr;
  struct {
    std::uint64_t regions = 0;  // 0: one region per CMT entry
    std::uint64_t period = 128;
  } pcms;
  struct {
    std::uint64_t regions = 0;  // 0: one region per two CMT entries
    std::uint64_t period = 128;
    std::uint64_t free_regions = 1;
  } mwsr;
  struct {
    std::uint64_t period = 128;
    std::uint64_t gtd_period = 128;
    std::uint64_t gtd_region_lines = 4;
  } tiered;
  struct Sawl : AdaptiveConfig {
    std::uint64_t max_merge_factor = 64;
  } sawl;
  struct {
    std::string kind = "uniform";
    std::uint64_t address = 0;
    std::uint64_t working_set = 0;  // 0: all lines
    std::uint64_t base = 0;
    double theta = 0;
    double read_fraction = 0;
    bool scatter = false;
    std::vector<Phase> phases;
    std::string trace_path;
    bool wrap = false;
  } workload;
  struct {
    std::uint64_t max_requests = 100000000;  // 0: unlimited
    bool on_failure = true;
  } stop;
  struct {
    bool wear_histogram = false;
    bool timeline = true;
  } report;

  /// Fills automatic values and checks ranges. Throws ConfigError.
  void resolve() {
    geometry.validate();
    const std::uint64_t m = geometry.lines;
    if (endurance.spares < 0) endurance.spares = static_cast<std::int64_t>(m / 64);
    if (pcms.regions == 0) pcms.regions = cmt.capacity;
    if (mwsr.regions == 0) mwsr.regions = std::max<std::uint64_t>(1, cmt.capacity / 2);
    if (workload.kind != "phases" && workload.kind != "trace" && workload.working_set == 0) workload.working_set = m;
    validate();
  }

  void validate() const {
    static const std::vector<std::string> schemes = {"none", "segswap", "rbsg", "tlsr", "pcms", "mwsr", "nwl", "sawl"};
    if (std::find(schemes.begin(), schemes.end(), scheme) == schemes.end())
      throw ConfigError("scheme: unknown scheme '" + scheme + "'");
    static const std::vector<std::string> kinds = {"raa", "bpa", "uniform", "zipf", "phases", "trace"};
    if (std::find(kinds.begin(), kinds.end(), workload.kind) == kinds.end())
      throw ConfigError("workload.kind: unknown kind '" + workload.kind + "'");
    const std::uint64_t m = geometry.lines;
    auto pow2_le_m = [&](std::uint64_t v, const char* field) {
      if (!is_pow2(v) || v > m) throw ConfigError(std::string(field) + " must be a power of two <= geometry.lines");
    };
    if (endurance.limit == 0) throw ConfigError("endurance.limit must be positive");
    if (cmt.capacity == 0) throw ConfigError("cmt.capacity must be positive");
    pow2_le_m(segswap.segment_lines, "segswap.segment_lines");
    pow2_le_m(rbsg.regions, "rbsg.regions");
    pow2_le_m(tlsr.regions, "tlsr.regions");
    pow2_le_m(pcms.regions, "pcms.regions");
    pow2_le_m(mwsr.regions, "mwsr.regions");
    if (rbsg.period == 0) throw ConfigError("rbsg.period must be positive");
    if (tlsr.inner_period == 0 || tlsr.outer_period == 0) throw ConfigError("tlsr periods must be positive");
    if (mwsr.period == 0) throw ConfigError("mwsr.period must be positive");
    if (mwsr.free_regions == 0) throw ConfigError("mwsr.free_regions must be positive");
    if (!is_pow2(tiered.gtd_region_lines)) throw ConfigError("tiered.gtd_region_lines must be a power of two");
    if (!is_pow2(sawl.max_merge_factor)) throw ConfigError("sawl.max_merge_factor must be a power of two");
    if (geometry.granularity * sawl.max_merge_factor > m)
      throw ConfigError("sawl.max_merge_factor: largest region exceeds geometry.lines");
    sawl.validate();
    if (workload.address >= m) throw ConfigError("workload.address out of range");
    if (workload.kind == "uniform" || workload.kind == "zipf") {
      if (workload.working_set == 0 || workload.working_set > m) throw ConfigError("workload.working_set out of range");
      if (!(workload.theta >= 0)) throw ConfigError("workload.theta must be >= 0");
      if (!(workload.read_fraction >= 0 && workload.read_fraction <= 1))
        throw ConfigError("workload.read_fraction must be in [0,1]");
    }
    if (workload.kind == "phases" && workload.phases.empty()) throw ConfigError("workload.phases must not be empty");
    if (workload.kind == "trace" && workload.trace_path.empty()) throw ConfigError("workload.trace_path is required");
  }

  unsigned max_level() const { return log2_exact(sawl.max_merge_factor); }
};

inline Json phase_to_json(const Phase& p) {
  return Json{{"requests", p.requests},
              {"working_set", p.working_set},
              {"base", p.base},
              {"theta", p.theta},
              {"read_fraction", p.read_fraction}};
}

inline Json to_json(const SimConfig& c) {
  Json phases = Json::array();
  for (const Phase& p : c.workload.phases) phases.push_back(phase_to_json(p));
  return Json{
      {"seed", c.seed},
      {"scheme", c.scheme},
      {"geometry",
       {{"lines", c.geometry.lines},
        {"granularity", c.geometry.granularity},
        {"entries_per_line", c.geometry.entries_per_line},
        {"line_size", c.geometry.line_size}}},
      {"endurance", {{"limit", c.endurance.limit}, {"spares", c.endurance.spares}}},
      {"latency",
       {{"sram_ns", c.latency.sram_ns},
        {"memory_read_ns", c.latency.memory_read_ns},
        {"device_read_ns", c.latency.device_read_ns},
        {"device_write_ns", c.latency.device_write_ns}}},
      {"cmt", {{"capacity", c.cmt.capacity}}},
      {"segswap", {{"segment_lines", c.segswap.segment_lines}, {"threshold", c.segswap.threshold}}},
      {"rbsg", {{"regions", c.rbsg.regions}, {"period", c.rbsg.period}, {"randomize", c.rbsg.randomize}}},
      {"tlsr",
       {{"regions", c.tlsr.regions}, {"inner_period", c.tlsr.inner_period}, {"outer_period", c.tlsr.outer_period}}},
      {"pcms", {{"regions", c.pcms.regions}, {"period", c.pcms.period}}},
      {"mwsr", {{"regions", c.mwsr.regions}, {"period", c.mwsr.period}, {"free_regions", c.mwsr.free_regions}}},
      {"tiered",
       {{"period", c.tiered.period},
        {"gtd_period", c.tiered.gtd_period},
        {"gtd_region_lines", c.tiered.gtd_region_lines}}},
      {"sawl",
       {{"observation_window", c.sawl.observation_window},
        {"settling_window", c.sawl.settling_window},
        {"sample_interval", c.sawl.sample_interval},
        {"merge_threshold", c.sawl.merge_threshold},
        {"split_threshold", c.sawl.split_threshold},
        {"skew_threshold", c.sawl.skew_threshold},
        {"max_merge_factor", c.sawl.max_merge_factor}}},
      {"workload",
       {{"kind", c.workload.kind},
        {"address", c.workload.address},
        {"working_set", c.workload.working_set},
        {"base", c.workload.base},
        {"theta", c.workload.theta},
        {"read_fraction", c.workload.read_fraction},
        {"scatter", c.workload.scatter},
        {"phases", phases},
        {"trace_path", c.workload.trace_path},
        {"wrap", c.workload.wrap}}},
      {"stop", {{"max_requests", c.stop.max_requests}, {"on_failure", c.stop.on_failure}}},
      {"report", {{"wear_histogram", c.report.wear_histogram}, {"timeline", c.report.timeline}}},
  };
}

namespace detail {

inline bool same_kind(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

/// Overlays `patch` on `base`, rejecting keys `base` does not have.
inline void overlay(Json& base, const Json& patch, const std::string& path) {
  if (!patch.is_object()) throw ConfigError((path.empty() ? "config" : path) + ": expected an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError(key + ": unknown key");
    Json& slot = base[it.key()];
    if (slot.is_object()) {
      overlay(slot, it.value(), key);
    } else {
      if (!same_kind(slot, it.value())) throw ConfigError(key + ": expected " + std::string(slot.type_name()));
      slot = it.value();
    }
  }
}

template <typename T>
T get(const Json& j, const char* key, const std::string& path) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(path + "." + key + ": invalid value");
  }
}

inline std::uint64_t get_u64(const Json& j, const char* key, const std::string& path) {
  const Json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw ConfigError((path.empty() ? std::string(key) : path + "." + key) + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline Phase phase_from_json(const Json& j, const std::string& path) {
  Json base = phase_to_json(Phase{});
  overlay(base, j, path);
  Phase p;
  p.requests = get_u64(base, "requests", path);
  p.working_set = get_u64(base, "working_set", path);
  p.base = get_u64(base, "base", path);
  p.theta = get<double>(base, "theta", path);
  p.read_fraction = get<double>(base, "read_fraction", path);
  return p;
}

}  // namespace detail

/// Reads a complete document (as produced by to_json) into a config.
inline SimConfig from_json(const Json& j) {
  using detail::get;
  using detail::get_u64;
  SimConfig c;
  c.seed = get_u64(j, "seed", "");
  c.scheme = get<std::string>(j, "scheme", "");
  const Json& g = j.at("geometry");
  c.geometry.lines = get_u64(g, "lines", "geometry");
  c.geometry.granularity = get_u64(g, "granularity", "geometry");
  c.geometry.entries_per_line = get_u64(g, "entries_per_line", "geometry");
  c.geometry.line_size = get_u64(g, "line_size", "geometry");
  const Json& e = j.at("endurance");
  c.endurance.limit = get_u64(e, "limit", "endurance");
  c.endurance.spares = get<std::int64_t>(e, "spares", "endurance");
  const Json& l = j.at("latency");
  c.latency.sram_ns = get<double>(l, "sram_ns", "latency");
  c.latency.memory_read_ns = get<double>(l, "memory_read_ns", "latency");
  c.latency.device_read_ns = get<double>(l, "device_read_ns", "latency");
  c.latency.device_write_ns = get<double>(l, "device_write_ns", "latency");
  c.cmt.capacity = get_u64(j.at("cmt"), "capacity", "cmt");
  c.segswap.segment_lines = get_u64(j.at("segswap"), "segment_lines", "segswap");
  c.segswap.threshold = get_u64(j.at("segswap"), "threshold", "segswap");
  c.rbsg.regions = get_u64(j.at("rbsg"), "regions", "rbsg");
  c.rbsg.period = get_u64(j.at("rbsg"), "period", "rbsg");
  c.rbsg.randomize = get<bool>(j.at("rbsg"), "randomize", "rbsg");
  c.tlsr.regions = get_u64(j.at("tlsr"), "regions", "tlsr");
  c.tlsr.inner_period = get_u64(j.at("tlsr"), "inner_period", "tlsr");
  c.tlsr.outer_period = get_u64(j.at("tlsr"), "outer_period", "tlsr");
  c.pcms.regions = get_u64(j.at("pcms"), "regions", "pcms");
  c.pcms.period = get_u64(j.at("pcms"), "period", "pcms");
  c.mwsr.regions = get_u64(j.at("mwsr"), "regions", "mwsr");
  c.mwsr.period = get_u64(j.at("mwsr"), "period", "mwsr");
  c.mwsr.free_regions = get_u64(j.at("mwsr"), "free_regions", "mwsr");
  const Json& t = j.at("tiered");
  c.tiered.period = get_u64(t, "period", "tiered");
  c.tiered.gtd_period = get_u64(t, "gtd_period", "tiered");
  c.tiered.gtd_region_lines = get_u64(t, "gtd_region_lines", "tiered");
  const Json& s = j.at("sawl");
  c.sawl.observation_window = get_u64(s, "observation_window", "sawl");
  c.sawl.settling_window = get_u64(s, "settling_window", "sawl");
  c.sawl.sample_interval = get_u64(s, "sample_interval", "sawl");
  c.sawl.merge_threshold = get<double>(s, "merge_threshold", "sawl");
  c.sawl.split_threshold = get<double>(s, "split_threshold", "sawl");
  c.sawl.skew_threshold = get<double>(s, "skew_threshold", "sawl");
  c.sawl.max_merge_factor = get_u64(s, "max_merge_factor", "sawl");
  const Json& w = j.at("workload");
  c.workload.kind = get<std::string>(w, "kind", "workload");
  c.workload.address = get_u64(w, "address", "workload");
  c.workload.working_set = get_u64(w, "working_set", "workload");
  c.workload.base = get_u64(w, "base", "workload");
  c.workload.theta = get<double>(w, "theta", "workload");
  c.workload.read_fraction = get<double>(w, "read_fraction", "workload");
  c.workload.scatter = get<bool>(w, "scatter", "workload");
  const Json& phases = w.at("phases");
  if (!phases.is_array()) throw ConfigError("workload.phases: expected an array");
  for (std::size_t i = 0; i < phases.size(); ++i)
    c.workload.phases.push_back(detail::phase_from_json(phases[i], "workload.phases[" + std::to_string(i) + "]"));
  c.workload.trace_path = get<std::string>(w, "trace_path", "workload");
  c.workload.wrap = get<bool>(w, "wrap", "workload");
  c.stop.max_requests = get_u64(j.at("stop"), "max_requests", "stop");
  c.stop.on_failure = get<bool>(j.at("stop"), "on_failure", "stop");
  c.report.wear_histogram = get<bool>(j.at("report"), "wear_histogram", "report");
  c.report.timeline = get<bool>(j.at("report"), "timeline", "report");
  return c;
}

/// Defaults overlaid with `patch`, resolved.
inline SimConfig config_from_patch(const Json& patch) {
  Json doc = to_json(SimConfig{});
  detail::overlay(doc, patch, "");
  SimConfig c = from_json(doc);
  c.resolve();
  return c;
}

inline Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

/// Expands a possibly bare field name (`inner_period`) to its dotted path
/// (`tlsr.inner_period`). Bare names must match exactly one leaf.
inline std::string resolve_field(const std::string& field) {
  const Json doc = to_json(SimConfig{});
  if (field.find('.') != std::string::npos) {
    const Json* node = &doc;
    std::stringstream ss(field);
    std::string part;
    while (std::getline(ss, part, '.')) {
      if (!node->is_object() || !node->contains(part)) throw ConfigError(field + ": unknown key");
      node = &(*node)[part];
    }
    if (node->is_object()) throw ConfigError(field + ": not a leaf field");
    return field;
  }
  if (doc.contains(field) && !doc[field].is_object()) return field;
  std::vector<std::string> hits;
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (it->is_object() && it->contains(field)) hits.push_back(it.key() + "." + field);
  if (hits.empty()) throw ConfigError(field + ": unknown key");
  if (hits.size() > 1) throw ConfigError(field + ": ambiguous, use one of " + hits[0] + ", " + hits[1]);
  return hits[0];
}

/// `value` as JSON when it parses, else as a string.
inline Json parse_override_value(const std::string& value) {
  try {
    return Json::parse(value);
  } catch (const nlohmann::json::parse_error&) {
    return Json(value);
  }
}

/// Applies `field=value` to a patch document.
inline void apply_override(Json& patch, const std::string& field, const Json& value) {
  const std::string path = resolve_field(field);
  Json* node = &patch;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object()) (*node)[parts[i]] = Json::object();
    node = &(*node)[parts[i]];
  }
  (*node)[parts.back()] = value;
}

inline void apply_override(Json& patch, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment + ": expected key=value");
  apply_override(patch, assignment.substr(0, eq), parse_override_value(assignment.substr(eq + 1)));
}

}  // namespace nvmwear
