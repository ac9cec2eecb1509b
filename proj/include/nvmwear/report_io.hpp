#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nvmwear/config.hpp"
#include "nvmwear/simulator.hpp"

namespace nvmwear {

inline Json report_to_json(const Report& r) {
  const LifetimeResult& l = r.lifetime;
  return Json{
      {"scheme", r.config.scheme},
      {"seed", r.config.seed},
      {"requests", r.requests},
      {"reads", r.reads},
      {"writes", l.user_writes},
      {"lifetime",
       {{"failed", l.failed},
        {"failure_user_writes", l.failure_user_writes},
        {"ideal_user_writes", l.ideal_user_writes},
        {"normalized_lifetime", l.normalized_lifetime},
        {"physical_writes", l.physical_writes},
        {"movement_writes", l.movement_writes},
        {"metadata_writes", l.metadata_writes},
        {"extra_write_fraction", l.extra_write_fraction},
        {"lines_failed", l.lines_failed},
        {"spares_used", l.spares_used}}},
      {"translation",
       {{"hits", r.hits},
        {"misses", r.misses},
        {"hit_rate", r.hit_rate()},
        {"latency_ns_total", r.translation_ns_total},
        {"avg_latency_ns", r.avg_translation_ns()}}},
      {"amat_ns", r.amat_ns()},
      {"adaptation", {{"merges", r.merges}, {"splits", r.splits}, {"final_avg_q", r.final_avg_q}}},
      {"samples", r.timeline.size()},
      {"config", to_json(r.config)},
  };
}

inline std::string timeline_csv(const Report& r) {
  std::ostringstream os;
  os << "request_index,hit_rate,avg_Q,action\n";
  for (const TimelineRecord& t : r.timeline)
    os << t.request_index << ',' << Json(t.hit_rate).dump() << ',' << Json(t.avg_q).dump() << ','
       << signal_name(t.action) << '\n';
  return os.str();
}

inline std::string wear_csv(const Report& r) {
  std::ostringstream os;
  os << "pma,write_count\n";
  for (std::size_t i = 0; i < r.wear_histogram.size(); ++i) os << i << ',' << r.wear_histogram[i] << '\n';
  return os.str();
}

/// Writes through a temporary file in the same directory, then renames.
inline void write_atomically(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// `<stem>.json`, `<stem>.timeline.csv` and, when recorded, `<stem>.wear.csv`.
inline void write_report_files(const std::filesystem::path& dir, const std::string& stem, const Report& r) {
  write_atomically(dir / (stem + ".json"), report_to_json(r).dump(2) + "\n");
  if (r.config.report.timeline) write_atomically(dir / (stem + ".timeline.csv"), timeline_csv(r));
  if (r.config.report.wear_histogram) write_atomically(dir / (stem + ".wear.csv"), wear_csv(r));
}

}  // namespace nvmwear
