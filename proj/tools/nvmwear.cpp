// Command-line front end: simulate, sweep, attack, dump-config.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nvmwear/nvmwear.hpp"

namespace fs = std::filesystem;
using namespace nvmwear;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::int64_t seed = -1;
  std::string out;
  std::string preset;
  std::string scheme;
};

void add_common(CLI::App* cmd, Common& c, bool with_out) {
  cmd->add_option("--config,-c", c.config_path, "JSON config file");
  cmd->add_option("--set,-s", c.sets, "Override, dotted.key=value (repeatable)");
  cmd->add_option("--seed", c.seed, "Seed override");
  if (with_out) cmd->add_option("--out,-o", c.out, "Output directory (else $NVMWEARSIM_OUT, else ./nvmwear-out)");
}

// Attack presets: the desk-scale version of hammering a 64GB bank until it
// dies. Requests are capped at 4 * M * E unless stop.max_requests is set.
Json preset_patch(const std::string& preset, const std::string& scheme) {
  Json p = Json::object();
  if (preset == "raa")
    p["workload"] = {{"kind", "raa"}, {"address", 0}};
  else if (preset == "bpa")
    p["workload"] = {{"kind", "bpa"}};
  else
    throw ConfigError("--preset must be raa or bpa");
  if (!scheme.empty()) p["scheme"] = scheme;
  p["stop"] = {{"on_failure", true}};
  return p;
}

SimConfig build_config(const Common& c, Json& patch) {
  if (!c.preset.empty()) patch = preset_patch(c.preset, c.scheme);
  if (!c.config_path.empty()) {
    Json file = load_json_file(c.config_path);
    if (!file.is_object()) throw ConfigError(c.config_path + ": expected an object");
    patch.merge_patch(file);
  }
  for (const std::string& s : c.sets) apply_override(patch, s);
  if (c.preset.empty() && !c.scheme.empty()) patch["scheme"] = c.scheme;
  if (c.seed >= 0) patch["seed"] = c.seed;
  SimConfig cfg = config_from_patch(patch);
  const bool capped = patch.contains("stop") && patch["stop"].contains("max_requests");
  if (!c.preset.empty() && !capped) {
    cfg.stop.max_requests = 4 * cfg.geometry.lines * cfg.endurance.limit;
    patch["stop"]["max_requests"] = cfg.stop.max_requests;
  }
  return cfg;
}

fs::path output_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("NVMWEARSIM_OUT"); env && *env) return env;
  return "nvmwear-out";
}

void print_summary(const Report& r, const std::string& label) {
  const auto& l = r.lifetime;
  std::cout << label << ": scheme=" << r.config.scheme << " requests=" << r.requests
            << " failed=" << (l.failed ? "yes" : "no") << std::setprecision(6)
            << " normalized_lifetime=" << l.normalized_lifetime << " extra_writes=" << l.extra_write_fraction
            << " hit_rate=" << r.hit_rate() << " amat_ns=" << r.amat_ns() << '\n';
}

std::vector<Axis> parse_axes(const std::vector<std::string>& specs) {
  std::vector<Axis> axes;
  for (const std::string& text : specs) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(text + ": expected field=v1,v2,...");
    Axis a{text.substr(0, eq), {}};
    std::stringstream ss(text.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) a.values.push_back(parse_override_value(item));
    axes.push_back(std::move(a));
  }
  return axes;
}

std::string field_pointer(std::string field) {
  std::replace(field.begin(), field.end(), '.', '/');
  return field;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wear-leveling simulator for MLC non-volatile memory"};
  app.require_subcommand(1);

  Common sim, swp, atk, dump;
  unsigned jobs = 1;
  std::vector<std::string> axis_specs;

  auto* simulate = app.add_subcommand("simulate", "Run one simulation and write report files");
  add_common(simulate, sim, true);
  simulate->add_option("--scheme", sim.scheme, "Scheme shortcut for --set scheme=NAME");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run the Cartesian product of parameter axes");
  add_common(sweep_cmd, swp, true);
  sweep_cmd->add_option("--axis,-a", axis_specs, "field=v1,v2,... (repeatable)");
  sweep_cmd->add_option("--jobs,-j", jobs, "Concurrent simulations")->check(CLI::PositiveNumber);

  auto* attack = app.add_subcommand("attack", "Run an attack preset until the device fails");
  add_common(attack, atk, true);
  attack->add_option("--preset", atk.preset, "raa or bpa")->required()->check(CLI::IsMember({"raa", "bpa"}));
  attack->add_option("--scheme", atk.scheme, "Wear-leveling scheme")->required();

  auto* dump_cmd = app.add_subcommand("dump-config", "Print the fully resolved configuration");
  add_common(dump_cmd, dump, false);
  dump_cmd->add_option("--preset", dump.preset, "Resolve an attack preset")->check(CLI::IsMember({"raa", "bpa"}));
  dump_cmd->add_option("--scheme", dump.scheme, "Scheme");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*dump_cmd) {
      Json patch = Json::object();
      const SimConfig cfg = build_config(dump, patch);
      std::cout << to_json(cfg).dump(2) << '\n';
      return 0;
    }
    if (*simulate) {
      Json patch = Json::object();
      const SimConfig cfg = build_config(sim, patch);
      const Report r = run(cfg);
      const fs::path dir = output_dir(sim);
      write_report_files(dir, "report", r);
      print_summary(r, (dir / "report.json").string());
      return 0;
    }
    if (*attack) {
      Json patch = Json::object();
      const SimConfig cfg = build_config(atk, patch);
      const Report r = run(cfg);
      const fs::path dir = output_dir(atk);
      const std::string stem = "attack-" + atk.preset + "-" + cfg.scheme;
      write_report_files(dir, stem, r);
      print_summary(r, (dir / (stem + ".json")).string());
      return 0;
    }
    if (*sweep_cmd) {
      Json patch = Json::object();
      build_config(swp, patch);
      const std::vector<Axis> axes = parse_axes(axis_specs);
      const std::vector<Report> reports = sweep(patch, axes, jobs);
      const fs::path dir = output_dir(swp);
      Json index = Json::array();
      for (std::size_t i = 0; i < reports.size(); ++i) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "run-%03zu", i);
        write_report_files(dir, stem, reports[i]);
        Json point = Json::object();
        for (const Axis& a : axes) {
          std::string field = resolve_field(a.field);
          point[field] = to_json(reports[i].config).at(Json::json_pointer("/" + field_pointer(field)));
        }
        index.push_back({{"report", std::string(stem) + ".json"},
                         {"point", point},
                         {"normalized_lifetime", reports[i].lifetime.normalized_lifetime},
                         {"extra_write_fraction", reports[i].lifetime.extra_write_fraction},
                         {"hit_rate", reports[i].hit_rate()}});
        print_summary(reports[i], (dir / (std::string(stem) + ".json")).string());
      }
      write_atomically(dir / "sweep.json", index.dump(2) + "\n");
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "trace error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
