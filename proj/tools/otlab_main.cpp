#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "otlab/suites.hpp"
#include "otlab/types.hpp"

namespace {

using json = nlohmann::ordered_json;

struct Cli {
  std::string suite = "all";
  std::string instance;
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  bool json_stdout = false;
  int workers = 1;
  bool list = false;
};

std::vector<std::pair<std::string, std::string>> parse_config_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw otlab::ConfigError("config file '" + path + "' is not readable");
  }
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw otlab::ConfigError("config file '" + path + "' line " +
                               std::to_string(lineno) +
                               ": expected key=value");
    }
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    entries.emplace_back(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
  }
  return entries;
}

json config_json(const otlab::SuiteConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["samples"] = cfg.samples;
  j["oracle_points"] = cfg.oracle_points;
  j["probes"] = cfg.probes;
  j["trials"] = cfg.trials;
  j["steps"] = cfg.steps;
  j["paths"] = cfg.paths;
  j["grid_points"] = cfg.grid_points;
  j["grid_range"] = cfg.grid_range;
  j["jacobian_bias_tol"] = cfg.jacobian_bias_tol;
  return j;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

struct RunRecord {
  otlab::SuiteRun run;
  double wall_ms = 0.0;
  bool errored = false;
  std::string error;
};

std::vector<std::string> jsonl_lines(const RunRecord& rec,
                                     const otlab::SuiteConfig& cfg) {
  std::vector<std::string> lines;
  const std::string digest = hex64(fnv1a(
      rec.run.suite + "|" + rec.run.instance + "|" + config_json(cfg).dump()));
  {
    json j;
    j["type"] = "instance";
    j["suite"] = rec.run.suite;
    j["instance"] = rec.run.instance;
    j["digest"] = digest;
    j["config"] = config_json(cfg);
    lines.push_back(j.dump());
  }
  if (rec.errored) {
    json j;
    j["type"] = "check";
    j["suite"] = rec.run.suite;
    j["instance"] = rec.run.instance;
    j["name"] = "suite_error";
    j["relation"] = "flag";
    j["pass"] = false;
    j["note"] = rec.error;
    lines.push_back(j.dump());
  }
  int failures = rec.errored ? 1 : 0;
  for (const auto& c : rec.run.report.checks) {
    json j;
    j["type"] = "check";
    j["suite"] = rec.run.suite;
    j["instance"] = rec.run.instance;
    j["name"] = c.name;
    j["value"] = c.value;
    j["bound"] = c.bound;
    j["relation"] = c.relation;
    j["tolerance"] = c.tolerance;
    j["pass"] = c.pass;
    j["provenance"] = c.provenance;
    if (!c.note.empty()) j["note"] = c.note;
    lines.push_back(j.dump());
    if (!c.pass) ++failures;
  }
  for (const auto& [name, value] : rec.run.report.metrics) {
    json j;
    j["type"] = "metric";
    j["suite"] = rec.run.suite;
    j["instance"] = rec.run.instance;
    j["name"] = name;
    j["value"] = value;
    lines.push_back(j.dump());
  }
  {
    json j;
    j["type"] = "summary";
    j["suite"] = rec.run.suite;
    j["instance"] = rec.run.instance;
    j["checks"] = rec.run.report.checks.size() + (rec.errored ? 1 : 0);
    j["failures"] = failures;
    j["pass"] = failures == 0;
    j["wall_ms"] = rec.wall_ms;
    lines.push_back(j.dump());
  }
  return lines;
}

}  // namespace

int main(int argc, char** argv) {
  Cli cli;
  CLI::App app{"finite-dimensional transport laboratory"};
  app.add_option("--suite", cli.suite,
                 "suite to run: detcf, polar, gaussmap, ma-verify, dimlift, "
                 "ito-sim, all");
  app.add_option("--instance", cli.instance,
                 "named instance (default: every instance the suite accepts)");
  app.add_option("--config", cli.config_path, "key=value config file");
  auto* seed_opt = app.add_option("--seed", cli.seed, "sampling seed");
  app.add_option("--out", cli.out_dir, "directory for JSONL reports");
  app.add_flag("--json", cli.json_stdout, "emit JSONL records on stdout");
  app.add_option("--workers", cli.workers,
                 "parallel suite runs (never changes numeric results)");
  app.add_flag("--list", cli.list, "list suites and built-in instances");
  CLI11_PARSE(app, argc, argv);

  try {
    if (cli.list) {
      std::cout << "suites:\n";
      for (const auto& name : otlab::suite_names()) {
        std::cout << "  " << name << "  " << otlab::suite_description(name)
                  << "\n";
      }
      std::cout << "instances:\n";
      for (const auto& info : otlab::instance_catalog()) {
        std::cout << "  " << info.name << "  " << info.summary << "  [";
        for (std::size_t i = 0; i < info.suites.size(); ++i) {
          std::cout << (i ? " " : "") << info.suites[i];
        }
        std::cout << "]\n";
      }
      return 0;
    }

    std::vector<std::pair<std::string, std::string>> entries;
    if (!cli.config_path.empty()) entries = parse_config_file(cli.config_path);
    otlab::SuiteConfig cfg = otlab::config_from_entries(entries);
    if (seed_opt->count() > 0) cfg.seed = cli.seed;
    if (cli.workers < 1) {
      throw otlab::ConfigError("--workers must be at least 1");
    }

    const auto plan = otlab::plan_runs(cli.suite, cli.instance);

    // Every run is a pure function of (suite, instance, cfg); workers only
    // change scheduling.  Results are collected in plan order.
    std::vector<RunRecord> records(plan.size());
    std::size_t next = 0;
    while (next < plan.size()) {
      const std::size_t wave =
          std::min<std::size_t>(cli.workers, plan.size() - next);
      std::vector<std::future<RunRecord>> futs;
      for (std::size_t k = 0; k < wave; ++k) {
        const auto& [s, i] = plan[next + k];
        futs.push_back(std::async(
            cli.workers > 1 ? std::launch::async : std::launch::deferred,
            [&cfg, s, i]() {
              RunRecord rec;
              rec.run.suite = s;
              rec.run.instance = i;
              const auto start = std::chrono::steady_clock::now();
              try {
                rec.run = otlab::run_one(s, i, cfg);
              } catch (const std::exception& e) {
                rec.errored = true;
                rec.error = e.what();
              }
              rec.wall_ms = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - start)
                                .count();
              return rec;
            }));
      }
      for (std::size_t k = 0; k < wave; ++k) {
        records[next + k] = futs[k].get();
      }
      next += wave;
    }

    if (!cli.out_dir.empty()) {
      std::filesystem::create_directories(cli.out_dir);
    }

    bool all_pass = true;
    for (const auto& rec : records) {
      const auto lines = jsonl_lines(rec, cfg);
      if (cli.json_stdout) {
        for (const auto& line : lines) std::cout << line << "\n";
      }
      if (!cli.out_dir.empty()) {
        const std::string fname =
            rec.run.suite + "-" + rec.run.instance + ".jsonl";
        std::ofstream out(std::filesystem::path(cli.out_dir) / fname);
        for (const auto& line : lines) out << line << "\n";
      }

      int failures = rec.errored ? 1 : 0;
      for (const auto& c : rec.run.report.checks) {
        if (!c.pass) ++failures;
      }
      all_pass = all_pass && failures == 0;
      if (!cli.json_stdout) {
        std::ostringstream head;
        head << rec.run.suite << "/" << rec.run.instance;
        std::cout << std::left << std::setw(28) << head.str() << " "
                  << std::setw(3) << rec.run.report.checks.size() << " checks  "
                  << (failures == 0 ? "PASS" : "FAIL") << "  ("
                  << std::fixed << std::setprecision(0) << rec.wall_ms
                  << " ms)\n";
        if (rec.errored) {
          std::cout << "    error: " << rec.error << "\n";
        }
        for (const auto& c : rec.run.report.checks) {
          if (!c.pass) {
            std::cout << "    FAIL " << c.name << "  value=" << std::scientific
                      << std::setprecision(6) << c.value
                      << " bound=" << c.bound << " relation=" << c.relation
                      << (c.note.empty() ? "" : "  " + c.note) << "\n";
          }
        }
      }
    }
    return all_pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
