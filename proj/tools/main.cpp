// toeplitz_wells: command-line driver for the experiments.
//
//   toeplitz_wells <experiment> --config PATH [--out DIR] [--jobs N]
//                  [--grid-override N] [--quiet]
//
// Exit status: 0 when every verdict passes, 1 when a verdict fails,
// 2 for invalid configuration, 3 when the computation itself fails.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "config.hpp"
#include "experiments.hpp"
#include "toeplitz_wells/error.hpp"

namespace fs = std::filesystem;
using namespace toeplitz_wells;
using namespace toeplitz_wells::cli;

namespace {

struct Flags {
  std::string config;
  std::string out;
  int jobs = 1;
  int grid_override = 0;
  bool quiet = false;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

fs::path output_directory(const Flags& flags, const ExperimentConfig& cfg) {
  if (!flags.out.empty()) return flags.out;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("TOEPLITZ_WELLS_OUT"); env && *env) return env;
  return fs::path("toeplitz_wells_out") / to_string(cfg.kind);
}

json metadata(const Flags& flags, double seconds) {
  const std::time_t now = std::time(nullptr);
  char stamp[64];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return {{"finished_utc", stamp}, {"wall_seconds", seconds}, {"jobs", flags.jobs}, {"config_path", flags.config}};
}

int run(ExperimentKind kind, const Flags& flags) {
  ExperimentConfig cfg;
  try {
    cfg = parse_config_file(flags.config, kind);
    if (flags.grid_override > 0) {
      if (flags.grid_override < 8) throw ConfigError("--grid-override", "grid must have at least 8 points per side");
      cfg.grid_override = flags.grid_override;
    }
  } catch (const ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  }

  const fs::path dir = output_directory(flags, cfg);
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  try {
    RunOptions opts;
    opts.jobs = std::max(1, flags.jobs);
    result = run_experiment(cfg, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    fs::create_directories(dir);
    json report = {{"experiment", to_string(cfg.kind)},
                   {"status", "error"},
                   {"error", e.what()},
                   {"config", cfg.canonical()},
                   {"passed", false}};
    write_text(dir / "report.json", report.dump(2) + "\n");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text(dir / "metadata.json", metadata(flags, secs).dump(2) + "\n");
    return 3;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  fs::create_directories(dir);
  for (const auto& t : result.tables) write_text(dir / t.name, t.content);
  write_text(dir / "report.json", build_report(cfg, result).dump(2) + "\n");
  write_text(dir / "metadata.json", metadata(flags, secs).dump(2) + "\n");

  if (!flags.quiet) {
    std::cout << to_string(cfg.kind) << " -> " << dir.string() << "\n";
    for (const auto& line : result.summary) std::cout << "  " << line << "\n";
    for (const auto& v : result.verdicts)
      std::cout << (v.passed ? "PASS " : "FAIL ") << v.name << ": " << v.detail << "\n";
  }
  return result.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toeplitz operators, magnetic Laplacians and quadratic wells on the flat torus"};
  app.require_subcommand(1);
  Flags flags;
  std::optional<ExperimentKind> chosen;
  for (ExperimentKind kind : all_experiments()) {
    CLI::App* sub = app.add_subcommand(to_string(kind), "run the " + to_string(kind) + " experiment");
    sub->add_option("--config", flags.config, "experiment configuration (JSON)")->required();
    sub->add_option("--out", flags.out, "output directory (default: $TOEPLITZ_WELLS_OUT or config)");
    sub->add_option("--jobs", flags.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--grid-override", flags.grid_override, "grid points per side for every p");
    sub->add_flag("--quiet", flags.quiet, "suppress the summary");
    sub->callback([&chosen, kind] { chosen = kind; });
  }
  CLI11_PARSE(app, argc, argv);
  return run(*chosen, flags);
}
