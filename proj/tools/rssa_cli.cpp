#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rssa/rssa.h"

namespace {

using nlohmann::json;

/// Relative output paths land under $RSSA_OUTPUT_DIR when it is set.
std::string output_path(const std::string& path) {
  const char* dir = std::getenv("RSSA_OUTPUT_DIR");
  if (!dir || !*dir || std::filesystem::path(path).is_absolute()) return path;
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / path).string();
}

int fail(rssa_status status) {
  const json err = {{"error", rssa_status_name(status)},
                    {"code", static_cast<int>(status)},
                    {"message", rssa_last_error()},
                    {"stage", rssa_last_error_stage()}};
  std::cerr << err.dump() << '\n';
  return static_cast<int>(status);
}

int usage_error(const std::string& message) {
  const json err = {{"error", "invalid-argument"},
                    {"code", static_cast<int>(RSSA_ERR_INVALID_ARGUMENT)},
                    {"message", message},
                    {"stage", "cli"}};
  std::cerr << err.dump() << '\n';
  return static_cast<int>(RSSA_ERR_INVALID_ARGUMENT);
}

/// Prints and releases a library-owned JSON string.
void print_owned(char* text) {
  if (!text) return;
  std::cout << text << '\n';
  rssa_string_free(text);
}

struct ArtifactHandle {
  rssa_artifact* ptr = nullptr;
  ~ArtifactHandle() { rssa_artifact_free(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tube MPC with artificial steady-state references: offline precompute and "
               "closed-loop experiments"};
  app.require_subcommand(1);

  std::string config, artifact, baseline_artifact, out;
  std::optional<double> beta;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs, horizon;
  int parallel = 1;
  bool baseline = false;
  bool timing = false;

  auto* preset = app.add_subcommand("preset", "Write the built-in quadrotor config");
  preset->add_option("--beta", beta, "Disturbance bound");
  preset->add_flag("--baseline", baseline, "Fixed-target baseline controller");
  preset->add_option("--out", out, "Config file to write")->required();

  auto* pre = app.add_subcommand("precompute", "Build controller artifacts from a config");
  pre->add_option("--config", config, "Config file (JSON)")->required();
  pre->add_option("--beta", beta, "Override the disturbance bound");
  pre->add_flag("--baseline", baseline, "Build the fixed-target baseline controller instead");
  pre->add_option("--out", out, "Artifact file to write")->required();

  auto* sim = app.add_subcommand("simulate", "Single closed-loop run to a trace CSV");
  sim->add_option("--artifact", artifact, "Artifact file")->required();
  sim->add_option("--seed", seed, "Disturbance seed");
  sim->add_option("--beta", beta, "Disturbance bound (at most the artifact's)");
  sim->add_option("--horizon", horizon, "Number of steps T");
  sim->add_option("--out", out, "Trace CSV")->default_val("trace.csv");
  sim->add_flag("--timing", timing, "Record solve times (breaks byte-identical output)");

  auto* mc = app.add_subcommand("montecarlo", "Monte Carlo runs to summary and stats CSVs");
  mc->add_option("--artifact", artifact, "Artifact file")->required();
  mc->add_option("--seed", seed, "Master seed");
  mc->add_option("--beta", beta, "Disturbance bound (at most the artifact's)");
  mc->add_option("--runs", runs, "Number of runs");
  mc->add_option("--horizon", horizon, "Steps per run");
  mc->add_option("--parallel", parallel, "Worker threads")->check(CLI::Range(1, 4096));
  mc->add_option("--out", out, "Output prefix")->default_val("montecarlo");
  mc->add_flag("--timing", timing, "Add solve-time columns");

  auto* roa = app.add_subcommand("roa", "First-step feasibility grid of both controllers");
  roa->add_option("--artifact", artifact, "RSSA artifact file")->required();
  roa->add_option("--baseline", baseline_artifact, "Baseline artifact file")->required();
  roa->add_option("--parallel", parallel, "Worker threads")->check(CLI::Range(1, 4096));
  roa->add_option("--out", out, "ROA CSV")->default_val("roa.csv");

  auto* check = app.add_subcommand("check", "Audit the invariants of an artifact");
  check->add_option("--artifact", artifact, "Artifact file")->required();
  check->add_option("--seed", seed, "Sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return usage_error(e.what());
  }

  json opts = json::object();
  if (seed) opts["seed"] = *seed;
  if (beta) opts["beta"] = *beta;
  if (horizon) opts["horizon"] = *horizon;
  if (runs) opts["runs"] = *runs;
  opts["threads"] = parallel;
  if (timing) opts["timing"] = true;
  const std::string opts_text = opts.dump();

  if (*preset) {
    char* text = nullptr;
    rssa_status st = rssa_drone_preset(beta.value_or(0.02), baseline ? 1 : 0, &text);
    if (st != RSSA_OK) return fail(st);
    const std::string path = output_path(out);
    std::ofstream f(path);
    f << text << '\n';
    rssa_string_free(text);
    if (!f) return usage_error("cannot write '" + path + "'");
    return 0;
  }

  if (*pre) {
    json overrides = json::object();
    if (beta) overrides["disturbance"]["beta"] = *beta;
    if (baseline) overrides["controller"] = "baseline";
    ArtifactHandle art;
    rssa_status st = rssa_precompute_file(config.c_str(), overrides.dump().c_str(), &art.ptr);
    if (st != RSSA_OK) return fail(st);
    st = rssa_artifact_save(art.ptr, output_path(out).c_str());
    if (st != RSSA_OK) return fail(st);
    char* info = nullptr;
    st = rssa_artifact_info(art.ptr, &info);
    if (st != RSSA_OK) return fail(st);
    print_owned(info);
    return 0;
  }

  ArtifactHandle art;
  rssa_status st = rssa_artifact_load(artifact.c_str(), &art.ptr);
  if (st != RSSA_OK) return fail(st);
  char* report = nullptr;

  if (*sim) {
    st = rssa_simulate_csv(art.ptr, opts_text.c_str(), output_path(out).c_str(), &report);
    print_owned(report);
    return st == RSSA_OK ? 0 : fail(st);
  }
  if (*mc) {
    const std::string summary = output_path(out + "_summary.csv");
    const std::string stats = output_path(out + "_stats.csv");
    st = rssa_montecarlo_csv(art.ptr, opts_text.c_str(), summary.c_str(), stats.c_str(), &report);
    print_owned(report);
    return st == RSSA_OK ? 0 : fail(st);
  }
  if (*roa) {
    ArtifactHandle base;
    st = rssa_artifact_load(baseline_artifact.c_str(), &base.ptr);
    if (st != RSSA_OK) return fail(st);
    st = rssa_roa_csv(art.ptr, base.ptr, opts_text.c_str(), output_path(out).c_str(), &report);
    print_owned(report);
    return st == RSSA_OK ? 0 : fail(st);
  }
  if (*check) {
    st = rssa_check(art.ptr, opts_text.c_str(), &report);
    print_owned(report);
    return st == RSSA_OK ? 0 : fail(st);
  }
  return usage_error("no subcommand");
}
