// poselabel command-line front end.
//
// Thin wrapper over the C API: parses arguments, loads the configuration,
// dispatches one subcommand, prints the report, and exits with the report's
// exit code (0 success, 1 I/O failure, 2 domain/validation failure).

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "poselabel/poselabel.h"

namespace {

int fail(const char* stage) {
  std::fprintf(stderr, "poselabel: %s: %s\n", stage, pl_last_error());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view 6D pose dataset annotation pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pl_version()));

  std::string config_path;
  int workers = -1;
  std::uint64_t seed = 0;
  bool has_seed = false, overwrite = false, force = false, json_output = false;

  app.add_option("-c,--config", config_path, "pipeline configuration JSON")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("-j,--workers", workers, "worker threads (0 = hardware concurrency)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "override the configured random seed")
      ->each([&](const std::string&) { has_seed = true; });
  app.add_flag("--overwrite", overwrite, "replace existing outputs");
  app.add_flag("--force", force, "redo work that would normally be skipped");
  app.add_flag("--json", json_output, "print the machine-readable report instead of text");

  struct Command {
    const char* name;
    const char* help;
    pl_status (*run)(const pl_config*, pl_report**);
  };
  const Command commands[] = {
      {"synth", "generate a synthetic capture session (rig, meshes, mocap log, board data)",
       pl_run_synth},
      {"localize", "estimate camera extrinsics from board observations", pl_run_localize},
      {"tune", "refine extrinsics against ground-truth masks", pl_run_tune},
      {"annotate", "produce the annotated dataset from mocap data", pl_run_annotate},
      {"validate", "check an annotated dataset for structural problems", pl_run_validate},
      {"stats", "summarize an annotated dataset", pl_run_stats},
      {"overlay", "render annotation overlays for visual inspection", pl_run_overlay},
  };
  const Command* selected = nullptr;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->fallthrough();  // global flags may follow the subcommand name
    sub->callback([&selected, &c] { selected = &c; });
  }

  CLI11_PARSE(app, argc, argv);

  pl_config* config = nullptr;
  if (pl_config_load(config_path.c_str(), &config) != PL_OK) return fail("config");
  if (workers >= 0 && pl_config_set_workers(config, workers) != PL_OK) {
    pl_config_free(config);
    return fail("config");
  }
  if (has_seed) pl_config_set_seed(config, seed);
  pl_config_set_overwrite(config, overwrite ? 1 : 0);
  pl_config_set_force(config, force ? 1 : 0);

  pl_report* report = nullptr;
  pl_status status = selected->run(config, &report);
  pl_config_free(config);
  if (status != PL_OK) {
    std::fprintf(stderr, "poselabel: %s: %s\n", selected->name, pl_last_error());
    return int(status);
  }

  std::fputs(json_output ? pl_report_json(report) : pl_report_text(report), stdout);
  if (json_output) std::fputc('\n', stdout);
  int exit_code = int(pl_report_exit_code(report));
  pl_report_free(report);
  return exit_code;
}
