#include "poselabel/poselabel.h"

#include <exception>
#include <new>
#include <string>

#include "poselabel/config.hpp"
#include "poselabel/errors.hpp"
#include "poselabel/pipeline.hpp"

namespace {

thread_local std::string g_last_error;

pl_status fail(pl_status status, const char* message) {
  g_last_error = message;
  return status;
}

pl_status guard(pl_report** out, poselabel::pipeline::Report (*command)(
                                     const poselabel::pipeline::PipelineConfig&),
                const pl_config* config);

}  // namespace

struct pl_config {
  poselabel::pipeline::PipelineConfig cfg;
};

struct pl_report {
  int32_t exit_code = 0;
  std::string text;
  std::string json;
};

namespace {

pl_status guard(pl_report** out,
                poselabel::pipeline::Report (*command)(const poselabel::pipeline::PipelineConfig&),
                const pl_config* config) {
  if (!config || !out) return fail(PL_ERROR_IO, "null argument");
  try {
    poselabel::pipeline::Report r = command(config->cfg);
    auto* report = new pl_report{r.exit_code, std::move(r.text), std::move(r.json)};
    *out = report;
    return PL_OK;
  } catch (const poselabel::Error& e) {
    g_last_error = e.what();
    return e.exit_code() == 2 ? PL_ERROR_DOMAIN : PL_ERROR_IO;
  } catch (const std::bad_alloc&) {
    return fail(PL_ERROR_IO, "out of memory");
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PL_ERROR_IO;
  }
}

}  // namespace

extern "C" {

const char* pl_version(void) { return "1.0.0"; }

const char* pl_last_error(void) { return g_last_error.c_str(); }

pl_status pl_config_load(const char* path, pl_config** out) {
  if (!path || !out) return fail(PL_ERROR_IO, "null argument");
  try {
    auto* handle = new pl_config{poselabel::pipeline::PipelineConfig::load(path)};
    *out = handle;
    return PL_OK;
  } catch (const poselabel::Error& e) {
    g_last_error = e.what();
    return e.exit_code() == 2 ? PL_ERROR_DOMAIN : PL_ERROR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PL_ERROR_IO;
  }
}

void pl_config_free(pl_config* config) { delete config; }

pl_status pl_config_set_workers(pl_config* config, int32_t workers) {
  if (!config) return fail(PL_ERROR_IO, "null config");
  if (workers < 0) return fail(PL_ERROR_DOMAIN, "workers must be >= 0");
  config->cfg.workers = workers;
  return PL_OK;
}

pl_status pl_config_set_seed(pl_config* config, uint64_t seed) {
  if (!config) return fail(PL_ERROR_IO, "null config");
  config->cfg.seed = seed;
  return PL_OK;
}

pl_status pl_config_set_overwrite(pl_config* config, int enabled) {
  if (!config) return fail(PL_ERROR_IO, "null config");
  config->cfg.overwrite = enabled != 0;
  return PL_OK;
}

pl_status pl_config_set_force(pl_config* config, int enabled) {
  if (!config) return fail(PL_ERROR_IO, "null config");
  config->cfg.force = enabled != 0;
  return PL_OK;
}

pl_status pl_run_localize(const pl_config* config, pl_report** out) {
  return guard(out, poselabel::pipeline::run_localize, config);
}

pl_status pl_run_tune(const pl_config* config, pl_report** out) {
  return guard(out, poselabel::pipeline::run_tune, config);
}

pl_status pl_run_annotate(const pl_config* config, pl_report** out) {
  return guard(out, poselabel::pipeline::run_annotate, config);
}

pl_status pl_run_stats(const pl_config* config, pl_report** out) {
  return guard(out, poselabel::pipeline::run_stats, config);
}

pl_status pl_run_validate(const pl_config* config, pl_report** out) {
  return guard(out, poselabel::pipeline::run_validate, config);
}

pl_status pl_run_synth(const pl_config* config, pl_report** out) {
  return guard(out, poselabel::pipeline::run_synth, config);
}

pl_status pl_run_overlay(const pl_config* config, pl_report** out) {
  return guard(out, poselabel::pipeline::run_overlay, config);
}

int32_t pl_report_exit_code(const pl_report* report) { return report ? report->exit_code : 1; }

const char* pl_report_text(const pl_report* report) { return report ? report->text.c_str() : ""; }

const char* pl_report_json(const pl_report* report) { return report ? report->json.c_str() : ""; }

void pl_report_free(pl_report* report) { delete report; }

}  // extern "C"
