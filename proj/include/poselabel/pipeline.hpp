#pragma once

#include <string>

#include "poselabel/config.hpp"

namespace poselabel::pipeline {

/// Outcome of one command. exit_code follows the CLI contract: 0 success,
/// 1 I/O or parse failure, 2 domain/validation failure. Failures that abort
/// a command are thrown as Error; partial per-camera failures are folded
/// into the report with exit_code 2.
struct Report {
  int exit_code = 0;
  std::string text;  // human-readable summary
  std::string json;  // machine-readable mirror of the same facts
};

/// PnP-localizes every configured camera from its board observation file and
/// writes the extrinsics file. Degenerate cameras are reported and skipped.
Report run_localize(const PipelineConfig& cfg);

/// Grid-search tuning for every camera listed in the tuning-mask manifest;
/// updates the extrinsics file in place. Already-tuned cameras are skipped
/// unless force is set.
Report run_tune(const PipelineConfig& cfg);

/// Streams scenes from the frame index + mocap log, annotates them and
/// writes the BOP dataset. Refuses to clobber an existing output root unless
/// overwrite is set.
Report run_annotate(const PipelineConfig& cfg);

/// Dataset statistics (frames, instances per class, per-scenario breakdown).
Report run_stats(const PipelineConfig& cfg);

/// Structural dataset checks; exit_code 2 when violations are found.
Report run_validate(const PipelineConfig& cfg);

/// Generates the synthetic facility: ground-truth extrinsics, board
/// observation files, mocap log, frame index, meshes and tuning masks —
/// exactly the inputs the other commands ingest.
Report run_synth(const PipelineConfig& cfg);

/// Renders mask outlines and bboxes over each annotated image for visual
/// inspection.
Report run_overlay(const PipelineConfig& cfg);

}  // namespace poselabel::pipeline
