#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "inkline/metrics.hpp"
#include "inkline/program_emit.hpp"
#include "inkline/raster_trace.hpp"
#include "inkline/stroke_fit.hpp"
#include "inkline/stroke_plan.hpp"

namespace inkline {

// Every knob of the image -> strokes -> plan -> outputs run.
struct PipelineConfig {
    std::string input_path;        // PGM image
    std::string output_dir;        // receives drawing.svg/drawing.prog/report.json
    BinarizePolicy binarize = BinarizePolicy::otsu();
    bool thinning = true;
    double max_turn_deg = 45.0;
    int min_path_px = 4;
    int tangent_window = 5;
    double mm_per_pixel = 0.25;
    Vec2 origin{0.0, 0.0};
    bool flip_y = true;
    double rdp_epsilon = 0.1;      // mm
    double fit_max_err = 0.35;     // mm
    double corner_deg = 100.0;
    Vec2 plan_start{0.0, 0.0};
    int two_opt_max_passes = 50;
    double flatten_tol = 0.2;      // mm
    // Workspace 0x0 (the default here) auto-sizes to the drawing extent.
    ProgramHeader header{.workspace_w = 0.0, .workspace_h = 0.0};
    double continuity_threshold_mm = 10.0;
    double lift_seconds = 0.3;
    uint64_t seed = 1;             // recorded for provenance; tracing is
                                   // deterministic and never consumes it
};

struct PipelineResult {
    std::vector<Stroke> strokes;
    StrokePlan plan;
    std::string svg;
    MotionProgram program;
    VectorFriendlinessReport report;
};

// In-memory pipeline: binarize, optionally thin, build the skeleton graph,
// extract pixel paths, map to workspace mm, simplify, fit strokes, plan,
// and serialize. Pure function of (image, cfg).
PipelineResult trace_image(const GrayRaster& image, const PipelineConfig& cfg);

// Plans and serializes already-fitted strokes (the `plan` subcommand).
PipelineResult plan_strokes(std::vector<Stroke> strokes,
                            const PipelineConfig& cfg);

// Reads cfg.input_path, runs trace_image, and writes drawing.svg,
// drawing.prog, and report.json into cfg.output_dir. Writes are atomic
// (temp file + rename); on failure partial outputs are removed and the
// error is prefixed with the failing stage name.
PipelineResult run_pipeline(const PipelineConfig& cfg);

// Serializes result.svg, the rendered motion program, and the JSON report
// into cfg.output_dir as drawing.svg / drawing.prog / report.json. Each file
// is written atomically; if any write fails, files already written by this
// call are removed.
void write_outputs(const PipelineResult& result, const PipelineConfig& cfg);

// Atomic file write used by the pipeline (temp file in the same directory,
// then rename over the target).
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

}  // namespace inkline
