#include "inkline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>

#include "inkline/errors.hpp"
#include "inkline/metrics.hpp"

namespace inkline {

namespace {

namespace fs = std::filesystem;

// Re-throws stage failures with the stage name prefixed, preserving the
// input/invariant distinction (and with it the CLI exit code).
template <typename F>
auto stage(const char* name, F&& fn) {
    try {
        return fn();
    } catch (const InputError& e) {
        throw InputError(std::string(name) + ": " + e.what());
    } catch (const InvariantError& e) {
        throw InvariantError(std::string(name) + ": " + e.what());
    }
}

void validate_config(const PipelineConfig& cfg) {
    require_input(cfg.mm_per_pixel > 0.0,
                  "config: mm_per_pixel must be positive");
    require_input(cfg.rdp_epsilon >= 0.0,
                  "config: rdp_epsilon must be non-negative");
    require_input(cfg.fit_max_err > 0.0,
                  "config: fit max_err must be positive");
    require_input(cfg.flatten_tol > 0.0,
                  "config: flatten tol must be positive");
    require_input(cfg.corner_deg > 0.0 && cfg.corner_deg <= 180.0,
                  "config: corner_deg must be in (0, 180]");
    require_input(cfg.max_turn_deg >= 0.0 && cfg.max_turn_deg <= 180.0,
                  "config: max_turn_deg must be in [0, 180]");
    require_input(cfg.min_path_px >= 1, "config: min_path_px must be >= 1");
    require_input(cfg.tangent_window >= 2,
                  "config: tangent_window must be >= 2");
    require_input(cfg.two_opt_max_passes >= 0,
                  "config: two_opt max_passes must be non-negative");
    require_input(cfg.origin.x >= 0.0 && cfg.origin.y >= 0.0,
                  "config: origin must be non-negative");
    require_input(cfg.continuity_threshold_mm >= 0.0,
                  "config: continuity threshold must be non-negative");
    require_input(cfg.lift_seconds >= 0.0,
                  "config: lift cost must be non-negative");
    require_input(cfg.header.draw_feed > 0.0 && cfg.header.travel_feed > 0.0,
                  "config: feeds must be positive");
}

// Fills in a zero workspace from the drawing extent and checks an explicit
// one actually contains it.
ProgramHeader effective_header(const PipelineConfig& cfg, double extent_x,
                               double extent_y) {
    ProgramHeader header = cfg.header;
    if (header.workspace_w <= 0.0 && header.workspace_h <= 0.0) {
        header.workspace_w = std::max(extent_x, 1.0);
        header.workspace_h = std::max(extent_y, 1.0);
        return header;
    }
    require_input(header.workspace_w > 0.0 && header.workspace_h > 0.0,
                  "config: workspace must be positive in both dimensions");
    require_input(header.workspace_w >= extent_x - 1e-9 &&
                      header.workspace_h >= extent_y - 1e-9,
                  "config: workspace smaller than the drawing extent");
    return header;
}

Stroke dot_stroke(Vec2 p) {
    return Stroke{{CubicBezier{p, p, p, p}}, false};
}

// Shared tail: plan the strokes and serialize everything.
PipelineResult finish(std::vector<Stroke> strokes, const PipelineConfig& cfg,
                      const ProgramHeader& header) {
    PipelineResult result;
    result.strokes = std::move(strokes);
    result.plan = stage("plan", [&] {
        StrokePlan greedy = greedy_plan(result.strokes, cfg.plan_start);
        return two_opt_improve(greedy, result.strokes,
                               cfg.two_opt_max_passes);
    });
    result.svg = stage("svg", [&] {
        return emit_svg(result.strokes, header.workspace_w,
                        header.workspace_h);
    });
    result.program = stage("program", [&] {
        return emit_program(result.plan, result.strokes, header,
                            cfg.flatten_tol, cfg.lift_seconds);
    });
    result.report = stage("metrics", [&] {
        return compute_metrics(result.plan, result.strokes, header,
                               cfg.continuity_threshold_mm, cfg.lift_seconds);
    });
    return result;
}

}  // namespace

PipelineResult trace_image(const GrayRaster& image, const PipelineConfig& cfg) {
    validate_config(cfg);
    require_input(image.width >= 1 && image.height >= 1,
                  "trace: image must be non-empty");

    double extent_x =
        cfg.origin.x + static_cast<double>(image.width - 1) * cfg.mm_per_pixel;
    double extent_y =
        cfg.origin.y + static_cast<double>(image.height - 1) * cfg.mm_per_pixel;
    ProgramHeader header = effective_header(cfg, extent_x, extent_y);

    BinaryRaster mask =
        stage("binarize", [&] { return binarize(image, cfg.binarize); });
    if (cfg.thinning) {
        mask = stage("thin", [&] { return thin(mask); });
    }
    SkeletonGraph graph =
        stage("skeleton-graph", [&] { return build_skeleton_graph(mask); });
    std::vector<PixelPath> paths = stage("path-extraction", [&] {
        return extract_paths(graph, cfg.max_turn_deg, cfg.min_path_px,
                             cfg.tangent_window);
    });

    std::vector<Stroke> strokes = stage("stroke-fit", [&] {
        std::vector<Stroke> fitted(paths.size());
        std::vector<std::string> input_errors(paths.size());
        std::vector<std::string> invariant_errors(paths.size());
        bool failed = false;
        // Paths are independent; results land at their input index, so the
        // output order never depends on the thread schedule.
#pragma omp parallel for schedule(dynamic)
        for (size_t i = 0; i < paths.size(); ++i) {
            try {
                WorkspacePath wp =
                    to_workspace(paths[i], cfg.mm_per_pixel, cfg.origin,
                                 cfg.flip_y, image.height);
                if (wp.is_dot) {
                    fitted[i] = dot_stroke(wp.dot);
                } else {
                    Polyline line = cfg.rdp_epsilon > 0.0
                                        ? simplify(wp.line, cfg.rdp_epsilon)
                                        : wp.line;
                    fitted[i] =
                        fit_stroke(line, cfg.fit_max_err, cfg.corner_deg);
                }
            } catch (const InputError& e) {
                input_errors[i] = e.what();
                failed = true;
            } catch (const std::exception& e) {
                invariant_errors[i] = e.what();
                failed = true;
            }
        }
        if (failed) {
            for (size_t i = 0; i < paths.size(); ++i) {
                if (!input_errors[i].empty())
                    throw InputError("path " + std::to_string(i) + ": " +
                                     input_errors[i]);
                if (!invariant_errors[i].empty())
                    throw InvariantError("path " + std::to_string(i) + ": " +
                                         invariant_errors[i]);
            }
        }
        return fitted;
    });

    return finish(std::move(strokes), cfg, header);
}

PipelineResult plan_strokes(std::vector<Stroke> strokes,
                            const PipelineConfig& cfg) {
    validate_config(cfg);
    double extent_x = 0.0;
    double extent_y = 0.0;
    for (const Stroke& s : strokes) {
        require_input(!s.segments.empty(), "plan: stroke has no segments");
        for (const CubicBezier& seg : s.segments) {
            for (const Vec2& p : {seg.p0, seg.p1, seg.p2, seg.p3}) {
                extent_x = std::max(extent_x, p.x);
                extent_y = std::max(extent_y, p.y);
            }
        }
    }
    ProgramHeader header = effective_header(cfg, extent_x, extent_y);
    return finish(std::move(strokes), cfg, header);
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require_input(out.good(), "cannot open " + tmp + " for writing");
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out.good()) {
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw InputError("cannot write " + tmp);
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ec2;
        fs::remove(tmp, ec2);
        throw InputError("cannot rename " + tmp + " to " + path + ": " +
                         ec.message());
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require_input(in.good(), "cannot read " + path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    require_input(!in.bad(), "cannot read " + path);
    return content;
}

void write_outputs(const PipelineResult& result, const PipelineConfig& cfg) {
    stage("write-output", [&] {
        require_input(!cfg.output_dir.empty(), "output directory not set");
        std::error_code ec;
        fs::create_directories(cfg.output_dir, ec);
        require_input(!ec, "cannot create output directory " + cfg.output_dir +
                               ": " + ec.message());
        std::vector<std::string> written;
        auto emit_one = [&](const std::string& name,
                            const std::string& content) {
            std::string path = (fs::path(cfg.output_dir) / name).string();
            write_file_atomic(path, content);
            written.push_back(path);
        };
        try {
            emit_one("drawing.svg", result.svg);
            emit_one("drawing.prog", render_program(result.program));
            emit_one("report.json", report_to_json(result.report));
        } catch (...) {
            for (const std::string& path : written) {
                std::error_code ec2;
                fs::remove(path, ec2);
            }
            throw;
        }
        return 0;
    });
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
    GrayRaster image = stage(
        "read-input", [&] { return read_pgm_file(cfg.input_path); });
    PipelineResult result = trace_image(image, cfg);
    write_outputs(result, cfg);
    return result;
}

}  // namespace inkline
