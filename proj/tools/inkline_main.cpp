// Command-line front end: tracing, planning, adapter merging, toy training
// and report comparison. Exit codes: 0 success, 1 bad input, 2 internal
// invariant violation.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "inkline/errors.hpp"
#include "inkline/lora_math.hpp"
#include "inkline/metrics.hpp"
#include "inkline/pipeline.hpp"

#ifdef INKLINE_HAVE_PNG
#include <png.h>

#include <csetjmp>
#endif

namespace {

using namespace inkline;
using nlohmann::json;

#ifdef INKLINE_HAVE_PNG

// Decodes any PNG color type to 8-bit grayscale, compositing alpha over
// white paper. PNG support lives here at the CLI boundary; the core library
// accepts PGM only.
GrayRaster read_png_gray(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw InputError("cannot open " + path);

    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        std::fclose(fp);
        throw InputError("PNG decoder initialization failed");
    }

    GrayRaster raster;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw InputError("invalid PNG file: " + path);
    }

    png_init_io(png, fp);
    png_read_info(png, info);

    const png_byte color_type = png_get_color_type(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY &&
        png_get_bit_depth(png, info) < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_16(png);
    if (color_type & PNG_COLOR_MASK_COLOR || color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    png_color_16 white;
    white.index = 0;
    white.red = white.green = white.blue = white.gray = 0xFF;
    png_set_background(png, &white, PNG_BACKGROUND_GAMMA_SCREEN, 0, 1.0);
    png_read_update_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    if (png_get_channels(png, info) != 1 ||
        png_get_bit_depth(png, info) != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw InputError("unsupported PNG layout in " + path);
    }

    raster.width = static_cast<int>(width);
    raster.height = static_cast<int>(height);
    raster.intensities.assign(static_cast<size_t>(width) * height, 0);
    for (png_uint_32 y = 0; y < height; ++y) {
        png_read_row(png,
                     raster.intensities.data() +
                         static_cast<size_t>(y) * width,
                     nullptr);
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return raster;
}

#endif  // INKLINE_HAVE_PNG

bool ends_with_icase(const std::string& text, const std::string& suffix) {
    if (text.size() < suffix.size()) return false;
    for (size_t i = 0; i < suffix.size(); ++i) {
        char a = text[text.size() - suffix.size() + i];
        char b = suffix[i];
        if (std::tolower(static_cast<unsigned char>(a)) !=
            std::tolower(static_cast<unsigned char>(b)))
            return false;
    }
    return true;
}

GrayRaster read_input_image(const std::string& path) {
    if (ends_with_icase(path, ".png")) {
#ifdef INKLINE_HAVE_PNG
        return read_png_gray(path);
#else
        throw InputError(
            "this build lacks PNG support; convert to PGM or rebuild with "
            "libpng");
#endif
    }
    return read_pgm_file(path);
}

// Options shared by the trace and plan subcommands (planning, emission,
// workspace, and report knobs).
void add_output_options(CLI::App* cmd, PipelineConfig& cfg) {
    cmd->add_option("-o,--out-dir", cfg.output_dir,
                    "Output directory for drawing.svg, drawing.prog and "
                    "report.json")
        ->capture_default_str();
    cmd->add_option("--start-x", cfg.plan_start.x, "Pen start position x (mm)")
        ->capture_default_str();
    cmd->add_option("--start-y", cfg.plan_start.y, "Pen start position y (mm)")
        ->capture_default_str();
    cmd->add_option("--two-opt-passes", cfg.two_opt_max_passes,
                    "Maximum 2-opt improvement sweeps (0 disables)")
        ->capture_default_str();
    cmd->add_option("--flatten-tol", cfg.flatten_tol,
                    "Curve flattening tolerance for the motion program (mm)")
        ->capture_default_str();
    cmd->add_option("--workspace-w", cfg.header.workspace_w,
                    "Workspace width in mm (0 = auto-size to the drawing)")
        ->capture_default_str();
    cmd->add_option("--workspace-h", cfg.header.workspace_h,
                    "Workspace height in mm (0 = auto-size to the drawing)")
        ->capture_default_str();
    cmd->add_option("--pen-up-z", cfg.header.pen_up_z, "Pen-up height (mm)")
        ->capture_default_str();
    cmd->add_option("--pen-down-z", cfg.header.pen_down_z,
                    "Pen-down height (mm)")
        ->capture_default_str();
    cmd->add_option("--draw-feed", cfg.header.draw_feed,
                    "Drawing feed rate (mm/s)")
        ->capture_default_str();
    cmd->add_option("--travel-feed", cfg.header.travel_feed,
                    "Pen-up travel feed rate (mm/s)")
        ->capture_default_str();
    cmd->add_option("--continuity-threshold", cfg.continuity_threshold_mm,
                    "Stroke length counted as continuous in the report (mm)")
        ->capture_default_str();
    cmd->add_option("--lift-seconds", cfg.lift_seconds,
                    "Time cost charged per pen lift (s)")
        ->capture_default_str();
    cmd->add_option("--seed", cfg.seed,
                    "Random seed recorded with the run (tracing itself is "
                    "deterministic)")
        ->capture_default_str();
}

void print_summary(const PipelineResult& result) {
    std::printf(
        "strokes %d  ink %.2f mm  travel %.2f mm  estimated %.2f s\n",
        result.report.stroke_count, result.report.total_ink_mm,
        result.report.total_travel_mm, result.report.estimated_draw_seconds);
}

json parse_json_input(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string(what) + ": invalid JSON: " + e.what());
    }
}

struct TrainToyArgs {
    std::string dataset_path;
    std::string out_dir = "out";
    double step_size = 1e-3;
    std::uint64_t seed = 1;
    int snapshot_every = 100;
    int schedule_T = 10;
    int cond_dim = 16;
    bool detached = false;
};

LossWeights weights_from_json(const json& j, const std::string& tag) {
    LossWeights lw;
    try {
        if (j.contains("lambda1")) lw.lambda1 = j.at("lambda1").get<double>();
        if (j.contains("lambda2")) lw.lambda2 = j.at("lambda2").get<double>();
        if (j.contains("w_t")) lw.w_t = j.at("w_t").get<double>();
        if (j.contains("w_t_prime"))
            lw.w_t_prime = j.at("w_t_prime").get<double>();
    } catch (const json::exception& e) {
        throw InputError(tag + ": " + e.what());
    }
    return lw;
}

void run_train_toy(const TrainToyArgs& args) {
    json j = parse_json_input(read_text_file(args.dataset_path), "dataset");
    require_input(j.is_object() && j.contains("pairs"),
                  "dataset: requires a pairs array");
    const json& jpairs = j.at("pairs");
    require_input(jpairs.is_array() && !jpairs.empty(),
                  "dataset: pairs must be a non-empty array");

    int cond_dim = args.cond_dim;
    if (j.contains("cond_dim")) cond_dim = j.at("cond_dim").get<int>();

    std::vector<TrainingPair> dataset;
    int image_dim = 0;
    for (size_t i = 0; i < jpairs.size(); ++i) {
        const json& jp = jpairs[i];
        std::string tag = "dataset pair " + std::to_string(i);
        require_input(jp.is_object() && jp.contains("x_style") &&
                          jp.contains("x_reg"),
                      tag + ": requires x_style and x_reg");
        TrainingPair pair;
        try {
            pair.x_style = jp.at("x_style").get<std::vector<double>>();
            pair.x_reg = jp.at("x_reg").get<std::vector<double>>();
            if (jp.contains("tokens")) {
                auto tokens = jp.at("tokens").get<std::vector<std::string>>();
                pair.c_style = encode_prompt(tokens, true, cond_dim);
                pair.c_reg = encode_prompt(tokens, false, cond_dim);
            } else {
                pair.c_style = jp.at("c_style").get<std::vector<double>>();
                pair.c_reg = jp.at("c_reg").get<std::vector<double>>();
            }
        } catch (const json::exception& e) {
            throw InputError(tag + ": " + e.what());
        }
        if (i == 0) image_dim = static_cast<int>(pair.x_style.size());
        require_input(static_cast<int>(pair.x_style.size()) == image_dim &&
                          static_cast<int>(pair.x_reg.size()) == image_dim,
                      tag + ": image dimensions differ across the dataset");
        require_input(static_cast<int>(pair.c_style.size()) == cond_dim &&
                          static_cast<int>(pair.c_reg.size()) == cond_dim,
                      tag + ": condition dimensions do not match cond_dim");
        dataset.push_back(std::move(pair));
    }
    require_input(image_dim >= 1, "dataset: empty image vectors");

    std::vector<SchedulePhase> schedule;
    if (j.contains("schedule")) {
        const json& js = j.at("schedule");
        require_input(js.is_array() && !js.empty(),
                      "dataset: schedule must be a non-empty array");
        for (size_t i = 0; i < js.size(); ++i) {
            const json& ph = js[i];
            std::string tag = "dataset schedule phase " + std::to_string(i);
            require_input(ph.is_object() && ph.contains("first") &&
                              ph.contains("last"),
                          tag + ": requires first and last iteration");
            SchedulePhase phase;
            try {
                phase.first_iteration = ph.at("first").get<int>();
                phase.last_iteration = ph.at("last").get<int>();
            } catch (const json::exception& e) {
                throw InputError(tag + ": " + e.what());
            }
            phase.weights = weights_from_json(ph, tag);
            schedule.push_back(phase);
        }
    } else {
        schedule = default_schedule();
    }

    AffineDenoiser den(image_dim, cond_dim);
    FineTuneOptions options;
    options.step_size = args.step_size;
    options.seed = args.seed;
    options.snapshot_every = args.snapshot_every;
    options.through_generation = !args.detached;

    NoiseSchedule sched = NoiseSchedule::linear(args.schedule_T);
    FineTuneResult result = fine_tune(den, dataset, sched, schedule, options);

    std::error_code ec;
    std::filesystem::create_directories(args.out_dir, ec);
    require_input(!ec, "cannot create output directory " + args.out_dir);
    write_file_atomic(args.out_dir + "/loss.csv",
                      loss_curve_to_csv(result.curve));
    json theta_out{{"image_dim", image_dim},
                   {"cond_dim", cond_dim},
                   {"theta", den.theta()}};
    write_file_atomic(args.out_dir + "/theta.json", theta_out.dump(2) + "\n");

    std::printf("iterations %d  final loss %.6g\n",
                result.curve.back().iteration, result.curve.back().l_tot);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "inkline: traces raster line art into plotter-ready Bezier strokes "
        "and motion programs, with desk-scale adapter-merge and pair-wise "
        "fine-tuning utilities"};
    app.require_subcommand(1);

    // ------------------------------------------------------------- trace
    PipelineConfig trace_cfg;
    trace_cfg.output_dir = "out";
    std::string trace_input;
    std::string trace_binarize = "otsu";
    int trace_threshold = 128;
    auto* trace = app.add_subcommand(
        "trace", "Trace a raster image into SVG, motion program and report");
    trace->set_config("--config", "",
                      "TOML-style key=value config file; command-line flags "
                      "take precedence");
    trace->add_option("input", trace_input, "Input image (PGM, or PNG if built with libpng)")
        ->required();
    trace->add_option("--binarize", trace_binarize,
                      "Threshold selection: otsu or fixed")
        ->check(CLI::IsMember({"otsu", "fixed"}))
        ->capture_default_str();
    trace->add_option("--threshold", trace_threshold,
                      "Fixed binarization threshold (ink is <= threshold)")
        ->check(CLI::Range(0, 255))
        ->capture_default_str();
    trace->add_flag("--thinning,!--no-thinning", trace_cfg.thinning,
                    "Thin the ink mask to 1-px skeleton before tracing")
        ->capture_default_str();
    trace->add_option("--max-turn-deg", trace_cfg.max_turn_deg,
                      "Largest turn continued through a junction (degrees)")
        ->capture_default_str();
    trace->add_option("--min-path-px", trace_cfg.min_path_px,
                      "Discard pixel paths shorter than this")
        ->capture_default_str();
    trace->add_option("--tangent-window", trace_cfg.tangent_window,
                      "Chain pixels used to estimate junction tangents")
        ->capture_default_str();
    trace->add_option("--mm-per-pixel", trace_cfg.mm_per_pixel,
                      "Workspace millimeters per image pixel")
        ->capture_default_str();
    trace->add_option("--origin-x", trace_cfg.origin.x,
                      "Workspace x of the image's left edge (mm)")
        ->capture_default_str();
    trace->add_option("--origin-y", trace_cfg.origin.y,
                      "Workspace y of the image's bottom edge (mm)")
        ->capture_default_str();
    trace->add_flag("--flip-y,!--no-flip-y", trace_cfg.flip_y,
                    "Map image rows bottom-up into workspace y")
        ->capture_default_str();
    trace->add_option("--rdp-epsilon", trace_cfg.rdp_epsilon,
                      "Polyline simplification tolerance in mm (0 disables)")
        ->capture_default_str();
    trace->add_option("--max-err", trace_cfg.fit_max_err,
                      "Maximum curve fitting deviation (mm)")
        ->capture_default_str();
    trace->add_option("--corner-deg", trace_cfg.corner_deg,
                      "Interior angles sharper than this become corners")
        ->capture_default_str();
    add_output_options(trace, trace_cfg);
    trace->callback([&] {
        trace_cfg.input_path = trace_input;
        trace_cfg.binarize = trace_binarize == "otsu"
                                 ? BinarizePolicy::otsu()
                                 : BinarizePolicy::fixed(trace_threshold);
        GrayRaster image = read_input_image(trace_cfg.input_path);
        PipelineResult result = trace_image(image, trace_cfg);
        write_outputs(result, trace_cfg);
        print_summary(result);
    });

    // -------------------------------------------------------------- plan
    PipelineConfig plan_cfg;
    plan_cfg.output_dir = "out";
    std::string plan_input;
    auto* plan = app.add_subcommand(
        "plan", "Plan and serialize strokes from an existing SVG");
    plan->set_config("--config", "",
                     "TOML-style key=value config file; command-line flags "
                     "take precedence");
    plan->add_option("input", plan_input, "Input SVG (M/C/L/Z path subset)")
        ->required();
    add_output_options(plan, plan_cfg);
    plan->callback([&] {
        std::vector<Stroke> strokes = parse_svg(read_text_file(plan_input));
        PipelineResult result = plan_strokes(std::move(strokes), plan_cfg);
        write_outputs(result, plan_cfg);
        print_summary(result);
    });

    // -------------------------------------------------------- merge-lora
    std::string merge_input_path;
    std::string merge_out = "merged.json";
    auto* merge = app.add_subcommand(
        "merge-lora",
        "Fold weighted low-rank adapters into a base matrix (JSON in/out)");
    merge->add_option("input", merge_input_path,
                      "JSON with {base, adapters:[{adapter:{B,A,rank}, "
                      "weight}]}")
        ->required();
    merge->add_option("-o,--out", merge_out, "Output JSON path for the merged matrix")
        ->capture_default_str();
    merge->callback([&] {
        MergeInput input = merge_input_from_json(read_text_file(merge_input_path));
        Matrix merged = merge_lora(input.base, input.spec);
        write_file_atomic(merge_out, matrix_to_json(merged));
        std::printf("merged %d x %d matrix with %zu adapter(s)\n", merged.rows,
                    merged.cols, input.spec.items.size());
    });

    // --------------------------------------------------------- train-toy
    TrainToyArgs train_args;
    auto* train = app.add_subcommand(
        "train-toy",
        "Fine-tune the affine toy denoiser on a paired dataset (JSON)");
    train->add_option("dataset", train_args.dataset_path,
                      "Dataset JSON with pairs of style/regularization "
                      "images and prompts")
        ->required();
    train->add_option("-o,--out-dir", train_args.out_dir,
                      "Output directory for loss.csv and theta.json")
        ->capture_default_str();
    train->add_option("--step-size", train_args.step_size,
                      "Gradient descent step size")
        ->capture_default_str();
    train->add_option("--seed", train_args.seed, "Sampling seed")
        ->capture_default_str();
    train->add_option("--snapshot-every", train_args.snapshot_every,
                      "Record parameters every N iterations")
        ->capture_default_str();
    train->add_option("--timesteps", train_args.schedule_T,
                      "Noise schedule length T")
        ->capture_default_str();
    train->add_option("--cond-dim", train_args.cond_dim,
                      "Condition dimension when prompts are encoded from "
                      "tokens")
        ->capture_default_str();
    train->add_flag("--detached", train_args.detached,
                    "Treat generated images as constants in the "
                    "consistency-loss gradient");
    train->callback([&] { run_train_toy(train_args); });

    // ------------------------------------------------------------ compare
    std::string compare_a;
    std::string compare_b;
    std::string compare_json_out;
    auto* compare = app.add_subcommand(
        "compare", "Compare two run reports field by field");
    compare->add_option("report_a", compare_a, "Baseline report.json")->required();
    compare->add_option("report_b", compare_b, "Candidate report.json")->required();
    compare->add_option("--json", compare_json_out,
                        "Also write the delta table as JSON to this path");
    compare->callback([&] {
        VectorFriendlinessReport a = report_from_json(read_text_file(compare_a));
        VectorFriendlinessReport b = report_from_json(read_text_file(compare_b));
        DeltaTable table = compare_runs(a, b);
        std::fputs(delta_table_to_text(table).c_str(), stdout);
        if (!compare_json_out.empty())
            write_file_atomic(compare_json_out, delta_table_to_json(table));
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const inkline::InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const inkline::InvariantError& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 2;
    }
    return 0;
}
