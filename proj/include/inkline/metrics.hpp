#pragma once

#include <string>
#include <vector>

#include "inkline/program_emit.hpp"
#include "inkline/stroke_plan.hpp"

namespace inkline {

// Quantifies how friendly a traced drawing is to a pen plotter: few, long,
// continuous strokes with little pen-up travel.
struct VectorFriendlinessReport {
    int stroke_count = 0;
    double total_ink_mm = 0.0;
    double total_travel_mm = 0.0;
    double mean_segments_per_stroke = 0.0;
    double mean_stroke_length_mm = 0.0;
    // Fraction of ink length carried by strokes at least threshold long;
    // 1.0 by convention when there is no ink.
    double continuity_score = 1.0;
    double estimated_draw_seconds = 0.0;
};

// estimated_draw_seconds = ink/draw_feed + travel/travel_feed +
// pen_lifts * lift_seconds, with pen_lifts = items + 1 for a non-empty plan
// (initial and final PENUP pair counted once) and 0 for an empty one.
VectorFriendlinessReport compute_metrics(const StrokePlan& plan,
                                         const std::vector<Stroke>& strokes,
                                         const ProgramHeader& header,
                                         double continuity_threshold_mm = 10.0,
                                         double lift_seconds = 0.3);

std::string report_to_json(const VectorFriendlinessReport& report);
VectorFriendlinessReport report_from_json(const std::string& text);

// Per-field comparison between two runs: delta = b - a, ratio = b / a
// (ratio undefined when a = 0 and b != 0).
struct DeltaRow {
    std::string field;
    double a = 0.0;
    double b = 0.0;
    double delta = 0.0;
    double ratio = 0.0;
    bool ratio_defined = true;
};

struct DeltaTable {
    std::vector<DeltaRow> rows;
};

DeltaTable compare_runs(const VectorFriendlinessReport& a,
                        const VectorFriendlinessReport& b);

std::string delta_table_to_json(const DeltaTable& table);
std::string delta_table_to_text(const DeltaTable& table);

}  // namespace inkline
