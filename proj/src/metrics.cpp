#include "inkline/metrics.hpp"

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "inkline/errors.hpp"
#include "inkline/stroke_fit.hpp"

namespace inkline {

namespace {

using nlohmann::json;

}  // namespace

VectorFriendlinessReport compute_metrics(const StrokePlan& plan,
                                         const std::vector<Stroke>& strokes,
                                         const ProgramHeader& header,
                                         double continuity_threshold_mm,
                                         double lift_seconds) {
    require_input(header.draw_feed > 0.0 && header.travel_feed > 0.0,
                  "compute_metrics: feeds must be positive");
    require_input(continuity_threshold_mm >= 0.0,
                  "compute_metrics: continuity threshold must be non-negative");
    require_input(lift_seconds >= 0.0,
                  "compute_metrics: lift cost must be non-negative");

    VectorFriendlinessReport r;
    r.stroke_count = static_cast<int>(plan.items.size());
    if (plan.items.empty()) {
        return r;  // all zero; continuity vacuously 1.0
    }

    double total_ink = 0.0;
    double long_ink = 0.0;
    size_t total_segments = 0;
    for (const PlanItem& item : plan.items) {
        require_input(item.stroke >= 0 &&
                          item.stroke < static_cast<int>(strokes.size()),
                      "compute_metrics: plan references a missing stroke");
        const Stroke& s = strokes[static_cast<size_t>(item.stroke)];
        double len = stroke_length(s);
        total_ink += len;
        if (len >= continuity_threshold_mm) long_ink += len;
        total_segments += s.segments.size();
    }

    r.total_ink_mm = total_ink;
    r.total_travel_mm = plan.total_travel;
    r.mean_segments_per_stroke =
        static_cast<double>(total_segments) / static_cast<double>(plan.items.size());
    r.mean_stroke_length_mm = total_ink / static_cast<double>(plan.items.size());
    r.continuity_score = total_ink > 0.0 ? long_ink / total_ink : 1.0;
    int pen_lifts = static_cast<int>(plan.items.size()) + 1;
    r.estimated_draw_seconds = total_ink / header.draw_feed +
                               plan.total_travel / header.travel_feed +
                               static_cast<double>(pen_lifts) * lift_seconds;
    require_invariant(r.continuity_score >= 0.0 && r.continuity_score <= 1.0,
                      "compute_metrics: continuity score out of [0,1]");
    return r;
}

std::string report_to_json(const VectorFriendlinessReport& report) {
    json j{
        {"stroke_count", report.stroke_count},
        {"total_ink_mm", report.total_ink_mm},
        {"total_travel_mm", report.total_travel_mm},
        {"mean_segments_per_stroke", report.mean_segments_per_stroke},
        {"mean_stroke_length_mm", report.mean_stroke_length_mm},
        {"continuity_score", report.continuity_score},
        {"estimated_draw_seconds", report.estimated_draw_seconds},
    };
    return j.dump(2) + "\n";
}

VectorFriendlinessReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("report: invalid JSON: ") + e.what());
    }
    require_input(j.is_object(), "report: expected a JSON object");
    VectorFriendlinessReport r;
    try {
        r.stroke_count = j.at("stroke_count").get<int>();
        r.total_ink_mm = j.at("total_ink_mm").get<double>();
        r.total_travel_mm = j.at("total_travel_mm").get<double>();
        r.mean_segments_per_stroke =
            j.at("mean_segments_per_stroke").get<double>();
        r.mean_stroke_length_mm = j.at("mean_stroke_length_mm").get<double>();
        r.continuity_score = j.at("continuity_score").get<double>();
        r.estimated_draw_seconds = j.at("estimated_draw_seconds").get<double>();
    } catch (const json::exception& e) {
        throw InputError(std::string("report: ") + e.what());
    }
    return r;
}

namespace {

DeltaRow make_row(const char* field, double a, double b) {
    DeltaRow row;
    row.field = field;
    row.a = a;
    row.b = b;
    row.delta = b - a;
    if (a != 0.0) {
        row.ratio = b / a;
        row.ratio_defined = true;
    } else if (b == 0.0) {
        row.ratio = 1.0;  // 0 -> 0: unchanged
        row.ratio_defined = true;
    } else {
        row.ratio = 0.0;
        row.ratio_defined = false;
    }
    return row;
}

}  // namespace

DeltaTable compare_runs(const VectorFriendlinessReport& a,
                        const VectorFriendlinessReport& b) {
    DeltaTable t;
    t.rows.push_back(make_row("stroke_count",
                              static_cast<double>(a.stroke_count),
                              static_cast<double>(b.stroke_count)));
    t.rows.push_back(make_row("total_ink_mm", a.total_ink_mm, b.total_ink_mm));
    t.rows.push_back(
        make_row("total_travel_mm", a.total_travel_mm, b.total_travel_mm));
    t.rows.push_back(make_row("mean_segments_per_stroke",
                              a.mean_segments_per_stroke,
                              b.mean_segments_per_stroke));
    t.rows.push_back(make_row("mean_stroke_length_mm", a.mean_stroke_length_mm,
                              b.mean_stroke_length_mm));
    t.rows.push_back(
        make_row("continuity_score", a.continuity_score, b.continuity_score));
    t.rows.push_back(make_row("estimated_draw_seconds",
                              a.estimated_draw_seconds,
                              b.estimated_draw_seconds));
    return t;
}

std::string delta_table_to_json(const DeltaTable& table) {
    json rows = json::array();
    for (const DeltaRow& row : table.rows) {
        json r{{"field", row.field},
               {"a", row.a},
               {"b", row.b},
               {"delta", row.delta}};
        if (row.ratio_defined)
            r["ratio"] = row.ratio;
        else
            r["ratio"] = nullptr;
        rows.push_back(r);
    }
    return json{{"fields", rows}}.dump(2) + "\n";
}

std::string delta_table_to_text(const DeltaTable& table) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-26s %14s %14s %14s %10s\n", "field", "a",
                  "b", "delta", "ratio");
    out += buf;
    for (const DeltaRow& row : table.rows) {
        if (row.ratio_defined) {
            std::snprintf(buf, sizeof(buf), "%-26s %14.4f %14.4f %14.4f %10.4f\n",
                          row.field.c_str(), row.a, row.b, row.delta, row.ratio);
        } else {
            std::snprintf(buf, sizeof(buf), "%-26s %14.4f %14.4f %14.4f %10s\n",
                          row.field.c_str(), row.a, row.b, row.delta, "n/a");
        }
        out += buf;
    }
    return out;
}

}  // namespace inkline
