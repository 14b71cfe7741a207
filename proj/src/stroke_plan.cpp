#include "inkline/stroke_plan.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "inkline/errors.hpp"
#include "inkline/stroke_fit.hpp"

namespace inkline {

namespace {

void validate_items(const std::vector<Stroke>& strokes,
                    const std::vector<PlanItem>& items) {
    std::vector<char> seen(strokes.size(), 0);
    for (const PlanItem& item : items) {
        require_input(item.stroke >= 0 &&
                          item.stroke < static_cast<int>(strokes.size()),
                      "plan refers to stroke index " +
                          std::to_string(item.stroke) + " but only " +
                          std::to_string(strokes.size()) + " strokes exist");
        require_invariant(!seen[static_cast<size_t>(item.stroke)],
                          "plan visits stroke " + std::to_string(item.stroke) +
                              " more than once");
        seen[static_cast<size_t>(item.stroke)] = 1;
    }
}

double ink_total(const std::vector<Stroke>& strokes) {
    double total = 0.0;
    for (const Stroke& s : strokes) total += stroke_length(s);
    return total;
}

}  // namespace

StrokePlan plan_from_items(const std::vector<Stroke>& strokes, Vec2 start,
                           std::vector<PlanItem> items) {
    validate_items(strokes, items);
    StrokePlan plan;
    plan.start = start;
    plan.items = std::move(items);
    plan.travel.reserve(plan.items.size());
    Vec2 pos = start;
    for (const PlanItem& item : plan.items) {
        const Stroke& s = strokes[static_cast<size_t>(item.stroke)];
        Vec2 entry = entry_point(s, item.reversed);
        plan.travel.push_back({pos, entry});
        plan.total_travel += dist(pos, entry);
        pos = exit_point(s, item.reversed);
    }
    plan.total_ink = ink_total(strokes);
    return plan;
}

StrokePlan greedy_plan(const std::vector<Stroke>& strokes, Vec2 start) {
    const int n = static_cast<int>(strokes.size());
    std::vector<char> visited(strokes.size(), 0);
    std::vector<PlanItem> items;
    items.reserve(strokes.size());
    Vec2 pos = start;
    for (int step = 0; step < n; ++step) {
        int best = -1;
        bool best_rev = false;
        double best_d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            if (visited[static_cast<size_t>(i)]) continue;
            const Stroke& s = strokes[static_cast<size_t>(i)];
            // Forward first so that on exact ties the lower index wins,
            // then forward orientation.
            double df = dist(pos, entry_point(s, false));
            if (df < best_d) {
                best_d = df;
                best = i;
                best_rev = false;
            }
            double dr = dist(pos, entry_point(s, true));
            if (dr < best_d) {
                best_d = dr;
                best = i;
                best_rev = true;
            }
        }
        visited[static_cast<size_t>(best)] = 1;
        items.push_back({best, best_rev});
        pos = exit_point(strokes[static_cast<size_t>(best)], best_rev);
    }
    return plan_from_items(strokes, start, std::move(items));
}

StrokePlan two_opt_improve(const StrokePlan& plan,
                           const std::vector<Stroke>& strokes,
                           int max_passes) {
    require_input(max_passes >= 0, "max_passes must be non-negative");
    validate_items(strokes, plan.items);
    const int n = static_cast<int>(plan.items.size());
    if (n < 1) return plan_from_items(strokes, plan.start, plan.items);

    std::vector<PlanItem> items = plan.items;
    auto entry_of = [&](const PlanItem& it) {
        return entry_point(strokes[static_cast<size_t>(it.stroke)],
                           it.reversed);
    };
    auto exit_of = [&](const PlanItem& it) {
        return exit_point(strokes[static_cast<size_t>(it.stroke)],
                          it.reversed);
    };
    // Pen position feeding the gap before item i.
    auto anchor_before = [&](int i) {
        return i == 0 ? plan.start : exit_of(items[static_cast<size_t>(i - 1)]);
    };

    // Reversing items[i..j] and flipping each member keeps every interior
    // gap length (Euclidean distance is symmetric); only the gap entering
    // the block and the gap leaving it change.
    constexpr double kImprove = 1e-12;
    for (int pass = 0; pass < max_passes; ++pass) {
        bool improved = false;
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                Vec2 before = anchor_before(i);
                double old_in = dist(before, entry_of(items[static_cast<size_t>(i)]));
                double new_in = dist(before, exit_of(items[static_cast<size_t>(j)]));
                double old_out = 0.0;
                double new_out = 0.0;
                if (j + 1 < n) {
                    Vec2 after = entry_of(items[static_cast<size_t>(j + 1)]);
                    old_out = dist(exit_of(items[static_cast<size_t>(j)]), after);
                    new_out = dist(entry_of(items[static_cast<size_t>(i)]), after);
                }
                double delta = (new_in + new_out) - (old_in + old_out);
                if (delta < -kImprove) {
                    std::reverse(items.begin() + i, items.begin() + j + 1);
                    for (int k = i; k <= j; ++k)
                        items[static_cast<size_t>(k)].reversed =
                            !items[static_cast<size_t>(k)].reversed;
                    validate_items(strokes, items);
                    improved = true;
                }
            }
        }
        if (!improved) break;
    }
    return plan_from_items(strokes, plan.start, std::move(items));
}

double travel_cost(const StrokePlan& plan,
                   const std::vector<Stroke>& strokes) {
    validate_items(strokes, plan.items);
    double total = 0.0;
    Vec2 pos = plan.start;
    for (const PlanItem& item : plan.items) {
        const Stroke& s = strokes[static_cast<size_t>(item.stroke)];
        total += dist(pos, entry_point(s, item.reversed));
        pos = exit_point(s, item.reversed);
    }
    return total;
}

}  // namespace inkline
