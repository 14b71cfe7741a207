#pragma once

#include <vector>

#include "inkline/geometry.hpp"

namespace inkline {

struct PlanItem {
    int stroke = 0;
    bool reversed = false;
    bool operator==(const PlanItem&) const = default;
};

struct TravelSegment {
    Vec2 from;
    Vec2 to;
};

// Ordered, oriented drawing sequence. items is a permutation of stroke
// indices; travel holds one pen-up segment per item (from the previous
// oriented exit — or the start position — to the item's entry point).
struct StrokePlan {
    Vec2 start;
    std::vector<PlanItem> items;
    std::vector<TravelSegment> travel;
    double total_travel = 0.0;
    double total_ink = 0.0;
};

// Oriented endpoints: the pen enters a reversed stroke at its geometric end.
inline Vec2 entry_point(const Stroke& s, bool reversed) {
    return reversed ? s.end() : s.start();
}
inline Vec2 exit_point(const Stroke& s, bool reversed) {
    return reversed ? s.start() : s.end();
}

// Rebuilds travel segments and totals for a given visiting order.
StrokePlan plan_from_items(const std::vector<Stroke>& strokes, Vec2 start,
                           std::vector<PlanItem> items);

// Nearest-endpoint greedy ordering: repeatedly pick the unvisited stroke
// whose nearer endpoint is closest to the current pen position, entering at
// that endpoint. Ties prefer the lower stroke index, then forward
// orientation.
StrokePlan greedy_plan(const std::vector<Stroke>& strokes, Vec2 start);

// Open-tour 2-opt with orientation flips: a move reverses a contiguous
// sub-sequence of items and flips each member. Sweeps run in deterministic
// first-improvement order (increasing i, then j), applying improvements
// in place; they stop when a sweep finds no improving move or after
// max_passes sweeps.
StrokePlan two_opt_improve(const StrokePlan& plan,
                           const std::vector<Stroke>& strokes, int max_passes);

// Recomputes total pen-up distance from scratch; equals plan.total_travel
// for any consistently built plan.
double travel_cost(const StrokePlan& plan, const std::vector<Stroke>& strokes);

}  // namespace inkline
