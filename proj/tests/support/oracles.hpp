#pragma once

// Independent oracles used to verify the library against brute force:
// dense-sampling curve deviation, exhaustive travel planning, and central
// finite differences. Deliberately slow and obvious.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "inkline/geometry.hpp"
#include "inkline/stroke_plan.hpp"

namespace inkline::test {

inline std::vector<Vec2> sample_stroke(const Stroke& s, int per_segment) {
    std::vector<Vec2> out;
    out.reserve(s.segments.size() * (per_segment + 1));
    for (const CubicBezier& seg : s.segments) {
        for (int i = 0; i <= per_segment; ++i) {
            out.push_back(seg.eval(static_cast<double>(i) / per_segment));
        }
    }
    return out;
}

// Max over `points` of the distance to the nearest curve sample.
inline double deviation_to_stroke(const std::vector<Vec2>& points,
                                  const Stroke& s, int per_segment = 1000) {
    const std::vector<Vec2> samples = sample_stroke(s, per_segment);
    double worst = 0.0;
    for (const Vec2& p : points) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec2& q : samples) {
            best = std::min(best, dist(p, q));
        }
        worst = std::max(worst, best);
    }
    return worst;
}

// Max over the original points of the perpendicular distance to the
// simplified chain (point-to-segment, exact).
inline double deviation_to_polyline(const std::vector<Vec2>& points,
                                    const Polyline& chain) {
    double worst = 0.0;
    const std::size_t n = chain.points.size();
    for (const Vec2& p : points) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            best = std::min(
                best, point_segment_distance(p, chain.points[i],
                                             chain.points[i + 1]));
        }
        if (chain.closed && n >= 2) {
            best = std::min(best, point_segment_distance(p, chain.points[n - 1],
                                                         chain.points[0]));
        }
        worst = std::max(worst, best);
    }
    return worst;
}

// Exhaustive minimum pen-up travel over all n! orders and 2^n orientations.
// Usable up to n = 8.
inline double brute_force_best_travel(const std::vector<Stroke>& strokes,
                                      Vec2 start) {
    const int n = static_cast<int>(strokes.size());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    double best = std::numeric_limits<double>::infinity();
    if (n == 0) return 0.0;
    do {
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            double travel = 0.0;
            Vec2 pos = start;
            for (int k = 0; k < n; ++k) {
                const bool rev = (mask >> k) & 1u;
                const Stroke& s = strokes[order[k]];
                travel += dist(pos, entry_point(s, rev));
                pos = exit_point(s, rev);
            }
            best = std::min(best, travel);
        }
    } while (std::next_permutation(order.begin(), order.end()));
    return best;
}

// Exact minimum travel by dynamic programming over (visited set, last
// stroke, orientation). Handles n up to ~16; cross-checked against the
// factorial enumeration above on small instances.
inline double best_travel_dp(const std::vector<Stroke>& strokes, Vec2 start) {
    const int n = static_cast<int>(strokes.size());
    if (n == 0) return 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dp(static_cast<std::size_t>(1 << n) * n * 2, inf);
    auto idx = [&](int mask, int i, int o) {
        return (static_cast<std::size_t>(mask) * n + i) * 2 + o;
    };
    for (int i = 0; i < n; ++i)
        for (int o = 0; o < 2; ++o)
            dp[idx(1 << i, i, o)] =
                dist(start, entry_point(strokes[static_cast<std::size_t>(i)],
                                        o != 0));
    for (int mask = 1; mask < (1 << n); ++mask)
        for (int i = 0; i < n; ++i) {
            if (!(mask & (1 << i))) continue;
            for (int o = 0; o < 2; ++o) {
                const double cur = dp[idx(mask, i, o)];
                if (cur == inf) continue;
                const Vec2 exit =
                    exit_point(strokes[static_cast<std::size_t>(i)], o != 0);
                for (int j = 0; j < n; ++j) {
                    if (mask & (1 << j)) continue;
                    for (int p = 0; p < 2; ++p) {
                        const double cand =
                            cur +
                            dist(exit,
                                 entry_point(
                                     strokes[static_cast<std::size_t>(j)],
                                     p != 0));
                        double& slot = dp[idx(mask | (1 << j), j, p)];
                        if (cand < slot) slot = cand;
                    }
                }
            }
        }
    double best = inf;
    for (int i = 0; i < n; ++i)
        for (int o = 0; o < 2; ++o)
            best = std::min(best, dp[idx((1 << n) - 1, i, o)]);
    return best;
}

// Central finite differences of a scalar function over a flat parameter
// vector.
inline std::vector<double> central_fd_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> theta, double h = 1e-5) {
    std::vector<double> g(theta.size(), 0.0);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double keep = theta[i];
        theta[i] = keep + h;
        const double up = f(theta);
        theta[i] = keep - h;
        const double down = f(theta);
        theta[i] = keep;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

// Relative per-coordinate gradient error with an absolute floor for
// near-zero coordinates.
inline double max_relative_error(const std::vector<double>& got,
                                 const std::vector<double>& want,
                                 double floor_abs = 1e-7) {
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        const double denom = std::max(std::abs(want[i]), floor_abs);
        worst = std::max(worst, std::abs(got[i] - want[i]) / denom);
    }
    return worst;
}

}  // namespace inkline::test
