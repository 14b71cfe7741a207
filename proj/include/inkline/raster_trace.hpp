#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <vector>

#include "inkline/raster.hpp"

namespace inkline {

struct PixelCoord {
    int x = 0;
    int y = 0;
    auto operator<=>(const PixelCoord&) const = default;
};

enum class NodeKind { endpoint, junction, isolated };

// A graph node owns one or more skeleton pixels (junction clusters own
// several). `position` is the representative pixel: the pixel itself for
// single-pixel nodes, the centroid rounded to the nearest owned pixel for
// clusters.
struct SkeletonNode {
    PixelCoord position;
    NodeKind kind = NodeKind::endpoint;
    std::vector<PixelCoord> pixels;
};

// chain runs from a pixel owned by node_a to a pixel owned by node_b; the
// interior pixels between them are owned by this edge alone.
struct SkeletonEdge {
    int node_a = -1;
    int node_b = -1;
    std::vector<PixelCoord> chain;
};

struct SkeletonGraph {
    int width = 0;
    int height = 0;
    std::vector<SkeletonNode> nodes;
    std::vector<SkeletonEdge> edges;
    // Closed pixel chains touching no node; each starts at its
    // lexicographically smallest pixel (ordered by (x, y)).
    std::vector<std::vector<PixelCoord>> cycles;
};

// Ordered pixel chain: consecutive points are 8-connected. A closed path's
// last point is 8-connected to (but does not repeat) its first. An isolated
// ink dot is a single-point path with is_dot set.
struct PixelPath {
    std::vector<PixelCoord> points;
    bool closed = false;
    bool is_dot = false;
};

struct BinarizePolicy {
    enum class Kind { fixed, otsu };
    Kind kind = Kind::otsu;
    int threshold = 128;  // used by Kind::fixed only

    static BinarizePolicy fixed(int threshold) {
        return {Kind::fixed, threshold};
    }
    static BinarizePolicy otsu() { return {Kind::otsu, 0}; }
};

// 256-bin intensity histogram.
std::array<std::uint64_t, 256> histogram256(const GrayRaster& image);

// Threshold maximizing inter-class variance; when several thresholds tie
// (including the all-zero-variance uniform image, whose plateau spans
// 0..255), the plateau midpoint is returned, so a uniform image yields 127.
int otsu_threshold(const std::array<std::uint64_t, 256>& histogram);

// A pixel is ink iff its intensity <= threshold (ink is dark).
BinaryRaster binarize(const GrayRaster& image, const BinarizePolicy& policy);

// Zhang-Suen iterative thinning (two sub-iterations per pass, snapshot
// marking) with two connectivity safeguards:
//   - an isolated 2x2 block that would be erased in one sub-iteration keeps
//     its top-left pixel (plain Zhang-Suen deletes all four, dropping an
//     8-connected component);
//   - leftover solid 2x2 blocks (rare staircase fixpoints) are broken by
//     deleting a block pixel whose foreground neighbours form a single
//     8-connected component, which provably preserves the component count;
//     the Zhang-Suen loop then reruns until a joint fixpoint is reached.
// Result: output foreground is a subset of the input, the 8-connected
// component count is preserved, and no pixel is Zhang-Suen deletable.
BinaryRaster thin(const BinaryRaster& raster);

// Classifies skeleton pixels by 8-neighbour count (0 isolated, 1 endpoint,
// 2 chain interior, >= 3 junction), merges adjacent junction pixels into
// cluster nodes, traces edge chains between nodes, and records node-free
// closed chains as cycles. Junction clusters that end up with fewer than
// three incident edge ends are demoted: degree 2 dissolves into a through
// chain (bridged across the cluster), degree 1 becomes an endpoint node,
// degree 0 an isolated node. Rejects non-thinned input (any solid 2x2
// foreground block) with a diagnostic naming the offending pixel.
SkeletonGraph build_skeleton_graph(const BinaryRaster& skeleton);

// Walks the graph into maximal pixel paths. At each junction, incident edge
// ends are greedily paired by smallest turning angle (arrival tangents
// estimated over the last `tangent_window` chain pixels; a pair is eligible
// when its turn is <= max_turn_deg, boundary inclusive within numerical
// tolerance, and never joins the two ends of the same edge), then polished
// by 2-swaps that reduce total turning angle; paired edges continue through
// the junction as one path. Cycles become closed paths starting at their
// lexicographically smallest pixel; self-loop edges whose ends stay unpaired
// also close on themselves; isolated nodes become single-point dot paths.
// Paths with fewer than min_path_px pixels are discarded as noise.
std::vector<PixelPath> extract_paths(const SkeletonGraph& graph,
                                     double max_turn_deg, int min_path_px,
                                     int tangent_window = 5);

}  // namespace inkline
