#pragma once

#include "inkline/geometry.hpp"
#include "inkline/raster_trace.hpp"

namespace inkline {

// Result of mapping a pixel path into millimeter workspace coordinates.
// Normal paths fill `line`; an isolated ink dot collapses to a single
// marker position that the planner later stamps as a pen dot.
struct WorkspacePath {
    Polyline line;
    Vec2 dot;
    bool is_dot = false;
};

// Affine pixel-to-millimeter map: x -> origin.x + px * scale, and
// y -> origin.y + py * scale, or origin.y + (image_height - 1 - py) * scale
// when flip_y is set. Consecutive points that coincide after mapping are
// collapsed. Rejects paths that collapse below 2 distinct points unless the
// path is an isolated dot.
WorkspacePath to_workspace(const PixelPath& path, double scale, Vec2 origin,
                           bool flip_y, int image_height);

// Ramer-Douglas-Peucker simplification. Every removed point lies within
// epsilon (perpendicular distance) of the simplified polyline; endpoints are
// preserved. A closed polyline is split at the point farthest from its start,
// both halves are simplified, and the result is rejoined.
Polyline simplify(const Polyline& line, double epsilon);

// Least-squares cubic fitting: chord-length parameterization,
// endpoint-tangent-constrained least squares for the inner control points,
// up to 4 Newton-Raphson reparameterization rounds, and a split at the
// max-error point when the tolerance is still exceeded. The polyline is
// pre-split wherever the interior angle at a vertex is smaller than
// corner_deg (a straight vertex measures 180 degrees), so sharp corners
// become exact segment joints. A closed polyline is seamed at its sharpest
// vertex and produces a closed stroke. A 2-point chain yields one cubic with
// control points at the chord's thirds.
Stroke fit_stroke(const Polyline& line, double max_err, double corner_deg);

// Arc length by adaptive subdivision: a segment is a leaf once its control
// polygon exceeds its chord by less than 1e-6 mm, contributing
// (2 * chord + polygon) / 3.
double stroke_length(const Stroke& s);

}  // namespace inkline
