#include "inkline/stroke_fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "inkline/errors.hpp"

namespace inkline {

WorkspacePath to_workspace(const PixelPath& path, double scale, Vec2 origin,
                           bool flip_y, int image_height) {
    require_input(scale > 0.0, "to_workspace: scale must be positive");
    require_input(!path.points.empty(), "to_workspace: empty pixel path");
    if (flip_y) {
        require_input(image_height >= 1,
                      "to_workspace: flip_y needs the image height");
    }
    auto map = [&](PixelCoord p) {
        const double py =
            flip_y ? static_cast<double>(image_height - 1 - p.y)
                   : static_cast<double>(p.y);
        return Vec2{origin.x + p.x * scale, origin.y + py * scale};
    };

    WorkspacePath out;
    if (path.is_dot) {
        out.is_dot = true;
        out.dot = map(path.points.front());
        return out;
    }
    std::vector<Vec2> pts;
    pts.reserve(path.points.size());
    for (const PixelCoord& p : path.points) {
        const Vec2 v = map(p);
        if (pts.empty() || !(v == pts.back())) pts.push_back(v);
    }
    require_input(pts.size() >= 2,
                  "to_workspace: path collapsed below 2 distinct points");
    out.line.points = std::move(pts);
    out.line.closed = path.closed;
    return out;
}

namespace {

void validate_polyline(const Polyline& line, const char* where) {
    require_input(line.points.size() >= 2,
                  std::string(where) + ": polyline needs at least 2 points");
    for (std::size_t i = 1; i < line.points.size(); ++i) {
        require_input(!(line.points[i] == line.points[i - 1]),
                      std::string(where) +
                          ": consecutive duplicate points in polyline");
    }
    if (line.closed) {
        require_input(!(line.points.front() == line.points.back()),
                      std::string(where) +
                          ": closed polyline must not repeat its start");
    }
}

void rdp_mark(const std::vector<Vec2>& pts, std::size_t lo, std::size_t hi,
              double epsilon, std::vector<char>& keep) {
    if (hi <= lo + 1) return;
    double dmax = -1.0;
    std::size_t imax = lo;
    for (std::size_t i = lo + 1; i < hi; ++i) {
        const double d = point_segment_distance(pts[i], pts[lo], pts[hi]);
        if (d > dmax) {
            dmax = d;
            imax = i;
        }
    }
    if (dmax > epsilon) {
        keep[imax] = 1;
        rdp_mark(pts, lo, imax, epsilon, keep);
        rdp_mark(pts, imax, hi, epsilon, keep);
    }
}

std::vector<Vec2> rdp_open(const std::vector<Vec2>& pts, double epsilon) {
    std::vector<char> keep(pts.size(), 0);
    keep.front() = 1;
    keep.back() = 1;
    rdp_mark(pts, 0, pts.size() - 1, epsilon, keep);
    std::vector<Vec2> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (keep[i]) out.push_back(pts[i]);
    }
    return out;
}

}  // namespace

Polyline simplify(const Polyline& line, double epsilon) {
    require_input(epsilon >= 0.0, "simplify: epsilon must be >= 0");
    validate_polyline(line, "simplify");
    const auto& pts = line.points;
    Polyline out;
    out.closed = line.closed;
    if (!line.closed) {
        out.points = rdp_open(pts, epsilon);
        return out;
    }
    // Closed: split at the point farthest from the start, simplify both
    // halves as open chains, and rejoin.
    std::size_t far = 1;
    double dmax = -1.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double d = dist(pts[i], pts[0]);
        if (d > dmax) {
            dmax = d;
            far = i;
        }
    }
    std::vector<Vec2> half_a(pts.begin(), pts.begin() + far + 1);
    std::vector<Vec2> half_b(pts.begin() + far, pts.end());
    half_b.push_back(pts.front());
    const auto simp_a = rdp_open(half_a, epsilon);
    const auto simp_b = rdp_open(half_b, epsilon);
    out.points = simp_a;
    out.points.insert(out.points.end(), simp_b.begin() + 1, simp_b.end() - 1);
    return out;
}

namespace {

Vec2 normalize_dir(Vec2 v) {
    const double n = norm(v);
    return n == 0.0 ? Vec2{0.0, 0.0} : v / n;
}

// Interior angle at a vertex in degrees: 180 on a straight run, smaller as
// the corner sharpens.
double interior_angle_deg(Vec2 prev, Vec2 at, Vec2 next) {
    return angle_between_deg(prev - at, next - at);
}

std::vector<double> chord_length_params(const std::vector<Vec2>& pts,
                                        std::size_t lo, std::size_t hi) {
    std::vector<double> u(hi - lo + 1, 0.0);
    for (std::size_t i = lo + 1; i <= hi; ++i) {
        u[i - lo] = u[i - lo - 1] + dist(pts[i], pts[i - 1]);
    }
    const double total = u.back();
    if (total > 0.0) {
        for (double& v : u) v /= total;
    }
    u.back() = 1.0;
    return u;
}

// Endpoint-tangent-constrained least squares for the two inner control
// points (alpha distances along the end tangents). tan2 points backward,
// from the last point toward the interior.
CubicBezier generate_bezier(const std::vector<Vec2>& pts, std::size_t lo,
                            std::size_t hi, const std::vector<double>& u,
                            Vec2 tan1, Vec2 tan2) {
    const Vec2 first = pts[lo];
    const Vec2 last = pts[hi];
    double c00 = 0.0, c01 = 0.0, c11 = 0.0, x0 = 0.0, x1 = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
        const double t = u[i - lo];
        const double s = 1.0 - t;
        const double b0 = s * s * s;
        const double b1 = 3.0 * s * s * t;
        const double b2 = 3.0 * s * t * t;
        const double b3 = t * t * t;
        const Vec2 a0 = tan1 * b1;
        const Vec2 a1 = tan2 * b2;
        c00 += dot(a0, a0);
        c01 += dot(a0, a1);
        c11 += dot(a1, a1);
        const Vec2 rhs = pts[i] - (first * (b0 + b1) + last * (b2 + b3));
        x0 += dot(a0, rhs);
        x1 += dot(a1, rhs);
    }
    const double det = c00 * c11 - c01 * c01;
    double alpha_l = 0.0;
    double alpha_r = 0.0;
    if (det != 0.0) {
        alpha_l = (x0 * c11 - x1 * c01) / det;
        alpha_r = (c00 * x1 - c01 * x0) / det;
    }
    const double seg_length = dist(first, last);
    const double eps = 1e-6 * seg_length;
    if (alpha_l < eps || alpha_r < eps) {
        alpha_l = alpha_r = seg_length / 3.0;
    }
    return {first, first + tan1 * alpha_l, last + tan2 * alpha_r, last};
}

double max_fit_error(const std::vector<Vec2>& pts, std::size_t lo,
                     std::size_t hi, const CubicBezier& bez,
                     const std::vector<double>& u, std::size_t& split) {
    double dmax = 0.0;
    split = lo + (hi - lo) / 2;
    for (std::size_t i = lo + 1; i < hi; ++i) {
        const double d = dist(bez.eval(u[i - lo]), pts[i]);
        if (d > dmax) {
            dmax = d;
            split = i;
        }
    }
    // The curve must track the whole polyline chain, not just its vertices:
    // between widely spaced points the curve can bow away from the chord even
    // though every vertex is within tolerance. Compare chord midpoints against
    // the curve at the matching parameter fractions; that distance bounds both
    // chain-to-curve and curve-to-chain deviation from above.
    static constexpr double kMidFractions[] = {0.25, 0.5, 0.75};
    for (std::size_t i = lo; i < hi; ++i) {
        const double u0 = u[i - lo];
        const double u1 = u[i + 1 - lo];
        for (const double s : kMidFractions) {
            const Vec2 chain_pt = pts[i] + (pts[i + 1] - pts[i]) * s;
            const Vec2 curve_pt = bez.eval(u0 + (u1 - u0) * s);
            const double d = dist(chain_pt, curve_pt);
            if (d > dmax) {
                dmax = d;
                split = std::clamp<std::size_t>(s >= 0.5 ? i + 1 : i, lo + 1,
                                                hi - 1);
            }
        }
    }
    return dmax;
}

void newton_reparameterize(const std::vector<Vec2>& pts, std::size_t lo,
                           std::size_t hi, const CubicBezier& bez,
                           std::vector<double>& u) {
    for (std::size_t i = lo + 1; i < hi; ++i) {
        const double t = u[i - lo];
        const Vec2 diff = bez.eval(t) - pts[i];
        const Vec2 d1 = bez.derivative(t);
        const Vec2 d2 = bez.second_derivative(t);
        const double denom = dot(d1, d1) + dot(diff, d2);
        if (std::abs(denom) < 1e-12) continue;
        u[i - lo] = std::clamp(t - dot(diff, d1) / denom, 0.0, 1.0);
    }
}

void fit_cubic(const std::vector<Vec2>& pts, std::size_t lo, std::size_t hi,
               Vec2 tan1, Vec2 tan2, double max_err,
               std::vector<CubicBezier>& out) {
    if (hi - lo == 1) {
        // Two points: control points at the chord thirds (exact line when
        // the tangents follow the chord, as they do at corner splits).
        const double d3 = dist(pts[lo], pts[hi]) / 3.0;
        out.push_back(
            {pts[lo], pts[lo] + tan1 * d3, pts[hi] + tan2 * d3, pts[hi]});
        return;
    }
    std::vector<double> u = chord_length_params(pts, lo, hi);
    CubicBezier bez = generate_bezier(pts, lo, hi, u, tan1, tan2);
    std::size_t split = 0;
    double err = max_fit_error(pts, lo, hi, bez, u, split);
    if (err <= max_err) {
        out.push_back(bez);
        return;
    }
    for (int round = 0; round < 4; ++round) {
        newton_reparameterize(pts, lo, hi, bez, u);
        bez = generate_bezier(pts, lo, hi, u, tan1, tan2);
        err = max_fit_error(pts, lo, hi, bez, u, split);
        if (err <= max_err) {
            out.push_back(bez);
            return;
        }
    }
    Vec2 center = normalize_dir(pts[split - 1] - pts[split + 1]);
    if (center == Vec2{0.0, 0.0}) {
        center = normalize_dir(pts[split - 1] - pts[split]);
    }
    fit_cubic(pts, lo, split, tan1, center, max_err, out);
    fit_cubic(pts, split, hi, -1.0 * center, tan2, max_err, out);
}

}  // namespace

Stroke fit_stroke(const Polyline& line, double max_err, double corner_deg) {
    require_input(max_err > 0.0, "fit_stroke: max_err must be positive");
    require_input(corner_deg >= 0.0 && corner_deg <= 180.0,
                  "fit_stroke: corner_deg must be in [0, 180]");
    validate_polyline(line, "fit_stroke");

    std::vector<Vec2> pts = line.points;
    const bool closed = line.closed;
    if (closed) {
        // Seam a closed chain at its sharpest vertex so the visible joint
        // lands on a natural corner.
        const std::size_t n = pts.size();
        std::size_t seam = 0;
        double sharpest = 360.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 prev = pts[(i + n - 1) % n];
            const Vec2 next = pts[(i + 1) % n];
            const double a = interior_angle_deg(prev, pts[i], next);
            if (a < sharpest) {
                sharpest = a;
                seam = i;
            }
        }
        std::rotate(pts.begin(), pts.begin() + seam, pts.end());
        pts.push_back(pts.front());
    }

    // Pre-split at corners: vertices whose interior angle is smaller than
    // corner_deg become exact joints between fitted runs.
    std::vector<std::size_t> cuts{0};
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        if (interior_angle_deg(pts[i - 1], pts[i], pts[i + 1]) < corner_deg) {
            cuts.push_back(i);
        }
    }
    cuts.push_back(pts.size() - 1);

    Stroke stroke;
    stroke.closed = closed;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const std::size_t lo = cuts[c];
        const std::size_t hi = cuts[c + 1];
        const Vec2 tan1 = normalize_dir(pts[lo + 1] - pts[lo]);
        const Vec2 tan2 = normalize_dir(pts[hi - 1] - pts[hi]);
        fit_cubic(pts, lo, hi, tan1, tan2, max_err, stroke.segments);
    }
    return stroke;
}

namespace {

double bezier_length_adaptive(const CubicBezier& c) {
    const double chord = dist(c.p0, c.p3);
    const double polygon =
        dist(c.p0, c.p1) + dist(c.p1, c.p2) + dist(c.p2, c.p3);
    if (polygon - chord < 1e-6) return (2.0 * chord + polygon) / 3.0;
    const auto [left, right] = c.split(0.5);
    return bezier_length_adaptive(left) + bezier_length_adaptive(right);
}

}  // namespace

double stroke_length(const Stroke& s) {
    require_input(!s.segments.empty(), "stroke_length: empty stroke");
    double total = 0.0;
    for (const CubicBezier& c : s.segments) {
        for (const Vec2 p : {c.p0, c.p1, c.p2, c.p3}) {
            require_input(std::isfinite(p.x) && std::isfinite(p.y),
                          "stroke_length: non-finite control point");
        }
        total += bezier_length_adaptive(c);
    }
    return total;
}

}  // namespace inkline
