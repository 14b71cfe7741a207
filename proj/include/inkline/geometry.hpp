#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace inkline {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    friend Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
    friend Vec2 operator/(Vec2 v, double s) { return {v.x / s, v.y / s}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

// Angle between two direction vectors in degrees, in [0, 180].
inline double angle_between_deg(Vec2 a, Vec2 b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    double c = dot(a, b) / (na * nb);
    c = std::clamp(c, -1.0, 1.0);
    return std::acos(c) * 180.0 / 3.14159265358979323846;
}

// Distance from point p to the segment [a, b].
inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return dist(p, a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return dist(p, a + t * ab);
}

struct CubicBezier {
    Vec2 p0, p1, p2, p3;

    Vec2 eval(double t) const {
        const double u = 1.0 - t;
        const double b0 = u * u * u;
        const double b1 = 3.0 * u * u * t;
        const double b2 = 3.0 * u * t * t;
        const double b3 = t * t * t;
        return b0 * p0 + b1 * p1 + b2 * p2 + b3 * p3;
    }

    Vec2 derivative(double t) const {
        const double u = 1.0 - t;
        return 3.0 * u * u * (p1 - p0) + 6.0 * u * t * (p2 - p1) +
               3.0 * t * t * (p3 - p2);
    }

    Vec2 second_derivative(double t) const {
        const double u = 1.0 - t;
        return 6.0 * u * (p2 - 2.0 * p1 + p0) + 6.0 * t * (p3 - 2.0 * p2 + p1);
    }

    CubicBezier reversed() const { return {p3, p2, p1, p0}; }

    // de Casteljau split at parameter t into two sub-curves.
    std::pair<CubicBezier, CubicBezier> split(double t) const {
        const Vec2 q0 = p0 + t * (p1 - p0);
        const Vec2 q1 = p1 + t * (p2 - p1);
        const Vec2 q2 = p2 + t * (p3 - p2);
        const Vec2 r0 = q0 + t * (q1 - q0);
        const Vec2 r1 = q1 + t * (q2 - q1);
        const Vec2 s = r0 + t * (r1 - r0);
        return {CubicBezier{p0, q0, r0, s}, CubicBezier{s, r1, q2, p3}};
    }
};

// Open or closed chain of points in millimeter workspace coordinates.
// Invariant: >= 2 points, no two consecutive points identical.
struct Polyline {
    std::vector<Vec2> points;
    bool closed = false;
};

// Chain of cubic segments joined end-to-start (G0). A degenerate stroke whose
// every control point coincides represents a pen dot.
struct Stroke {
    std::vector<CubicBezier> segments;
    bool closed = false;

    Vec2 start() const { return segments.front().p0; }
    Vec2 end() const { return segments.back().p3; }

    bool is_dot() const {
        if (segments.size() != 1) return false;
        const CubicBezier& c = segments.front();
        return c.p0 == c.p1 && c.p0 == c.p2 && c.p0 == c.p3;
    }

    Stroke reversed() const {
        Stroke out;
        out.closed = closed;
        out.segments.reserve(segments.size());
        for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
            out.segments.push_back(it->reversed());
        }
        return out;
    }
};

// Round to 4 decimal places, normalizing negative zero. Stroke and program
// coordinates pass through this once at serialization boundaries so that a
// printed file parses back to bit-identical values.
inline double quantize4(double v) {
    double q = std::round(v * 1e4) / 1e4;
    if (q == 0.0) q = 0.0;  // collapse -0.0
    return q;
}

}  // namespace inkline
