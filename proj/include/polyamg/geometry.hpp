#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace polyamg {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

/// Signed shoelace area; positive for counter-clockwise loops.
inline double polygon_signed_area(std::span<const Vec2> p) {
    double twice = 0.0;
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = p[i];
        const Vec2 b = p[(i + 1) % n];
        twice += cross(a, b);
    }
    return 0.5 * twice;
}

/// Area-weighted centroid of a simple polygon.
inline Vec2 polygon_centroid(std::span<const Vec2> p) {
    double twice = 0.0;
    double cx = 0.0, cy = 0.0;
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = p[i];
        const Vec2 b = p[(i + 1) % n];
        const double w = cross(a, b);
        twice += w;
        cx += w * (a.x + b.x);
        cy += w * (a.y + b.y);
    }
    return {cx / (3.0 * twice), cy / (3.0 * twice)};
}

/// Max distance between any two vertices (the element diameter h_K).
inline double polygon_diameter(std::span<const Vec2> p) {
    double h = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j)
            h = std::max(h, dist(p[i], p[j]));
    return h;
}

/// Min distance between any two vertices (h_min,K of the mesh metrics).
inline double polygon_min_vertex_distance(std::span<const Vec2> p) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j)
            d = std::min(d, dist(p[i], p[j]));
    return d;
}

inline double point_segment_distance(Vec2 q, Vec2 a, Vec2 b) {
    const Vec2 d = b - a;
    const double len2 = dot(d, d);
    if (len2 == 0.0) return dist(q, a);
    double t = dot(q - a, d) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return dist(q, a + t * d);
}

/// Crossing-number test; points on the boundary may land on either side.
inline bool point_in_polygon(Vec2 q, std::span<const Vec2> p) {
    bool inside = false;
    const std::size_t n = p.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const bool straddles = (p[i].y > q.y) != (p[j].y > q.y);
        if (straddles) {
            const double x_at = p[j].x + (p[i].x - p[j].x) * (q.y - p[j].y) / (p[i].y - p[j].y);
            if (q.x < x_at) inside = !inside;
        }
    }
    return inside;
}

/// Clip a convex polygon against the half-plane { q : dot(q, n) <= c }.
/// Vertices exactly on the line are kept verbatim.
inline std::vector<Vec2> clip_half_plane(std::span<const Vec2> poly, Vec2 n, double c) {
    std::vector<Vec2> out;
    const std::size_t k = poly.size();
    if (k == 0) return out;
    out.reserve(k + 2);
    for (std::size_t i = 0; i < k; ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % k];
        const double da = dot(a, n) - c;
        const double db = dot(b, n) - c;
        if (da <= 0.0) out.push_back(a);
        if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
            const double t = da / (da - db);
            out.push_back(a + t * (b - a));
        }
    }
    return out;
}

/// True if segments (a,b) and (c,d) cross at an interior point of both.
inline bool segments_properly_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double d1 = cross(b - a, c - a);
    const double d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c);
    const double d4 = cross(d - c, b - c);
    return ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) &&
           ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0));
}

} // namespace polyamg
