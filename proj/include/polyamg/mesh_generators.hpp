#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "polyamg/errors.hpp"
#include "polyamg/mesh.hpp"
#include "polyamg/rng.hpp"

namespace polyamg {

namespace detail {

inline std::vector<Vec2> clip_to_unit_square(std::vector<Vec2> poly) {
    poly = clip_half_plane(poly, {-1.0, 0.0}, 0.0);  // x >= 0
    poly = clip_half_plane(poly, {1.0, 0.0}, 1.0);   // x <= 1
    poly = clip_half_plane(poly, {0.0, -1.0}, 0.0);  // y >= 0
    poly = clip_half_plane(poly, {0.0, 1.0}, 1.0);   // y <= 1
    return poly;
}

} // namespace detail

/// Regular-hexagon tiling of the unit square with m hexagon columns;
/// boundary cells are clipped to the square. Hexagons are flat-topped
/// with side s = 2/(3m), so the interior cell diameter is h = 4/(3m).
/// Columns 0 and m sit exactly on x = 0 and x = 1 and the bottom row is
/// cut exactly through cell centers, which keeps the clipped shapes tame.
inline PolygonalMesh gen_hexagonal(int m) {
    if (m < 2) throw invalid_parameter("gen_hexagonal: m must be >= 2");
    const double s = 2.0 / (3.0 * m);
    const double row = std::numbers::sqrt3 * s;
    MeshBuilder builder;
    const int n_rows = int(std::ceil(1.0 / row)) + 1;
    for (int i = 0; i <= m; ++i) {
        const double cx = 1.5 * s * i;
        const double y_off = (i % 2 == 1) ? 0.5 * row : 0.0;
        for (int j = 0; j <= n_rows; ++j) {
            const double cy = row * j + y_off;
            if (cy - 0.5 * row >= 1.0) break;
            std::vector<Vec2> hex = {
                {cx + s, cy},           {cx + 0.5 * s, cy + 0.5 * row},
                {cx - 0.5 * s, cy + 0.5 * row}, {cx - s, cy},
                {cx - 0.5 * s, cy - 0.5 * row}, {cx + 0.5 * s, cy - 0.5 * row}};
            auto cell = detail::clip_to_unit_square(std::move(hex));
            if (cell.size() < 3 || polygon_signed_area(cell) <= 0.0) continue;
            builder.add_cell(cell);
        }
    }
    return builder.finalize();
}

/// Bounded Voronoi diagram of the given distinct seed points, each cell
/// obtained by half-plane clipping of the unit square. A uniform bucket
/// grid prunes far seeds: a seed farther than twice the current max
/// vertex distance cannot cut the cell, so the output equals the naive
/// all-pairs clipping.
inline PolygonalMesh voronoi_mesh(std::span<const Vec2> seeds) {
    const int n = int(seeds.size());
    if (n < 4) throw invalid_parameter("voronoi_mesh: need at least 4 seeds");
    const int g = std::max(1, int(std::sqrt(double(n))));
    const double cell_w = 1.0 / g;
    auto bucket_of = [&](double t) { return std::clamp(int(t * g), 0, g - 1); };
    std::vector<std::vector<int>> buckets(std::size_t(g) * g);
    for (int i = 0; i < n; ++i) {
        const int bx = bucket_of(seeds[i].x), by = bucket_of(seeds[i].y);
        for (int j : buckets[std::size_t(by) * g + bx])
            if (dist(seeds[i], seeds[j]) < 1e-14)
                throw invalid_parameter("voronoi_mesh: duplicate seeds");
        buckets[std::size_t(by) * g + bx].push_back(i);
    }

    MeshBuilder builder;
    std::vector<std::pair<double, int>> cands;
    for (int i = 0; i < n; ++i) {
        const Vec2 si = seeds[i];
        std::vector<Vec2> poly = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
        double r_max = 0.0;
        for (const Vec2 v : poly) r_max = std::max(r_max, dist(v, si));
        const int bx = bucket_of(si.x), by = bucket_of(si.y);
        for (int ring = 0; ring < 2 * g; ++ring) {
            // any seed in this ring is at least (ring-1) buckets away
            if (ring >= 2 && (ring - 1) * cell_w > 2.0 * r_max) break;
            cands.clear();
            for (int dy = -ring; dy <= ring; ++dy) {
                const int y = by + dy;
                if (y < 0 || y >= g) continue;
                for (int dx = -ring; dx <= ring; ++dx) {
                    if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
                    const int x = bx + dx;
                    if (x < 0 || x >= g) continue;
                    for (int j : buckets[std::size_t(y) * g + x])
                        if (j != i) cands.emplace_back(dist(seeds[j], si), j);
                }
            }
            std::sort(cands.begin(), cands.end());
            for (const auto& [d, j] : cands) {
                if (d > 2.0 * r_max) break;
                const Vec2 q = seeds[j];
                const Vec2 normal = q - si;
                const double c = 0.5 * (dot(q, q) - dot(si, si));
                poly = clip_half_plane(poly, normal, c);
                r_max = 0.0;
                for (const Vec2 v : poly) r_max = std::max(r_max, dist(v, si));
            }
        }
        builder.add_cell(poly);
    }
    return builder.finalize();
}

/// Voronoi mesh from n uniform-random seeds in (0,1)^2. A seed that lands
/// within 1e-14 of an earlier one is redrawn from the same stream, so the
/// result stays a pure function of (n_seeds, rng_seed).
inline PolygonalMesh gen_voronoi(int n_seeds, std::uint64_t rng_seed) {
    if (n_seeds < 4) throw invalid_parameter("gen_voronoi: n_seeds must be >= 4");
    SeededRng rng(rng_seed);
    const int g = std::max(1, int(std::sqrt(double(n_seeds))));
    auto bucket_of = [&](double t) { return std::clamp(int(t * g), 0, g - 1); };
    std::vector<std::vector<int>> buckets(std::size_t(g) * g);
    std::vector<Vec2> seeds;
    seeds.reserve(n_seeds);
    while (int(seeds.size()) < n_seeds) {
        const Vec2 p{rng.uniform01(), rng.uniform01()};
        bool dup = false;
        const int bx = bucket_of(p.x), by = bucket_of(p.y);
        for (int dy = -1; dy <= 1 && !dup; ++dy)
            for (int dx = -1; dx <= 1 && !dup; ++dx) {
                const int x = bx + dx, y = by + dy;
                if (x < 0 || x >= g || y < 0 || y >= g) continue;
                for (int j : buckets[std::size_t(y) * g + x])
                    if (dist(seeds[j], p) < 1e-14) {
                        dup = true;
                        break;
                    }
            }
        if (dup) continue;
        buckets[std::size_t(by) * g + bx].push_back(int(seeds.size()));
        seeds.push_back(p);
    }
    return voronoi_mesh(seeds);
}

namespace detail {

/// One Koch subdivision step: each edge gains an outward equilateral bump.
inline std::vector<Vec2> koch_subdivide(const std::vector<Vec2>& poly) {
    std::vector<Vec2> out;
    out.reserve(poly.size() * 4);
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = poly[i];
        const Vec2 q = poly[(i + 1) % n];
        const Vec2 d = q - p;
        const Vec2 mid = 0.5 * (p + q);
        // outward normal of a CCW loop is the right-hand side of travel
        const Vec2 apex = mid + (std::numbers::sqrt3 / 6.0) * Vec2{d.y, -d.x};
        out.push_back(p);
        out.push_back(p + (1.0 / 3.0) * d);
        out.push_back(apex);
        out.push_back(p + (2.0 / 3.0) * d);
    }
    return out;
}

} // namespace detail

/// tiles x tiles grid of squares, each holding one Koch-snowflake iterate
/// (3*4^level edges) plus four complement polygons that join the square's
/// corners to the snowflake's extreme vertices.
inline PolygonalMesh gen_koch(int level, int tiles) {
    if (level < 1 || level > 4) throw invalid_parameter("gen_koch: level must be in [1,4]");
    if (tiles < 1) throw invalid_parameter("gen_koch: tiles must be >= 1");
    const double w = 1.0 / tiles;
    const double a = 0.7 * w;  // triangle side; hull hexagon then fits with margin

    // apex-up equilateral triangle around the origin, CCW
    std::vector<Vec2> flake = {{0.0, a / std::numbers::sqrt3},
                               {-0.5 * a, -0.5 * a / std::numbers::sqrt3},
                               {0.5 * a, -0.5 * a / std::numbers::sqrt3}};
    for (int l = 0; l < level; ++l) flake = detail::koch_subdivide(flake);
    const int n_pts = int(flake.size());

    int i_top = 0, i_bot = 0, i_left = 0, i_right = 0;
    for (int i = 1; i < n_pts; ++i) {
        const Vec2 p = flake[i];
        if (p.y > flake[i_top].y || (p.y == flake[i_top].y && p.x < flake[i_top].x)) i_top = i;
        if (p.y < flake[i_bot].y || (p.y == flake[i_bot].y && p.x > flake[i_bot].x)) i_bot = i;
        if (p.x < flake[i_left].x || (p.x == flake[i_left].x && p.y > flake[i_left].y)) i_left = i;
        if (p.x > flake[i_right].x || (p.x == flake[i_right].x && p.y < flake[i_right].y)) i_right = i;
    }

    // arc walked backward along the CCW flake = clockwise boundary piece
    auto arc_backward = [&](int from, int to) {
        std::vector<int> idx;
        for (int t = from;; t = (t + n_pts - 1) % n_pts) {
            idx.push_back(t);
            if (t == to) break;
        }
        return idx;
    };

    MeshBuilder builder;
    for (int ty = 0; ty < tiles; ++ty)
        for (int tx = 0; tx < tiles; ++tx) {
            const Vec2 center{(tx + 0.5) * w, (ty + 0.5) * w};
            std::vector<Vec2> snow(n_pts);
            for (int i = 0; i < n_pts; ++i) snow[i] = center + flake[i];
            builder.add_cell(snow);

            const Vec2 c0{tx * w, ty * w}, c1{(tx + 1) * w, ty * w};
            const Vec2 c2{(tx + 1) * w, (ty + 1) * w}, c3{tx * w, (ty + 1) * w};
            const std::array<std::pair<std::array<Vec2, 2>, std::vector<int>>, 4> pieces = {{
                {{c0, c1}, arc_backward(i_right, i_bot)},
                {{c1, c2}, arc_backward(i_top, i_right)},
                {{c2, c3}, arc_backward(i_left, i_top)},
                {{c3, c0}, arc_backward(i_bot, i_left)},
            }};
            for (const auto& [corners, arc] : pieces) {
                std::vector<Vec2> piece;
                piece.reserve(arc.size() + 2);
                piece.push_back(corners[0]);
                piece.push_back(corners[1]);
                for (int t : arc) piece.push_back(snow[t]);
                builder.add_cell(piece);
            }
        }
    return builder.finalize();
}

} // namespace polyamg
