#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "polyamg/errors.hpp"
#include "polyamg/geometry.hpp"

namespace polyamg {

constexpr double kGeomTol = 1e-12;       // on-boundary / welding tolerance
constexpr double kDegenerateArea = 1e-14;  // clipped slivers below this are merged away

/// Polygonal tessellation of the unit square. Cells are CCW vertex-index
/// loops; boundary flags and edge adjacency are derived from the geometry.
struct PolygonalMesh {
    std::vector<Vec2> vertices;
    std::vector<std::vector<int>> cells;
    std::vector<char> boundary_vertex;
    std::vector<std::pair<int, int>> cell_adjacency;

    int n_vertices() const { return int(vertices.size()); }
    int n_cells() const { return int(cells.size()); }

    std::vector<Vec2> cell_points(int c) const {
        std::vector<Vec2> p;
        p.reserve(cells[c].size());
        for (int v : cells[c]) p.push_back(vertices[v]);
        return p;
    }

    double cell_area(int c) const {
        const auto p = cell_points(c);
        return polygon_signed_area(p);
    }
};

struct MeshQuality {
    int n_elt = 0;
    int n_v = 0;
    double h = 0.0;       // max cell diameter
    double h_min = 0.0;   // min vertex-pair distance within any cell
    double gamma0 = 0.0;  // max h_K / (approximate inscribed radius)
    double gamma1 = 0.0;  // max h_K / h_min,K
};

struct Partition {
    std::vector<int> part_of_cell;
    int n_parts = 0;
};

inline bool on_unit_square_boundary(Vec2 p, double tol = kGeomTol) {
    return std::abs(p.x) <= tol || std::abs(p.x - 1.0) <= tol || std::abs(p.y) <= tol ||
           std::abs(p.y - 1.0) <= tol;
}

inline void compute_boundary_flags(PolygonalMesh& mesh) {
    mesh.boundary_vertex.assign(mesh.vertices.size(), 0);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        mesh.boundary_vertex[i] = on_unit_square_boundary(mesh.vertices[i]) ? 1 : 0;
}

inline void compute_cell_adjacency(PolygonalMesh& mesh) {
    std::map<std::pair<int, int>, int> first_cell_of_edge;
    mesh.cell_adjacency.clear();
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& loop = mesh.cells[c];
        const int k = int(loop.size());
        for (int e = 0; e < k; ++e) {
            const int a = loop[e], b = loop[(e + 1) % k];
            const auto key = std::minmax(a, b);
            auto [it, inserted] = first_cell_of_edge.emplace(key, c);
            if (!inserted) mesh.cell_adjacency.emplace_back(it->second, c);
        }
    }
}

/// Check every mesh invariant; throws mesh_validation_error on violation.
inline void validate(const PolygonalMesh& mesh) {
    const int nv = mesh.n_vertices();
    double area_sum = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& loop = mesh.cells[c];
        const int k = int(loop.size());
        if (k < 3)
            throw mesh_validation_error("cell " + std::to_string(c) + " has fewer than 3 vertices");
        for (int v : loop)
            if (v < 0 || v >= nv)
                throw mesh_validation_error("cell " + std::to_string(c) + " has vertex out of range");
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j)
                if (loop[i] == loop[j])
                    throw mesh_validation_error("cell " + std::to_string(c) +
                                                " repeats a vertex index");
        const auto pts = mesh.cell_points(c);
        const double area = polygon_signed_area(pts);
        if (area <= 0.0)
            throw mesh_validation_error("cell " + std::to_string(c) +
                                        " is not counter-clockwise (signed area <= 0)");
        area_sum += area;
        // simplicity: no two non-adjacent edges may properly cross
        for (int i = 0; i < k; ++i)
            for (int j = i + 2; j < k; ++j) {
                if (i == 0 && j == k - 1) continue;
                if (segments_properly_intersect(pts[i], pts[(i + 1) % k], pts[j],
                                                pts[(j + 1) % k]))
                    throw mesh_validation_error("cell " + std::to_string(c) +
                                                " is self-intersecting");
            }
    }
    if (std::abs(area_sum - 1.0) > 1e-10)
        throw mesh_validation_error("cell areas sum to " + std::to_string(area_sum) +
                                    ", expected 1");

    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& loop : mesh.cells) {
        const int k = int(loop.size());
        for (int e = 0; e < k; ++e)
            edge_count[std::minmax(loop[e], loop[(e + 1) % k])]++;
    }
    for (const auto& [edge, count] : edge_count) {
        if (count == 2) continue;
        if (count != 1)
            throw mesh_validation_error("edge shared by " + std::to_string(count) + " cells");
        const Vec2 a = mesh.vertices[edge.first];
        const Vec2 b = mesh.vertices[edge.second];
        const bool on_side =
            (std::abs(a.x) <= kGeomTol && std::abs(b.x) <= kGeomTol) ||
            (std::abs(a.x - 1.0) <= kGeomTol && std::abs(b.x - 1.0) <= kGeomTol) ||
            (std::abs(a.y) <= kGeomTol && std::abs(b.y) <= kGeomTol) ||
            (std::abs(a.y - 1.0) <= kGeomTol && std::abs(b.y - 1.0) <= kGeomTol);
        if (!on_side)
            throw mesh_validation_error("boundary edge not on the unit-square boundary");
    }

    if (mesh.boundary_vertex.size() != mesh.vertices.size())
        throw mesh_validation_error("boundary_vertex size mismatch");
    for (int i = 0; i < nv; ++i) {
        const bool flag = mesh.boundary_vertex[i] != 0;
        if (flag != on_unit_square_boundary(mesh.vertices[i]))
            throw mesh_validation_error("boundary flag wrong at vertex " + std::to_string(i));
    }
}

/// Approximate inscribed-ball radius: best candidate among the cell
/// centroid and the centroids of the centroid-fan triangles, measured as
/// the distance to the nearest boundary segment. Candidates outside the
/// cell are skipped; the result is a lower bound of the true inradius and
/// invariant under rotation of the vertex loop.
inline double approx_inscribed_radius(std::span<const Vec2> pts) {
    const int k = int(pts.size());
    const Vec2 center = polygon_centroid(pts);
    auto clearance = [&](Vec2 c) {
        if (!point_in_polygon(c, pts)) return 0.0;
        double d = std::numeric_limits<double>::infinity();
        for (int e = 0; e < k; ++e)
            d = std::min(d, point_segment_distance(c, pts[e], pts[(e + 1) % k]));
        return d;
    };
    double best = clearance(center);
    for (int i = 0; i < k; ++i)
        best = std::max(best,
                        clearance((1.0 / 3.0) * (center + pts[i] + pts[(i + 1) % k])));
    return best;
}

inline MeshQuality measure(const PolygonalMesh& mesh) {
    MeshQuality q;
    q.n_elt = mesh.n_cells();
    q.n_v = mesh.n_vertices();
    q.h_min = std::numeric_limits<double>::infinity();
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto pts = mesh.cell_points(c);
        const double hk = polygon_diameter(pts);
        const double hmink = polygon_min_vertex_distance(pts);
        const double r = approx_inscribed_radius(pts);
        q.h = std::max(q.h, hk);
        q.h_min = std::min(q.h_min, hmink);
        q.gamma1 = std::max(q.gamma1, hk / hmink);
        q.gamma0 = std::max(q.gamma0, r > 0.0 ? hk / r : std::numeric_limits<double>::infinity());
    }
    return q;
}

/// Accumulates cells given by raw coordinates and welds vertices within
/// kGeomTol so that shared edges become shared index pairs. Degenerate
/// clipped slivers (area < kDegenerateArea) are merged into the neighbor
/// sharing their longest edge.
class MeshBuilder {
  public:
    /// Returns the vertex index, welding onto any existing vertex closer
    /// than kGeomTol (searched over the 3x3 neighborhood of a snap grid).
    int add_vertex(Vec2 p) {
        const auto key = grid_key(p);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy) {
                const auto it = grid_.find({key.first + dx, key.second + dy});
                if (it == grid_.end()) continue;
                for (int idx : it->second)
                    if (dist(vertices_[idx], p) <= kGeomTol) return idx;
            }
        const int idx = int(vertices_.size());
        vertices_.push_back(p);
        grid_[key].push_back(idx);
        return idx;
    }

    void add_cell(std::span<const Vec2> pts) {
        std::vector<int> loop;
        loop.reserve(pts.size());
        for (const Vec2 p : pts) {
            const int idx = add_vertex(p);
            if (!loop.empty() && loop.back() == idx) continue;  // welded duplicate
            loop.push_back(idx);
        }
        while (loop.size() >= 2 && loop.front() == loop.back()) loop.pop_back();
        cells_.push_back(std::move(loop));
    }

    PolygonalMesh finalize() {
        merge_degenerate_cells();
        PolygonalMesh mesh;
        // compact: keep only vertices referenced by surviving cells, in
        // first-use order so generator output is reproducible
        std::vector<int> remap(vertices_.size(), -1);
        for (auto& loop : cells_) {
            if (loop.size() < 3) continue;
            std::vector<int> out;
            out.reserve(loop.size());
            for (int v : loop) {
                if (remap[v] < 0) {
                    remap[v] = int(mesh.vertices.size());
                    mesh.vertices.push_back(vertices_[v]);
                }
                out.push_back(remap[v]);
            }
            mesh.cells.push_back(std::move(out));
        }
        compute_boundary_flags(mesh);
        compute_cell_adjacency(mesh);
        return mesh;
    }

  private:
    std::pair<std::int64_t, std::int64_t> grid_key(Vec2 p) const {
        return {std::int64_t(std::floor(p.x / cell_)), std::int64_t(std::floor(p.y / cell_))};
    }

    double loop_area(const std::vector<int>& loop) const {
        std::vector<Vec2> pts;
        pts.reserve(loop.size());
        for (int v : loop) pts.push_back(vertices_[v]);
        return polygon_signed_area(pts);
    }

    // Splice sliver cells into the neighbor sharing their longest edge:
    // the shared edge is removed and the sliver's remaining path is
    // inserted into the neighbor's loop.
    void merge_degenerate_cells() {
        std::map<std::pair<int, int>, std::vector<int>> cells_of_edge;
        for (int c = 0; c < int(cells_.size()); ++c) {
            const auto& loop = cells_[c];
            const int k = int(loop.size());
            for (int e = 0; e < k; ++e)
                cells_of_edge[std::minmax(loop[e], loop[(e + 1) % k])].push_back(c);
        }
        for (int c = 0; c < int(cells_.size()); ++c) {
            auto& loop = cells_[c];
            if (loop.size() < 3) {
                loop.clear();
                continue;
            }
            if (std::abs(loop_area(loop)) >= kDegenerateArea) continue;
            // pick the longest edge shared with a live neighbor
            int best_e = -1, nbr = -1;
            double best_len = -1.0;
            const int k = int(loop.size());
            for (int e = 0; e < k; ++e) {
                const int a = loop[e], b = loop[(e + 1) % k];
                for (int other : cells_of_edge[std::minmax(a, b)]) {
                    if (other == c || cells_[other].size() < 3) continue;
                    const double len = dist(vertices_[a], vertices_[b]);
                    if (len > best_len) {
                        best_len = len;
                        best_e = e;
                        nbr = other;
                    }
                }
            }
            if (nbr < 0) {
                loop.clear();  // isolated sliver, nothing to merge into
                continue;
            }
            const int a = loop[best_e], b = loop[(best_e + 1) % k];
            // sliver interior path from b to a, skipping the shared edge a->b;
            // the CCW neighbor holds the reversed edge b->a
            std::vector<int> path;
            for (int t = (best_e + 2) % k; t != best_e; t = (t + 1) % k) path.push_back(loop[t]);
            auto& nl = cells_[nbr];
            for (std::size_t e = 0; e < nl.size(); ++e) {
                if (nl[e] == b && nl[(e + 1) % nl.size()] == a) {
                    std::vector<int> merged(nl.begin(), nl.begin() + e + 1);
                    merged.insert(merged.end(), path.begin(), path.end());
                    merged.insert(merged.end(), nl.begin() + e + 1, nl.end());
                    // drop consecutive duplicates introduced by the splice
                    std::vector<int> clean;
                    for (int v : merged)
                        if (clean.empty() || clean.back() != v) clean.push_back(v);
                    while (clean.size() >= 2 && clean.front() == clean.back()) clean.pop_back();
                    nl = std::move(clean);
                    break;
                }
            }
            for (int e2 = 0; e2 < k; ++e2) {
                const auto key = std::minmax(loop[e2], loop[(e2 + 1) % k]);
                auto& vec = cells_of_edge[key];
                for (auto& entry : vec)
                    if (entry == c) entry = nbr;
            }
            loop.clear();
        }
    }

    struct KeyHash {
        std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& k) const {
            return std::hash<std::int64_t>()(k.first * 0x9e3779b97f4a7c15LL + k.second);
        }
    };

    double cell_ = 4.0 * kGeomTol;
    std::vector<Vec2> vertices_;
    std::vector<std::vector<int>> cells_;
    std::unordered_map<std::pair<std::int64_t, std::int64_t>, std::vector<int>, KeyHash> grid_;
};

/// Text format, versioned: "POLYMESH 1", counts, hex-float vertices, then
/// 0-based CCW cell loops. Hex floats round-trip bit exactly.
inline void save_mesh(const PolygonalMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw error("save_mesh: cannot open " + path);
    out << "POLYMESH 1\n";
    out << mesh.n_vertices() << " " << mesh.n_cells() << "\n";
    char buf[80];
    for (const Vec2& v : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "%a %a\n", v.x, v.y);
        out << buf;
    }
    for (const auto& loop : mesh.cells) {
        out << loop.size();
        for (int v : loop) out << " " << v;
        out << "\n";
    }
}

inline PolygonalMesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("load_mesh: cannot open " + path);
    std::string line;
    int lineno = 0;
    auto next_line = [&]() {
        if (!std::getline(in, line)) throw parse_error("load_mesh: unexpected end of file", lineno + 1);
        ++lineno;
    };
    next_line();
    if (line != "POLYMESH 1") throw parse_error("load_mesh: bad header", lineno);
    next_line();
    int nv = 0, nc = 0;
    if (std::sscanf(line.c_str(), "%d %d", &nv, &nc) != 2 || nv < 0 || nc < 0)
        throw parse_error("load_mesh: bad counts line", lineno);
    PolygonalMesh mesh;
    mesh.vertices.resize(nv);
    for (int i = 0; i < nv; ++i) {
        next_line();
        char* end = nullptr;
        const char* s = line.c_str();
        const double x = std::strtod(s, &end);
        if (end == s) throw parse_error("load_mesh: bad vertex line", lineno);
        s = end;
        const double y = std::strtod(s, &end);
        if (end == s) throw parse_error("load_mesh: bad vertex line", lineno);
        mesh.vertices[i] = {x, y};
    }
    mesh.cells.resize(nc);
    for (int c = 0; c < nc; ++c) {
        next_line();
        const char* s = line.c_str();
        char* end = nullptr;
        const long k = std::strtol(s, &end, 10);
        if (end == s || k < 3) throw parse_error("load_mesh: bad cell size", lineno);
        mesh.cells[c].resize(k);
        s = end;
        for (long t = 0; t < k; ++t) {
            const long v = std::strtol(s, &end, 10);
            if (end == s) throw parse_error("load_mesh: bad cell vertex", lineno);
            if (v < 0 || v >= nv) throw parse_error("load_mesh: vertex index out of range", lineno);
            mesh.cells[c][t] = int(v);
            s = end;
        }
    }
    compute_boundary_flags(mesh);
    compute_cell_adjacency(mesh);
    validate(mesh);
    return mesh;
}

} // namespace polyamg
