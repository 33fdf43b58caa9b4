#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <set>

#include "polyamg/mesh.hpp"
#include "polyamg/mesh_generators.hpp"
#include "polyamg/partition.hpp"

using namespace polyamg;

namespace {

double cell_area_sum(const PolygonalMesh& mesh) {
    double s = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) s += mesh.cell_area(c);
    return s;
}

bool touches_boundary(const PolygonalMesh& mesh, int cell) {
    for (int v : mesh.cells[cell])
        if (mesh.boundary_vertex[v]) return true;
    return false;
}

std::vector<int> canonical_rotation(std::vector<int> loop) {
    const auto min_it = std::min_element(loop.begin(), loop.end());
    std::rotate(loop.begin(), min_it, loop.end());
    return loop;
}

std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("hexagonal generator") {
    SECTION("parameter validation") {
        CHECK_THROWS_AS(gen_hexagonal(1), invalid_parameter);
    }
    SECTION("interior cells are regular hexagons with h/h_min = 2") {
        const auto mesh = gen_hexagonal(8);
        validate(mesh);
        int interior_cells = 0;
        for (int c = 0; c < mesh.n_cells(); ++c) {
            if (touches_boundary(mesh, c)) continue;
            ++interior_cells;
            const auto pts = mesh.cell_points(c);
            REQUIRE(pts.size() == 6);
            const double ratio = polygon_diameter(pts) / polygon_min_vertex_distance(pts);
            CHECK(ratio == Catch::Approx(2.0).margin(1e-12));
        }
        CHECK(interior_cells > 0);
    }
    SECTION("tiling and metric windows at the paper scale h ~ 1.33e-2") {
        const auto mesh = gen_hexagonal(101);  // h = 4/303 = 1.32e-2
        validate(mesh);
        CHECK(std::abs(cell_area_sum(mesh) - 1.0) <= 1e-10);
        const auto q = measure(mesh);
        CHECK(q.h == Catch::Approx(4.0 / 303.0).epsilon(1e-12));
        CHECK(q.h / q.h_min >= 3.5);
        CHECK(q.h / q.h_min <= 4.5);
        CHECK(q.gamma0 >= 4.5);
        CHECK(q.gamma0 <= 6.5);
    }
    SECTION("deterministic output") {
        const auto a = gen_hexagonal(7);
        const auto b = gen_hexagonal(7);
        CHECK(a.vertices == b.vertices);
        CHECK(a.cells == b.cells);
    }
}

TEST_CASE("voronoi generator") {
    SECTION("parameter validation") {
        CHECK_THROWS_AS(gen_voronoi(1, 0), invalid_parameter);
        CHECK_THROWS_AS(gen_voronoi(3, 0), invalid_parameter);
    }
    SECTION("four symmetric seeds give four congruent squares") {
        const std::vector<Vec2> seeds{{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
        const auto mesh = voronoi_mesh(seeds);
        validate(mesh);
        REQUIRE(mesh.n_cells() == 4);
        for (int c = 0; c < 4; ++c) {
            CHECK(mesh.cells[c].size() == 4);
            CHECK(mesh.cell_area(c) == Catch::Approx(0.25).margin(1e-12));
        }
    }
    SECTION("duplicate forced seeds are rejected") {
        const std::vector<Vec2> seeds{{0.25, 0.25}, {0.25, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
        CHECK_THROWS_AS(voronoi_mesh(seeds), invalid_parameter);
    }
    SECTION("n = 2500 matches the euler scaling of the paper meshes") {
        const auto mesh = gen_voronoi(2500, 42);
        validate(mesh);
        CHECK(mesh.n_cells() == 2500);
        const double ratio = double(mesh.n_vertices()) / mesh.n_cells();
        CHECK(ratio >= 1.9);
        CHECK(ratio <= 2.1);
        CHECK(std::abs(cell_area_sum(mesh) - 1.0) <= 1e-10);
    }
    SECTION("cells are convex") {
        const auto mesh = gen_voronoi(300, 5);
        for (int c = 0; c < mesh.n_cells(); ++c) {
            const auto pts = mesh.cell_points(c);
            const int k = int(pts.size());
            for (int i = 0; i < k; ++i) {
                const Vec2 e0 = pts[(i + 1) % k] - pts[i];
                const Vec2 e1 = pts[(i + 2) % k] - pts[(i + 1) % k];
                CHECK(cross(e0, e1) >= -1e-12);
            }
        }
    }
    SECTION("random voronoi has tiny edges, gamma1 > 100") {
        const auto q = measure(gen_voronoi(2500, 1));
        CHECK(q.gamma1 > 100.0);
    }
    SECTION("deterministic for fixed seed, different across seeds") {
        const auto a = gen_voronoi(128, 9);
        const auto b = gen_voronoi(128, 9);
        const auto c = gen_voronoi(128, 10);
        CHECK(a.vertices == b.vertices);
        CHECK(a.cells == b.cells);
        CHECK(a.vertices != c.vertices);
    }
}

TEST_CASE("koch generator") {
    SECTION("parameter validation") {
        CHECK_THROWS_AS(gen_koch(0, 2), invalid_parameter);
        CHECK_THROWS_AS(gen_koch(5, 2), invalid_parameter);
        CHECK_THROWS_AS(gen_koch(2, 0), invalid_parameter);
    }
    SECTION("level 1, single tile: 5 cells, 12-edge snowflake, unit area") {
        const auto mesh = gen_koch(1, 1);
        validate(mesh);
        REQUIRE(mesh.n_cells() == 5);
        CHECK(mesh.cells[0].size() == 12);
        CHECK(std::abs(cell_area_sum(mesh) - 1.0) <= 1e-10);
    }
    SECTION("level 3 snowflakes have 3*4^3 = 192 edges") {
        const auto mesh = gen_koch(3, 12);
        validate(mesh);
        CHECK(mesh.n_cells() == 5 * 12 * 12);
        int snowflakes = 0;
        for (const auto& loop : mesh.cells)
            if (loop.size() == 192) ++snowflakes;
        CHECK(snowflakes == 12 * 12);
    }
    SECTION("gamma1 grows with the iterate level") {
        const auto q1 = measure(gen_koch(1, 3));
        const auto q3 = measure(gen_koch(3, 3));
        CHECK(q3.gamma1 > q1.gamma1);
    }
}

TEST_CASE("measure") {
    SECTION("unit square as a single cell") {
        PolygonalMesh mesh;
        mesh.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        mesh.cells = {{0, 1, 2, 3}};
        compute_boundary_flags(mesh);
        compute_cell_adjacency(mesh);
        validate(mesh);
        const auto q = measure(mesh);
        CHECK(q.h == Catch::Approx(std::sqrt(2.0)));
        CHECK(q.h_min == Catch::Approx(1.0));
        CHECK(q.gamma1 == Catch::Approx(std::sqrt(2.0)));
        CHECK(q.gamma0 >= 2.0);
    }
    SECTION("invariant under rotation of a cell loop") {
        auto mesh = gen_voronoi(64, 3);
        const auto q0 = measure(mesh);
        for (auto& loop : mesh.cells) std::rotate(loop.begin(), loop.begin() + 1, loop.end());
        const auto q1 = measure(mesh);
        CHECK(q0.h == q1.h);
        CHECK(q0.h_min == q1.h_min);
        CHECK(q0.gamma1 == q1.gamma1);
        // the inradius candidates move with the summation order of the
        // centroid, so gamma0 is only reproduced to roundoff
        CHECK(q0.gamma0 == Catch::Approx(q1.gamma0).epsilon(1e-9));
    }
}

TEST_CASE("conformity invariant across generators") {
    // every edge is shared by exactly two cells or lies on the boundary;
    // validate() checks precisely that, plus tiling and orientation
    for (const auto& mesh : {gen_hexagonal(13), gen_voronoi(500, 11), gen_koch(2, 3)})
        CHECK_NOTHROW(validate(mesh));
}

TEST_CASE("partition") {
    const auto mesh = gen_hexagonal(40);
    SECTION("parameter validation") {
        CHECK_THROWS_AS(partition(mesh, 0, 1), invalid_parameter);
        CHECK_THROWS_AS(partition(mesh, mesh.n_cells() + 1, 1), invalid_parameter);
    }
    SECTION("L = 1 labels every cell 0") {
        const auto p = partition(mesh, 1, 1);
        CHECK(p.n_parts == 1);
        for (int label : p.part_of_cell) CHECK(label == 0);
    }
    SECTION("L = N_elt gives each cell its own part") {
        const auto p = partition(mesh, mesh.n_cells(), 1);
        std::set<int> labels(p.part_of_cell.begin(), p.part_of_cell.end());
        CHECK(int(labels.size()) == mesh.n_cells());
    }
    SECTION("balance on the hexagonal mesh at L = 64") {
        const auto p = partition(mesh, 64, 12345);
        std::vector<int> size(64, 0);
        for (int label : p.part_of_cell) {
            REQUIRE(label >= 0);
            REQUIRE(label < 64);
            ++size[label];
        }
        const auto [lo, hi] = std::minmax_element(size.begin(), size.end());
        CHECK(*lo > 0);
        CHECK(double(*hi) / *lo <= 1.5);
    }
    SECTION("deterministic for fixed seed") {
        const auto a = partition(mesh, 16, 7);
        const auto b = partition(mesh, 16, 7);
        CHECK(a.part_of_cell == b.part_of_cell);
    }
}

TEST_CASE("agglomerate") {
    SECTION("2x2 grid of quarter squares into one 8-vertex polygon") {
        MeshBuilder builder;
        const Vec2 q[9] = {{0, 0}, {0.5, 0}, {1, 0}, {0, 0.5}, {0.5, 0.5},
                           {1, 0.5}, {0, 1}, {0.5, 1}, {1, 1}};
        const int quads[4][4] = {{0, 1, 4, 3}, {1, 2, 5, 4}, {3, 4, 7, 6}, {4, 5, 8, 7}};
        for (const auto& cell : quads) {
            std::vector<Vec2> pts;
            for (int v : cell) pts.push_back(q[v]);
            builder.add_cell(pts);
        }
        const auto mesh = builder.finalize();
        validate(mesh);
        Partition part{{0, 0, 0, 0}, 1};
        const auto coarse = agglomerate(mesh, part);
        REQUIRE(coarse.n_cells() == 1);
        CHECK(coarse.cells[0].size() == 8);  // edge midpoints are kept
        CHECK(std::abs(coarse.cell_area(0) - 1.0) <= 1e-12);
    }
    SECTION("identity agglomeration returns the same cells") {
        const auto mesh = gen_voronoi(8192, 21);
        Partition part;
        part.n_parts = mesh.n_cells();
        part.part_of_cell.resize(mesh.n_cells());
        for (int c = 0; c < mesh.n_cells(); ++c) part.part_of_cell[c] = c;
        const auto coarse = agglomerate(mesh, part);
        REQUIRE(coarse.n_cells() == mesh.n_cells());
        CHECK(coarse.vertices == mesh.vertices);
        for (int c = 0; c < mesh.n_cells(); ++c)
            CHECK(canonical_rotation(coarse.cells[c]) == canonical_rotation(mesh.cells[c]));
    }
    SECTION("coarse voronoi mesh: one cell per part, area preserved") {
        const auto mesh = gen_voronoi(8192, 2);
        const auto part = partition(mesh, 8192 / 16, 2);
        const auto coarse = agglomerate(mesh, part);
        CHECK(coarse.n_cells() == 8192 / 16);
        CHECK(std::abs(cell_area_sum(coarse) - 1.0) <= 1e-10);
        CHECK_NOTHROW(validate(coarse));
    }
    SECTION("disconnected part raises a topology error naming the part") {
        const auto mesh = gen_hexagonal(6);
        Partition part;
        part.n_parts = 2;
        part.part_of_cell.assign(mesh.n_cells(), 0);
        // two far-apart cells form a disconnected part 1
        part.part_of_cell[0] = 1;
        part.part_of_cell[mesh.n_cells() - 1] = 1;
        CHECK_THROWS_MATCHES(agglomerate(mesh, part), agglomeration_topology_error,
                             Catch::Matchers::Predicate<agglomeration_topology_error>(
                                 [](const auto& e) { return e.part == 1; }));
    }
    SECTION("part with a hole raises a topology error") {
        const auto mesh = gen_hexagonal(8);
        // find an interior cell and build a part of everything except it
        int hole = -1;
        for (int c = 0; c < mesh.n_cells() && hole < 0; ++c) {
            bool interior = true;
            for (int v : mesh.cells[c]) interior = interior && !mesh.boundary_vertex[v];
            if (interior) hole = c;
        }
        REQUIRE(hole >= 0);
        Partition part;
        part.n_parts = 2;
        part.part_of_cell.assign(mesh.n_cells(), 0);
        part.part_of_cell[hole] = 1;
        CHECK_THROWS_AS(agglomerate(mesh, part), agglomeration_topology_error);
    }
}

TEST_CASE("mesh file round trip") {
    SECTION("save then load is the identity") {
        const auto mesh = gen_hexagonal(10);
        const std::string path = "mesh_roundtrip_test.txt";
        save_mesh(mesh, path);
        const auto loaded = load_mesh(path);
        CHECK(loaded.vertices == mesh.vertices);  // bit-exact via hex floats
        CHECK(loaded.cells == mesh.cells);
        CHECK(loaded.boundary_vertex == mesh.boundary_vertex);

        // byte-identical serialization of a regenerated mesh
        const std::string path2 = "mesh_roundtrip_test2.txt";
        save_mesh(gen_hexagonal(10), path2);
        CHECK(file_bytes(path) == file_bytes(path2));
        std::remove(path.c_str());
        std::remove(path2.c_str());
    }
    SECTION("truncated file is a parse error with a line number") {
        const std::string path = "mesh_truncated_test.txt";
        {
            std::ofstream out(path);
            out << "POLYMESH 1\n4 1\n0x0p+0 0x0p+0\n0x1p+0 0x0p+0\n";
        }
        CHECK_THROWS_MATCHES(load_mesh(path), parse_error,
                             Catch::Matchers::Predicate<parse_error>(
                                 [](const parse_error& e) { return e.line == 5; }));
        std::remove(path.c_str());
    }
    SECTION("clockwise cell is a validation error") {
        const std::string path = "mesh_cw_test.txt";
        {
            std::ofstream out(path);
            out << "POLYMESH 1\n4 1\n0 0\n1 0\n1 1\n0 1\n4 0 3 2 1\n";
        }
        CHECK_THROWS_AS(load_mesh(path), mesh_validation_error);
        std::remove(path.c_str());
    }
}
