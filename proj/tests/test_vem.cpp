#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "polyamg/bench.hpp"
#include "polyamg/cholesky.hpp"
#include "polyamg/mesh_generators.hpp"
#include "polyamg/vem.hpp"
#include "support/oracles.hpp"

using namespace polyamg;

namespace {

const std::vector<Vec2> unit_square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};

std::vector<Vec2> regular_polygon(int n, double radius, Vec2 center = {0, 0}) {
    std::vector<Vec2> pts(n);
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * std::numbers::pi * i / n;
        pts[i] = {center.x + radius * std::cos(a), center.y + radius * std::sin(a)};
    }
    return pts;
}

std::vector<double> linear_dofs(std::span<const Vec2> pts, double a, double b, double c) {
    std::vector<double> d(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) d[i] = a + b * pts[i].x + c * pts[i].y;
    return d;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double t : v) m = std::max(m, std::abs(t));
    return m;
}

PolygonalMesh two_squares() {
    PolygonalMesh mesh;
    mesh.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {2, 0}, {2, 1}};
    mesh.cells = {{0, 1, 2, 3}, {1, 4, 5, 2}};
    mesh.boundary_vertex.assign(6, 1);
    compute_cell_adjacency(mesh);
    return mesh;
}

} // namespace

TEST_CASE("local projector on the unit square") {
    const auto m = local_projector(unit_square, 1.0);
    SECTION("monomial dof matrix row for vertex (0,0)") {
        CHECK(m.diameter == Catch::Approx(std::sqrt(2.0)));
        CHECK(m.centroid.x == Catch::Approx(0.5));
        CHECK(m.centroid.y == Catch::Approx(0.5));
        CHECK(m.D(0, 0) == 1.0);
        CHECK(m.D(0, 1) == Catch::Approx(-1.0 / (2.0 * std::sqrt(2.0))).margin(1e-15));
        CHECK(m.D(0, 2) == Catch::Approx(-1.0 / (2.0 * std::sqrt(2.0))).margin(1e-15));
    }
    SECTION("G starts with the vertex-average row and is invertible") {
        CHECK(m.G(0, 0) == Catch::Approx(1.0));
        CHECK(m.G(0, 1) == Catch::Approx(0.0).margin(1e-15));
        CHECK(m.G(0, 2) == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("projector is idempotent") {
        const auto diff = m.Pi_dof * m.Pi_dof - m.Pi_dof;
        CHECK(diff.max_abs() <= 1e-10);
    }
}

TEST_CASE("projector reproduces linears on assorted cells") {
    std::vector<std::vector<Vec2>> cells{unit_square, regular_polygon(6, 0.3, {0.4, 0.6}),
                                         regular_polygon(11, 1.7)};
    const auto voro = gen_voronoi(60, 4);
    for (int c = 0; c < 5; ++c) cells.push_back(voro.cell_points(c));
    for (const auto& pts : cells) {
        const auto m = local_projector(pts, 1.0);
        const auto dofs = linear_dofs(pts, 0.7, -1.3, 2.1);
        const auto proj = m.Pi_dof.apply(dofs);
        for (std::size_t i = 0; i < dofs.size(); ++i)
            CHECK(std::abs(proj[i] - dofs[i]) <= 1e-12);
    }
}

TEST_CASE("projector matches the quadrature oracle") {
    SECTION("regular hexagon centered at the origin") {
        const auto pts = regular_polygon(6, 1.0);
        const auto m = local_projector(pts, 1.0);
        const auto ref = oracles::projector_oracle(pts);
        CHECK((m.Pi_dof - ref).max_abs() <= 1e-12);
    }
    SECTION("random voronoi cells") {
        const auto voro = gen_voronoi(100, 7);
        for (int c = 0; c < voro.n_cells(); c += 7) {
            const auto pts = voro.cell_points(c);
            const auto m = local_projector(pts, 1.0);
            const auto ref = oracles::projector_oracle(pts);
            CHECK((m.Pi_dof - ref).max_abs() <= 1e-12);
        }
    }
}

TEST_CASE("degenerate cells are rejected with the cell index") {
    const std::vector<Vec2> collinear{{0, 0}, {1, 0}, {2, 0}};
    CHECK_THROWS_MATCHES(local_projector(collinear, 1.0, 17), degenerate_element_error,
                         Catch::Matchers::Predicate<degenerate_element_error>(
                             [](const auto& e) { return e.cell == 17; }));
}

TEST_CASE("local stiffness") {
    SECTION("constants are in the kernel on every cell shape") {
        const auto voro = gen_voronoi(50, 2);
        for (int c = 0; c < voro.n_cells(); c += 5) {
            const auto pts = voro.cell_points(c);
            const auto m = local_stiffness(pts, 2.5);
            const std::vector<double> ones(pts.size(), 1.0);
            CHECK(max_abs(m.K_loc.apply(ones)) <= 1e-12 * m.K_loc.max_abs());
        }
    }
    SECTION("consistency: K dofs(p) equals the boundary integral for linear p") {
        for (const auto& pts :
             {unit_square, regular_polygon(7, 0.8, {0.3, 0.3}), gen_voronoi(40, 9).cell_points(3)}) {
            const double rho = 3.25;
            const double b = -0.4, c = 1.9;
            const auto m = local_stiffness(pts, rho);
            const auto kd = m.K_loc.apply(linear_dofs(pts, 0.2, b, c));
            // a^K(phi_i, p) = rho grad(p) . (|e_{i-1}| n_{i-1} + |e_i| n_i) / 2
            const int n = int(pts.size());
            double scale = 0.0;
            for (double v : kd) scale = std::max(scale, std::abs(v));
            for (int i = 0; i < n; ++i) {
                const Vec2 prev = pts[(i + n - 1) % n];
                const Vec2 next = pts[(i + 1) % n];
                const double exact =
                    rho * 0.5 * (b * (next.y - prev.y) + c * (prev.x - next.x));
                CHECK(std::abs(kd[i] - exact) <= 1e-12 * std::max(1.0, scale));
            }
        }
    }
    SECTION("spectral comparison with a fan-triangulation FEM oracle") {
        // nonzero eigenvalues must be positive; the spread against the P1
        // Dirichlet energy is recorded as an observed equivalence range
        const auto voro = gen_voronoi(100, 7);
        double c0 = std::numeric_limits<double>::infinity(), c1 = 0.0;
        for (int c = 0; c < voro.n_cells(); c += 9) {
            const auto pts = voro.cell_points(c);
            const auto m = local_stiffness(pts, 1.0);
            const auto eig = oracles::jacobi_eigenvalues(m.K_loc);
            const double max_eig = eig.back();
            REQUIRE(max_eig > 0.0);
            for (double v : eig)
                if (std::abs(v) > 1e-14 * max_eig) CHECK(v >= 1e-14 * max_eig);

            // Rayleigh-quotient spread of K_vem against condensed P1 energy
            const auto fem = oracles::fem_fan_stiffness(pts);
            SeededRng rng(31);
            for (int trial = 0; trial < 8; ++trial) {
                std::vector<double> x(pts.size());
                double mean = 0.0;
                for (double& v : x) mean += (v = rng.uniform(-1.0, 1.0));
                for (double& v : x) v -= mean / double(x.size());
                const auto kx = m.K_loc.apply(x);
                const auto fx = oracles::dense_apply(fem, x);
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    num += x[i] * kx[i];
                    den += x[i] * fx[i];
                }
                REQUIRE(den > 0.0);
                c0 = std::min(c0, num / den);
                c1 = std::max(c1, num / den);
            }
        }
        INFO("observed energy-equivalence range [" << c0 << ", " << c1 << "]");
        CHECK(c0 > 0.0);
        CHECK(std::isfinite(c1));
    }
}

TEST_CASE("assemble") {
    SECTION("single cell equals its local stiffness") {
        PolygonalMesh mesh;
        mesh.vertices = unit_square;
        mesh.cells = {{0, 1, 2, 3}};
        mesh.boundary_vertex.assign(4, 1);
        compute_cell_adjacency(mesh);
        const auto a = assemble(mesh, {{1.0}});
        const auto k = local_stiffness(unit_square, 1.0).K_loc;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) CHECK(a(i, j) == Catch::Approx(k(i, j)).margin(1e-15));
    }
    SECTION("two squares sharing an edge add their local diagonals") {
        const auto mesh = two_squares();
        const auto a = assemble(mesh, {{1.0, 1.0}});
        const auto k = local_stiffness(unit_square, 1.0).K_loc;
        // vertex 1 is local dof 1 of cell 0 and local dof 0 of cell 1
        CHECK(a(1, 1) == Catch::Approx(k(1, 1) + k(0, 0)));
        CHECK(a(2, 2) == Catch::Approx(k(2, 2) + k(3, 3)));
    }
    SECTION("hexagonal mesh: symmetry and zero row sums") {
        const auto mesh = gen_hexagonal(6);
        CoefficientField rho;
        rho.rho_of_cell.assign(mesh.n_cells(), 1.0);
        const auto a = assemble(mesh, rho);
        REQUIRE(a.symmetric);
        const auto at = transpose(a);
        double asym = 0.0, max_v = 0.0;
        for (int k = 0; k < a.nnz(); ++k) {
            asym = std::max(asym, std::abs(a.values[k] - at.values[k]));
            max_v = std::max(max_v, std::abs(a.values[k]));
        }
        CHECK(asym <= 1e-13 * max_v);
        const auto row_sums = spmv(a, std::vector<double>(a.n_rows, 1.0));
        CHECK(max_abs(row_sums) <= 1e-11);
    }
    SECTION("coefficient scaling is exact for power-of-two rho") {
        const auto mesh = gen_voronoi(30, 15);
        CoefficientField ones, fours;
        ones.rho_of_cell.assign(mesh.n_cells(), 1.0);
        fours.rho_of_cell.assign(mesh.n_cells(), 4.0);
        const auto a1 = assemble(mesh, ones);
        const auto a4 = assemble(mesh, fours);
        REQUIRE(a1.nnz() == a4.nnz());
        for (int k = 0; k < a1.nnz(); ++k) CHECK(a4.values[k] == 4.0 * a1.values[k]);
    }
    SECTION("degenerate cell is reported with its index") {
        PolygonalMesh mesh;
        mesh.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {2, 0.5}};
        mesh.cells = {{0, 1, 2, 3}, {1, 4, 2}};
        mesh.cells[1] = {1, 4, 4};  // repeated vertex -> zero area
        mesh.boundary_vertex.assign(5, 1);
        CHECK_THROWS_MATCHES(assemble(mesh, {{1.0, 1.0}}), degenerate_element_error,
                             Catch::Matchers::Predicate<degenerate_element_error>(
                                 [](const auto& e) { return e.cell == 1; }));
    }
}

TEST_CASE("assemble_rhs") {
    PolygonalMesh mesh;
    mesh.vertices = unit_square;
    mesh.cells = {{0, 1, 2, 3}};
    mesh.boundary_vertex.assign(4, 1);
    SECTION("constant one on the unit square") {
        const auto rhs = assemble_rhs(mesh, [](Vec2) { return 1.0; });
        for (double v : rhs) CHECK(v == Catch::Approx(0.25));
    }
    SECTION("zero load") {
        const auto rhs = assemble_rhs(mesh, [](Vec2) { return 0.0; });
        CHECK(max_abs(rhs) == 0.0);
    }
    SECTION("load conservation on a voronoi mesh") {
        const auto voro = gen_voronoi(80, 6);
        auto f = [](Vec2 p) { return std::sin(3.0 * p.x) + p.y; };
        const auto rhs = assemble_rhs(voro, f);
        double total = 0.0;
        for (double v : rhs) total += v;
        double expected = 0.0;
        for (int c = 0; c < voro.n_cells(); ++c) {
            const auto pts = voro.cell_points(c);
            expected += f(polygon_centroid(pts)) * polygon_signed_area(pts);
        }
        CHECK(total == Catch::Approx(expected).margin(1e-12));
    }
}

TEST_CASE("apply_dirichlet") {
    const auto mesh = gen_hexagonal(5);
    CoefficientField rho;
    rho.rho_of_cell.assign(mesh.n_cells(), 1.0);
    const auto a = assemble(mesh, rho);
    SECTION("zero data keeps the interior load and zeroes the boundary") {
        const auto rhs = assemble_rhs(mesh, [](Vec2 p) { return p.x + 0.2; });
        const auto [dofs, vals] = boundary_values(mesh, [](Vec2) { return 0.0; });
        const auto sys = apply_dirichlet(a, rhs, dofs, vals);
        for (int i = 0; i < mesh.n_vertices(); ++i) {
            if (mesh.boundary_vertex[i])
                CHECK(sys.b[i] == 0.0);
            else
                CHECK(sys.b[i] == rhs[i]);
        }
    }
    SECTION("result is symmetric with unit boundary diagonal") {
        const std::vector<double> rhs(mesh.n_vertices(), 0.0);
        const auto [dofs, vals] = boundary_values(mesh, [](Vec2 p) { return p.y; });
        const auto sys = apply_dirichlet(a, rhs, dofs, vals);
        const auto at = transpose(sys.A);
        for (int k = 0; k < sys.A.nnz(); ++k)
            CHECK(std::abs(sys.A.values[k] - at.values[k]) <= 1e-13);
        for (int d : dofs) {
            CHECK(sys.A(d, d) == 1.0);
            CHECK(sys.A.row_ptr[d + 1] - sys.A.row_ptr[d] == 1);
        }
        CHECK_NOTHROW(SparseCholesky(sys.A));  // SPD after elimination
    }
    SECTION("patch test: linear solutions are reproduced exactly") {
        auto linear = [](Vec2 p) { return 0.3 - 1.1 * p.x + 0.7 * p.y; };
        const auto rhs = assemble_rhs(mesh, [](Vec2) { return 0.0; });
        const auto [dofs, vals] = boundary_values(mesh, linear);
        const auto sys = apply_dirichlet(a, rhs, dofs, vals);
        const auto x = SparseCholesky(sys.A).solve(sys.b);
        double err = 0.0;
        for (int i = 0; i < mesh.n_vertices(); ++i)
            err = std::max(err, std::abs(x[i] - linear(mesh.vertices[i])));
        CHECK(err <= 1e-10);
    }
}

TEST_CASE("direct solver on assembled systems") {
    SECTION("hexagonal system with b = A*1 returns ones") {
        const auto mesh = gen_hexagonal(24);  // ~1000 dofs
        CoefficientField rho;
        rho.rho_of_cell.assign(mesh.n_cells(), 1.0);
        const auto a = assemble(mesh, rho);
        const std::vector<double> rhs(mesh.n_vertices(), 0.0);
        const auto [dofs, vals] = boundary_values(mesh, [](Vec2) { return 1.0; });
        const auto sys = apply_dirichlet(a, rhs, dofs, vals);
        const auto b = spmv(sys.A, std::vector<double>(sys.A.n_rows, 1.0));
        const auto x = SparseCholesky(sys.A).solve(b);
        for (double v : x) CHECK(v == Catch::Approx(1.0).margin(1e-10));
    }
    SECTION("relative residual on a voronoi system") {
        const auto mesh = gen_voronoi(2500, 3);  // ~5000 dofs
        CoefficientField rho;
        rho.rho_of_cell.assign(mesh.n_cells(), 1.0);
        const auto a = assemble(mesh, rho);
        const auto rhs = assemble_rhs(mesh, [](Vec2 p) { return manufactured_f(p, 1.0); });
        const auto [dofs, vals] = boundary_values(mesh, [](Vec2) { return 0.0; });
        const auto sys = apply_dirichlet(a, rhs, dofs, vals);
        const auto x = SparseCholesky(sys.A).solve(sys.b);
        const auto ax = spmv(sys.A, x);
        double rn = 0.0, bn = 0.0;
        for (int i = 0; i < sys.A.n_rows; ++i) {
            rn += (sys.b[i] - ax[i]) * (sys.b[i] - ax[i]);
            bn += sys.b[i] * sys.b[i];
        }
        CHECK(std::sqrt(rn) <= 1e-12 * std::sqrt(bn));
    }
}

TEST_CASE("error norms") {
    const auto mesh = gen_hexagonal(6);
    SECTION("exact linear has zero error") {
        auto u = [](Vec2 p) { return 1.0 + 2.0 * p.x - 0.5 * p.y; };
        std::vector<double> u_h(mesh.n_vertices());
        for (int i = 0; i < mesh.n_vertices(); ++i) u_h[i] = u(mesh.vertices[i]);
        const auto [l2, h1] = error_norms(mesh, u_h, u, [](Vec2) { return Vec2{2.0, -0.5}; });
        CHECK(l2 <= 1e-12);
        CHECK(h1 <= 1e-12);
    }
    SECTION("zero against the constant one has unit L2 error") {
        const std::vector<double> zero(mesh.n_vertices(), 0.0);
        const auto [l2, h1] =
            error_norms(mesh, zero, [](Vec2) { return 1.0; }, [](Vec2) { return Vec2{0, 0}; });
        CHECK(l2 == Catch::Approx(1.0).margin(1e-10));
        CHECK(h1 == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("second-order L2 convergence on refinement") {
        auto solve_error = [](int m) {
            const auto mesh = gen_hexagonal(m);
            CoefficientField rho;
            rho.rho_of_cell.assign(mesh.n_cells(), 1.0);
            const auto a = assemble(mesh, rho);
            const auto rhs = assemble_rhs(mesh, [](Vec2 p) { return manufactured_f(p, 1.0); });
            const auto [dofs, vals] = boundary_values(mesh, [](Vec2) { return 0.0; });
            const auto sys = apply_dirichlet(a, rhs, dofs, vals);
            const auto x = SparseCholesky(sys.A).solve(sys.b);
            return error_norms(mesh, x, manufactured_u, manufactured_grad_u).first;
        };
        const double e1 = solve_error(12);
        const double e2 = solve_error(24);
        CHECK(e1 / e2 >= 3.4);  // rate ~ 2
    }
}
