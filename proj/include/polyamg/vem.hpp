#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "polyamg/csr.hpp"
#include "polyamg/dense.hpp"
#include "polyamg/errors.hpp"
#include "polyamg/geometry.hpp"
#include "polyamg/mesh.hpp"

namespace polyamg {

/// Local operators of the lowest-order virtual element space on one
/// polygon with N vertices, in the scaled monomial basis
/// { 1, (x-x_K)/h_K, (y-y_K)/h_K }:
///   D       N x 3   dof values of the monomials
///   B       3 x N   energy-projector right-hand side (edge integrals)
///   G = B D 3 x 3   projector system matrix
///   Pi_star 3 x N   monomial coefficients of the projection
///   Pi_dof  N x N   projector in dof coordinates (idempotent)
///   K_loc   N x N   consistency + stabilization stiffness
struct LocalElementMatrices {
    DenseMatrix D, B, G, Pi_star, Pi_dof, K_loc;
    double area = 0.0;
    double diameter = 0.0;
    Vec2 centroid;
};

/// Piecewise-constant diffusion coefficient, one value per cell.
struct CoefficientField {
    std::vector<double> rho_of_cell;
};

/// Assembled linear system with boundary conditions applied; boundary
/// rows are identity rows so the size stays N_v.
struct DiscreteSystem {
    CsrMatrix A;
    std::vector<double> b;
    std::vector<int> boundary_dofs;
};

/// Energy projector onto linears. The constant part is fixed by
/// preserving the vertex average (first row of B is 1/N); the diffusion
/// coefficient cancels in the projector and only scales the stiffness.
inline LocalElementMatrices local_projector(std::span<const Vec2> pts, double rho_k,
                                            int cell_index = -1) {
    (void)rho_k;
    const int n = int(pts.size());
    if (n < 3) throw degenerate_element_error("local_projector: fewer than 3 vertices", cell_index);
    LocalElementMatrices m;
    m.area = polygon_signed_area(pts);
    if (!(m.area > 0.0))
        throw degenerate_element_error("local_projector: non-positive cell area", cell_index);
    m.centroid = polygon_centroid(pts);
    m.diameter = polygon_diameter(pts);
    const double h = m.diameter;

    m.D = DenseMatrix(n, 3);
    for (int i = 0; i < n; ++i) {
        m.D(i, 0) = 1.0;
        m.D(i, 1) = (pts[i].x - m.centroid.x) / h;
        m.D(i, 2) = (pts[i].y - m.centroid.y) / h;
    }

    // B rows 2,3: grad m_alpha . sum of scaled outward normals of the two
    // edges meeting at each vertex; exact for linear traces (trapezoid rule)
    m.B = DenseMatrix(3, n);
    for (int i = 0; i < n; ++i) {
        m.B(0, i) = 1.0 / n;
        const Vec2 prev = pts[(i + n - 1) % n];
        const Vec2 next = pts[(i + 1) % n];
        // |e| n_e of a CCW edge (a,b) is (b.y - a.y, a.x - b.x)
        const Vec2 scaled_normal{0.5 * (next.y - prev.y), 0.5 * (prev.x - next.x)};
        m.B(1, i) = scaled_normal.x / h;
        m.B(2, i) = scaled_normal.y / h;
    }

    m.G = m.B * m.D;
    m.Pi_star = DenseMatrix(3, n);
    try {
        for (int j = 0; j < n; ++j) {
            const auto col = solve3x3(m.G, {m.B(0, j), m.B(1, j), m.B(2, j)});
            for (int r = 0; r < 3; ++r) m.Pi_star(r, j) = col[r];
        }
    } catch (const error&) {
        throw degenerate_element_error("local_projector: singular projector system "
                                       "(zero-area or collinear cell)", cell_index);
    }
    m.Pi_dof = m.D * m.Pi_star;
    return m;
}

/// Local stiffness: consistency part from the projector plus the
/// dofi-dofi stabilization, both scaled linearly by rho_K.
inline LocalElementMatrices local_stiffness(std::span<const Vec2> pts, double rho_k,
                                            int cell_index = -1) {
    LocalElementMatrices m = local_projector(pts, rho_k, cell_index);
    const int n = m.D.rows();
    DenseMatrix g_tilde = m.G;
    for (int j = 0; j < 3; ++j) g_tilde(0, j) = 0.0;  // drop the constant-fixing row

    // K = Pi_star^T (G~ + D^T D) Pi_star - Pi - Pi^T + I, using
    // (I-Pi)^T (I-Pi) = I - Pi - Pi^T + Pi_star^T (D^T D) Pi_star
    DenseMatrix core = g_tilde + m.D.transposed() * m.D;
    DenseMatrix k = m.Pi_star.transposed() * (core * m.Pi_star);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            k(i, j) -= m.Pi_dof(i, j) + m.Pi_dof(j, i);
            if (i == j) k(i, j) += 1.0;
        }
    k.scale(rho_k);
    m.K_loc = std::move(k);
    return m;
}

/// Scatter-add of the local stiffness matrices.
inline CsrMatrix assemble(const PolygonalMesh& mesh, const CoefficientField& rho) {
    if (int(rho.rho_of_cell.size()) != mesh.n_cells())
        throw invalid_parameter("assemble: coefficient field does not match mesh");
    const int nv = mesh.n_vertices();
    CooBuilder coo(nv, nv);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto pts = mesh.cell_points(c);
        const auto loc = local_stiffness(pts, rho.rho_of_cell[c], c);
        const auto& loop = mesh.cells[c];
        const int k = int(loop.size());
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) coo.add(loop[i], loop[j], loc.K_loc(i, j));
    }
    return coo.finalize(/*symmetric=*/true);
}

/// Load vector with the one-point projection of f onto constants and the
/// vertex-average surrogate for the virtual test functions:
/// f_j = sum over cells K containing j of f(centroid_K) |K| / N_K.
inline std::vector<double> assemble_rhs(const PolygonalMesh& mesh,
                                        const std::function<double(Vec2)>& f) {
    std::vector<double> rhs(mesh.n_vertices(), 0.0);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto pts = mesh.cell_points(c);
        const double area = polygon_signed_area(pts);
        const double fbar = f(polygon_centroid(pts));
        const double w = fbar * area / double(pts.size());
        for (int v : mesh.cells[c]) rhs[v] += w;
    }
    return rhs;
}

/// Same with one constant load value per cell.
inline std::vector<double> assemble_rhs(const PolygonalMesh& mesh,
                                        std::span<const double> f_of_cell) {
    if (int(f_of_cell.size()) != mesh.n_cells())
        throw invalid_parameter("assemble_rhs: per-cell loads do not match mesh");
    std::vector<double> rhs(mesh.n_vertices(), 0.0);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto pts = mesh.cell_points(c);
        const double area = polygon_signed_area(pts);
        const double w = f_of_cell[c] * area / double(pts.size());
        for (int v : mesh.cells[c]) rhs[v] += w;
    }
    return rhs;
}

/// Symmetric elimination of Dirichlet dofs keeping the system size:
/// boundary rows/columns become identity, interior b picks up -A_ig g.
inline DiscreteSystem apply_dirichlet(const CsrMatrix& a, std::span<const double> b,
                                      std::span<const int> boundary_dofs,
                                      std::span<const double> g) {
    if (a.n_rows != a.n_cols || int(b.size()) != a.n_rows)
        throw dimension_mismatch("apply_dirichlet: shape mismatch");
    if (boundary_dofs.size() != g.size())
        throw dimension_mismatch("apply_dirichlet: boundary values do not match dofs");
    const int n = a.n_rows;
    std::vector<char> is_boundary(n, 0);
    std::vector<double> gval(n, 0.0);
    for (std::size_t k = 0; k < boundary_dofs.size(); ++k) {
        is_boundary[boundary_dofs[k]] = 1;
        gval[boundary_dofs[k]] = g[k];
    }
    DiscreteSystem sys;
    sys.b.assign(b.begin(), b.end());
    sys.boundary_dofs.assign(boundary_dofs.begin(), boundary_dofs.end());
    CooBuilder coo(n, n);
    for (int i = 0; i < n; ++i) {
        if (is_boundary[i]) {
            coo.add(i, i, 1.0);
            sys.b[i] = gval[i];
            continue;
        }
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            const int j = a.col_idx[k];
            if (is_boundary[j])
                sys.b[i] -= a.values[k] * gval[j];
            else
                coo.add(i, j, a.values[k]);
        }
    }
    sys.A = coo.finalize(/*symmetric=*/true);
    return sys;
}

/// Dirichlet data evaluated at the mesh's boundary vertices.
inline std::pair<std::vector<int>, std::vector<double>>
boundary_values(const PolygonalMesh& mesh, const std::function<double(Vec2)>& g) {
    std::vector<int> dofs;
    std::vector<double> vals;
    for (int i = 0; i < mesh.n_vertices(); ++i)
        if (mesh.boundary_vertex[i]) {
            dofs.push_back(i);
            vals.push_back(g(mesh.vertices[i]));
        }
    return {std::move(dofs), std::move(vals)};
}

/// L2 and H1-seminorm errors of the projected discrete solution against
/// an exact solution, by fan triangulation from the centroid and the
/// degree-2-exact edge-midpoint rule per triangle. The L2 part compares
/// Pi u_h (a linear per cell), not the virtual function itself.
inline std::pair<double, double>
error_norms(const PolygonalMesh& mesh, std::span<const double> u_h,
            const std::function<double(Vec2)>& u_exact,
            const std::function<Vec2(Vec2)>& grad_u_exact) {
    if (int(u_h.size()) != mesh.n_vertices())
        throw dimension_mismatch("error_norms: solution size does not match mesh");
    double l2_sq = 0.0, h1_sq = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto pts = mesh.cell_points(c);
        const auto loc = local_projector(pts, 1.0, c);
        const int k = int(pts.size());
        std::vector<double> dofs(k);
        for (int i = 0; i < k; ++i) dofs[i] = u_h[mesh.cells[c][i]];
        const auto coeff = loc.Pi_star.apply(dofs);  // monomial coefficients
        const double h = loc.diameter;
        const Vec2 grad_pi{coeff[1] / h, coeff[2] / h};
        auto pi_value = [&](Vec2 q) {
            return coeff[0] + coeff[1] * (q.x - loc.centroid.x) / h +
                   coeff[2] * (q.y - loc.centroid.y) / h;
        };
        const Vec2 c0 = loc.centroid;
        for (int e = 0; e < k; ++e) {
            const Vec2 p1 = pts[e], p2 = pts[(e + 1) % k];
            const double tri_area = 0.5 * cross(p1 - c0, p2 - c0);  // signed
            const Vec2 m01 = 0.5 * (c0 + p1), m12 = 0.5 * (p1 + p2), m20 = 0.5 * (p2 + c0);
            double l2_part = 0.0, h1_part = 0.0;
            for (const Vec2 q : {m01, m12, m20}) {
                const double de = pi_value(q) - u_exact(q);
                l2_part += de * de;
                const Vec2 dg = grad_pi - grad_u_exact(q);
                h1_part += dot(dg, dg);
            }
            l2_sq += tri_area / 3.0 * l2_part;
            h1_sq += tri_area / 3.0 * h1_part;
        }
    }
    return {std::sqrt(std::max(0.0, l2_sq)), std::sqrt(std::max(0.0, h1_sq))};
}

} // namespace polyamg
