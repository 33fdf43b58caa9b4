#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "polyamg/errors.hpp"
#include "polyamg/mesh.hpp"
#include "polyamg/mesh_generators.hpp"
#include "polyamg/partition.hpp"
#include "polyamg/pcg.hpp"
#include "polyamg/rng.hpp"
#include "polyamg/vem.hpp"

namespace polyamg {

/// The manufactured problem: -div(rho grad u) = f on the unit square with
/// u = sin(2 pi x) sin(2 pi y) / (2 pi^2) and homogeneous Dirichlet data.
inline double manufactured_u(Vec2 p) {
    return std::sin(2.0 * std::numbers::pi * p.x) * std::sin(2.0 * std::numbers::pi * p.y) /
           (2.0 * std::numbers::pi * std::numbers::pi);
}

inline Vec2 manufactured_grad_u(Vec2 p) {
    const double c = 1.0 / std::numbers::pi;
    return {c * std::cos(2.0 * std::numbers::pi * p.x) * std::sin(2.0 * std::numbers::pi * p.y),
            c * std::sin(2.0 * std::numbers::pi * p.x) * std::cos(2.0 * std::numbers::pi * p.y)};
}

/// Load for the manufactured solution with constant coefficient rho.
inline double manufactured_f(Vec2 p, double rho) {
    return rho * 4.0 * std::sin(2.0 * std::numbers::pi * p.x) *
           std::sin(2.0 * std::numbers::pi * p.y);
}

/// Checkerboard coefficients: partition the mesh into L parts and give
/// every part rho = 10^alpha with alpha a seeded uniform integer in
/// [-5, 5]; all cells of a part share the value.
inline CoefficientField checkerboard_field(const PolygonalMesh& mesh, int n_parts,
                                           std::uint64_t rng_seed) {
    const Partition part = partition(mesh, n_parts, rng_seed);
    SeededRng rng(rng_seed);
    std::vector<double> rho_of_part(part.n_parts);
    for (double& rho : rho_of_part)
        rho = std::pow(10.0, double(rng.uniform_int(-5, 5)));
    CoefficientField field;
    field.rho_of_cell.resize(mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c)
        field.rho_of_cell[c] = rho_of_part[part.part_of_cell[c]];
    return field;
}

/// One uniform [-1, 1] load value per cell.
inline std::vector<double> random_load(const PolygonalMesh& mesh, std::uint64_t rng_seed) {
    SeededRng rng(rng_seed);
    std::vector<double> f(mesh.n_cells());
    for (double& v : f) v = rng.uniform(-1.0, 1.0);
    return f;
}

enum class MeshFamily { hexa, voro, koch, agg_voro };

inline std::string family_name(MeshFamily f) {
    switch (f) {
        case MeshFamily::hexa: return "hexa";
        case MeshFamily::voro: return "voro";
        case MeshFamily::koch: return "koch";
        case MeshFamily::agg_voro: return "agg-voro";
    }
    return "?";
}

struct MeshSpec {
    MeshFamily family = MeshFamily::hexa;
    int size = 16;                 // hexa: columns; voro: seeds; koch: tiles
    std::uint64_t rng_seed = 1;
    int koch_level = 3;
    int agg_factor = 16;           // agg-voro: cells per agglomerate
};

inline PolygonalMesh build_mesh(const MeshSpec& spec) {
    switch (spec.family) {
        case MeshFamily::hexa: return gen_hexagonal(spec.size);
        case MeshFamily::voro: return gen_voronoi(spec.size, spec.rng_seed);
        case MeshFamily::koch: return gen_koch(spec.koch_level, spec.size);
        case MeshFamily::agg_voro: {
            const PolygonalMesh fine = gen_voronoi(spec.size, spec.rng_seed);
            const int parts = std::max(1, spec.size / spec.agg_factor);
            return agglomerate(fine, partition(fine, parts, spec.rng_seed));
        }
    }
    throw invalid_parameter("build_mesh: unknown family");
}

enum class CoeffKind { constant, checkerboard };

struct CoeffSpec {
    CoeffKind kind = CoeffKind::constant;
    double value = 1.0;      // constant
    int n_parts = 64;        // checkerboard
    std::uint64_t seed = 1;  // checkerboard
};

enum class ProblemKind { manufactured, random_load };

struct ExperimentSpec {
    std::string id;
    MeshSpec mesh;
    CoeffSpec coeff;
    ProblemKind problem = ProblemKind::manufactured;
    std::vector<SolverChoice> solvers{SolverChoice::cg_rs_amg};
    StoppingRule stopping;
    std::uint64_t load_seed = 7;
    /// Mirror the paper's protocol of stopping iterative solvers at the
    /// residual the direct solver attains on the same system.
    bool calibrate_abstol_from_direct = false;
};

struct ResultRow {
    std::string mesh_id;
    int dof = 0;
    std::string solver;
    std::optional<double> kappa;
    int iterations = 0;
    double setup_seconds = 0.0;
    double solve_seconds = 0.0;
    bool converged = false;
    bool failed = false;  // the solver threw; rendered as "*"
};

/// Generate the mesh, field and system of one experiment and run every
/// requested solver on the identical right-hand side with x0 = 0. Solver
/// failures are recorded in-row, not thrown.
inline std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
    if (spec.solvers.empty()) throw invalid_parameter("run_experiment: no solvers requested");
    const PolygonalMesh mesh = build_mesh(spec.mesh);

    CoefficientField field;
    if (spec.coeff.kind == CoeffKind::constant) {
        if (spec.coeff.value <= 0.0)
            throw invalid_parameter("run_experiment: rho must be positive");
        field.rho_of_cell.assign(mesh.n_cells(), spec.coeff.value);
    } else {
        field = checkerboard_field(mesh, spec.coeff.n_parts, spec.coeff.seed);
    }

    std::vector<double> rhs;
    if (spec.problem == ProblemKind::manufactured) {
        if (spec.coeff.kind != CoeffKind::constant)
            throw invalid_parameter(
                "run_experiment: manufactured problem needs a constant coefficient");
        const double rho = spec.coeff.value;
        rhs = assemble_rhs(mesh, [rho](Vec2 p) { return manufactured_f(p, rho); });
    } else {
        rhs = assemble_rhs(mesh, random_load(mesh, spec.load_seed));
    }

    const CsrMatrix a_full = assemble(mesh, field);
    const auto [bdofs, bvals] = boundary_values(mesh, [](Vec2) { return 0.0; });
    const DiscreteSystem sys = apply_dirichlet(a_full, rhs, bdofs, bvals);

    StoppingRule stop = spec.stopping;
    std::optional<std::pair<std::vector<double>, SolveReport>> direct_run;
    if (spec.calibrate_abstol_from_direct) {
        direct_run = timed_solve(sys.A, sys.b, SolverChoice::direct, stop);
        stop.kind = StoppingKind::absolute;
        stop.tol = std::max(1e-13, 10.0 * direct_run->second.residual_history.back());
    }

    std::vector<ResultRow> rows;
    for (const SolverChoice choice : spec.solvers) {
        ResultRow row;
        row.mesh_id = spec.id.empty() ? family_name(spec.mesh.family) : spec.id;
        row.dof = mesh.n_vertices();
        row.solver = solver_name(choice);
        try {
            const auto& run = (choice == SolverChoice::direct && direct_run)
                                  ? *direct_run
                                  : timed_solve(sys.A, sys.b, choice, stop);
            row.kappa = run.second.kappa_estimate;
            row.iterations = run.second.iterations;
            row.setup_seconds = run.second.setup_time;
            row.solve_seconds = run.second.solve_time;
            row.converged = run.second.converged;
        } catch (const error&) {
            row.failed = true;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

enum class EmitFormat { csv, markdown };

namespace detail {

inline std::string fmt_sig(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline std::vector<std::string> row_fields(const ResultRow& r) {
    std::vector<std::string> f;
    f.push_back(r.mesh_id);
    f.push_back(std::to_string(r.dof));
    f.push_back(r.solver);
    if (r.failed) {
        f.insert(f.end(), {"*", "*", "*", "*", "*"});
        return f;
    }
    f.push_back(r.kappa ? fmt_sig(*r.kappa, 3) : "-");
    f.push_back(std::to_string(r.iterations));
    f.push_back(fmt_sig(r.setup_seconds, 5));
    f.push_back(fmt_sig(r.solve_seconds, 5));
    f.push_back(r.converged ? "1" : "0");
    return f;
}

} // namespace detail

inline std::string emit_string(const std::vector<ResultRow>& rows, EmitFormat format) {
    static const char* names[] = {"mesh",    "dof",     "solver",    "kappa",
                                  "its",     "setup_s", "solve_s",   "converged"};
    std::ostringstream out;
    if (format == EmitFormat::csv) {
        for (int i = 0; i < 8; ++i) out << (i ? "," : "") << names[i];
        out << "\n";
        for (const ResultRow& r : rows) {
            const auto f = detail::row_fields(r);
            for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << f[i];
            out << "\n";
        }
    } else {
        out << "|";
        for (int i = 0; i < 8; ++i) out << " " << names[i] << " |";
        out << "\n|";
        for (int i = 0; i < 8; ++i) out << " --- |";
        out << "\n";
        for (const ResultRow& r : rows) {
            const auto f = detail::row_fields(r);
            out << "|";
            for (const std::string& v : f) out << " " << v << " |";
            out << "\n";
        }
    }
    return out.str();
}

inline void emit(const std::vector<ResultRow>& rows, EmitFormat format,
                 const std::string& path) {
    std::ofstream out(path);
    if (!out) throw error("emit: cannot open " + path);
    out << emit_string(rows, format);
}

/// Worker count for suite runs: POLYAMG_THREADS caps it, hardware
/// concurrency is the default.
inline int worker_count() {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("POLYAMG_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return int(std::min<long>(v, hw));
    }
    return int(hw);
}

/// Run independent experiments across worker threads; results come back
/// in spec order regardless of completion order. A thrown solver setup or
/// mesh error marks every row of that experiment as failed.
inline std::vector<std::vector<ResultRow>>
run_experiments(const std::vector<ExperimentSpec>& specs, bool* any_error = nullptr) {
    std::vector<std::vector<ResultRow>> results(specs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> errored{false};
    auto work = [&]() {
        while (true) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= specs.size()) break;
            try {
                results[idx] = run_experiment(specs[idx]);
                for (const ResultRow& r : results[idx])
                    if (r.failed) errored = true;
            } catch (const std::exception&) {
                errored = true;
                ResultRow row;
                row.mesh_id = specs[idx].id;
                row.failed = true;
                results[idx] = {row};
            }
        }
    };
    const int workers = std::min<int>(worker_count(), int(specs.size()));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (any_error) *any_error = errored.load();
    return results;
}

} // namespace polyamg
