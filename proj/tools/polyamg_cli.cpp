// Command-line driver: mesh generation and statistics, single solves, and
// the reproduction benchmark suite (CSV/Markdown output).

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyamg/polyamg.hpp"

namespace {

using namespace polyamg;

MeshFamily parse_family(const std::string& name) {
    if (name == "hexa") return MeshFamily::hexa;
    if (name == "voro") return MeshFamily::voro;
    if (name == "koch") return MeshFamily::koch;
    if (name == "agg-voro") return MeshFamily::agg_voro;
    throw CLI::ValidationError("--family", "unknown family: " + name);
}

SolverChoice parse_solver(const std::string& name) {
    if (name == "cg") return SolverChoice::cg;
    if (name == "rs-amg") return SolverChoice::cg_rs_amg;
    if (name == "sa-amg") return SolverChoice::cg_sa_amg;
    if (name == "direct") return SolverChoice::direct;
    throw CLI::ValidationError("--solver", "unknown solver: " + name);
}

CoeffSpec parse_coeff(const std::string& text, std::uint64_t seed) {
    CoeffSpec coeff;
    coeff.seed = seed;
    if (text.rfind("const:", 0) == 0) {
        coeff.kind = CoeffKind::constant;
        coeff.value = std::stod(text.substr(6));
    } else if (text.rfind("checker:", 0) == 0) {
        coeff.kind = CoeffKind::checkerboard;
        coeff.n_parts = std::stoi(text.substr(8));
    } else {
        throw CLI::ValidationError("--coeff", "expected const:<v> or checker:<L>");
    }
    return coeff;
}

void write_rows(const std::vector<ResultRow>& rows, const std::string& out,
                const std::string& format) {
    const EmitFormat fmt = format == "md" ? EmitFormat::markdown : EmitFormat::csv;
    if (out.empty())
        std::cout << emit_string(rows, fmt);
    else
        emit(rows, fmt, out);
}

/// The desk-scale reproduction suite: constant-coefficient scalability
/// sweeps over all four mesh families plus the checkerboard robustness
/// study; CG and the direct solver are capped at 100k dofs to keep the
/// full run in the minutes range.
std::vector<ExperimentSpec> default_suite(double rtol, int max_iters) {
    std::vector<ExperimentSpec> specs;
    auto push_const = [&](const std::string& id, MeshSpec mesh, bool small) {
        ExperimentSpec spec;
        spec.id = id;
        spec.mesh = mesh;
        spec.problem = ProblemKind::manufactured;
        spec.solvers = {SolverChoice::cg_rs_amg, SolverChoice::cg_sa_amg};
        if (small) {
            spec.solvers.push_back(SolverChoice::cg);
            spec.solvers.push_back(SolverChoice::direct);
        }
        spec.stopping.tol = rtol;
        spec.stopping.max_iters = max_iters;
        specs.push_back(std::move(spec));
    };
    const int hexa_sizes[] = {109, 154, 217, 307, 434};
    for (int m : hexa_sizes)
        push_const("hexa_m" + std::to_string(m), {MeshFamily::hexa, m, 1}, m <= 217);
    const int voro_sizes[] = {10000, 20000, 40000, 80000, 160000};
    for (int n : voro_sizes)
        push_const("voro_" + std::to_string(n), {MeshFamily::voro, n, 1}, n <= 40000);
    for (int level = 1; level <= 3; ++level) {
        MeshSpec mesh{MeshFamily::koch, 16, 1};
        mesh.koch_level = level;
        push_const("koch_l" + std::to_string(level), mesh, true);
    }
    const int agg_sizes[] = {8192, 32768, 131072};
    for (int n : agg_sizes)
        push_const("agg-voro_" + std::to_string(n), {MeshFamily::agg_voro, n, 1}, n <= 32768);

    auto push_checker = [&](const std::string& id, MeshSpec mesh, int parts) {
        ExperimentSpec spec;
        spec.id = id;
        spec.mesh = mesh;
        spec.coeff = {CoeffKind::checkerboard, 1.0, parts, 123};
        spec.problem = ProblemKind::random_load;
        spec.solvers = {SolverChoice::direct, SolverChoice::cg_rs_amg, SolverChoice::cg_sa_amg};
        if (parts == 64) spec.solvers.push_back(SolverChoice::cg);
        spec.stopping.max_iters = max_iters;
        spec.calibrate_abstol_from_direct = true;
        specs.push_back(std::move(spec));
    };
    for (int parts : {64, 256, 1024}) {
        push_checker("hexa-checker_L" + std::to_string(parts), {MeshFamily::hexa, 217, 1}, parts);
        push_checker("voro-checker_L" + std::to_string(parts), {MeshFamily::voro, 40000, 11},
                     parts);
    }
    return specs;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"polyamg: virtual element discretizations on polygonal meshes solved "
                 "with AMG-preconditioned conjugate gradient"};
    app.require_subcommand(1);

    std::string family = "hexa", coeff_text = "const:1", out, format = "csv", mesh_in;
    std::vector<std::string> solver_names;
    int size = 16, max_iters = 10000, koch_level = 3;
    std::uint64_t seed = 1;
    double rtol = 1e-10;
    std::optional<double> abstol;

    auto add_mesh_flags = [&](CLI::App* cmd) {
        cmd->add_option("--family", family, "hexa|voro|koch|agg-voro");
        cmd->add_option("--size", size, "hexa: columns; voro: seeds; koch: tiles");
        cmd->add_option("--seed", seed, "rng seed for random meshes");
        cmd->add_option("--koch-level", koch_level, "snowflake iterate (koch family)");
    };

    CLI::App* mesh = app.add_subcommand("mesh", "mesh generation and statistics");
    mesh->require_subcommand(1);
    CLI::App* mesh_gen = mesh->add_subcommand("gen", "generate a mesh and write it");
    add_mesh_flags(mesh_gen);
    mesh_gen->add_option("--out", out, "output mesh file")->required();
    CLI::App* mesh_stats = mesh->add_subcommand("stats", "mesh quality metrics");
    add_mesh_flags(mesh_stats);
    mesh_stats->add_option("--in", mesh_in, "read a mesh file instead of generating");

    CLI::App* solve = app.add_subcommand("solve", "assemble and solve one problem");
    add_mesh_flags(solve);
    solve->add_option("--coeff", coeff_text, "const:<v> or checker:<L>");
    solve->add_option("--solver", solver_names, "cg|rs-amg|sa-amg|direct (repeatable)");
    solve->add_option("--rtol", rtol, "relative residual tolerance");
    solve->add_option("--abstol", abstol, "absolute residual tolerance (overrides --rtol)");
    solve->add_option("--max-iters", max_iters, "iteration cap");
    solve->add_option("--out", out, "write the result table here (default stdout)");
    solve->add_option("--format", format, "csv|md");

    CLI::App* bench = app.add_subcommand("bench", "benchmark suites");
    CLI::App* bench_suite = bench->add_subcommand("suite", "run the reproduction suite");
    bench_suite->add_option("--rtol", rtol, "relative tolerance for the constant-coefficient runs");
    bench_suite->add_option("--max-iters", max_iters, "iteration cap");
    bench_suite->add_option("--out", out, "write the result table here (default stdout)");
    bench_suite->add_option("--format", format, "csv|md");

    CLI11_PARSE(app, argc, argv);

    try {
        if (mesh_gen->parsed()) {
            MeshSpec spec{parse_family(family), size, seed};
            spec.koch_level = koch_level;
            const auto m = build_mesh(spec);
            validate(m);
            save_mesh(m, out);
            std::printf("wrote %s: %d cells, %d vertices\n", out.c_str(), m.n_cells(),
                        m.n_vertices());
            return 0;
        }
        if (mesh_stats->parsed()) {
            PolygonalMesh m;
            if (!mesh_in.empty()) {
                m = load_mesh(mesh_in);
            } else {
                MeshSpec spec{parse_family(family), size, seed};
                spec.koch_level = koch_level;
                m = build_mesh(spec);
            }
            const auto q = measure(m);
            std::printf("n_elt,n_v,h,h_min,gamma0,gamma1\n");
            std::printf("%d,%d,%.6e,%.6e,%.6e,%.6e\n", q.n_elt, q.n_v, q.h, q.h_min, q.gamma0,
                        q.gamma1);
            return 0;
        }
        if (solve->parsed()) {
            ExperimentSpec spec;
            spec.id = family + "_" + std::to_string(size);
            spec.mesh = {parse_family(family), size, seed};
            spec.mesh.koch_level = koch_level;
            spec.coeff = parse_coeff(coeff_text, seed);
            spec.problem = spec.coeff.kind == CoeffKind::constant ? ProblemKind::manufactured
                                                                  : ProblemKind::random_load;
            if (solver_names.empty()) solver_names = {"rs-amg"};
            spec.solvers.clear();
            for (const auto& name : solver_names) spec.solvers.push_back(parse_solver(name));
            spec.stopping.max_iters = max_iters;
            if (abstol) {
                spec.stopping.kind = StoppingKind::absolute;
                spec.stopping.tol = *abstol;
            } else {
                spec.stopping.tol = rtol;
            }
            const auto rows = run_experiment(spec);
            write_rows(rows, out, format);
            for (const auto& row : rows)
                if (row.failed) return 1;
            return 0;
        }
        if (bench_suite->parsed()) {
            bool any_error = false;
            const auto results = run_experiments(default_suite(rtol, max_iters), &any_error);
            std::vector<ResultRow> rows;
            for (const auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
            write_rows(rows, out, format);
            return any_error ? 1 : 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
