#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polyamg/amg.hpp"
#include "polyamg/cholesky.hpp"
#include "polyamg/csr.hpp"
#include "polyamg/errors.hpp"

namespace polyamg {

enum class StoppingKind { relative, absolute };

/// Residual-based stopping. Relative compares ||r|| against ||b||;
/// absolute against the given tolerance directly. Tolerances below 1e-13
/// are clamped there: tighter values are not attainable in double
/// precision for these assemblies.
struct StoppingRule {
    StoppingKind kind = StoppingKind::relative;
    double tol = 1e-10;
    int max_iters = 10000;

    double effective_tol() const { return std::max(tol, 1e-13); }
};

struct SolveReport {
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_history;  // ||r_k||, including k = 0
    std::optional<double> kappa_estimate;
    double setup_time = 0.0;  // seconds
    double solve_time = 0.0;  // seconds
};

/// Extreme eigenvalues of a symmetric tridiagonal matrix by bisection on
/// the Sturm sequence (count of eigenvalues below t from the shifted LDL
/// recurrence).
inline std::pair<double, double>
tridiagonal_extreme_eigenvalues(std::span<const double> diag, std::span<const double> off) {
    const int k = int(diag.size());
    double lo = diag[0], hi = diag[0];
    for (int i = 0; i < k; ++i) {
        const double radius = (i > 0 ? std::abs(off[i - 1]) : 0.0) +
                              (i + 1 < k ? std::abs(off[i]) : 0.0);
        lo = std::min(lo, diag[i] - radius);
        hi = std::max(hi, diag[i] + radius);
    }
    auto count_below = [&](double t) {
        int count = 0;
        double d = 1.0;
        for (int i = 0; i < k; ++i) {
            const double offsq = i > 0 ? off[i - 1] * off[i - 1] : 0.0;
            d = diag[i] - t - offsq / d;
            if (d == 0.0) d = -1e-300;
            if (d < 0.0) ++count;
        }
        return count;
    };
    auto bisect = [&](int want) {  // smallest t0 with count_below(t0) >= want
        double a = lo, b = hi + (hi - lo) * 1e-12 + 1e-300;
        for (int it = 0; it < 120 && b - a > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
            const double mid = 0.5 * (a + b);
            if (count_below(mid) >= want)
                b = mid;
            else
                a = mid;
        }
        return 0.5 * (a + b);
    };
    return {bisect(1), bisect(k)};
}

/// Spectral condition estimate from the CG coefficients via the Lanczos
/// tridiagonal T_k: diagonal 1/alpha_k + beta_{k-1}/alpha_{k-1},
/// off-diagonal sqrt(beta_k)/alpha_k. With preconditioning this estimates
/// kappa(M^-1 A).
inline double lanczos_kappa(std::span<const double> alphas, std::span<const double> betas) {
    const int k = int(alphas.size());
    if (k == 0) throw invalid_parameter("lanczos_kappa: no CG iterations recorded");
    std::vector<double> diag(k), off(std::max(0, k - 1));
    for (int i = 0; i < k; ++i) {
        diag[i] = 1.0 / alphas[i];
        if (i > 0) diag[i] += betas[i - 1] / alphas[i - 1];
        if (i + 1 < k) off[i] = std::sqrt(betas[i]) / alphas[i];
    }
    const auto [lmin, lmax] = tridiagonal_extreme_eigenvalues(diag, off);
    return lmax / lmin;
}

/// Preconditioner action z = M^-1 r; an empty function means identity.
using Preconditioner = std::function<std::vector<double>(const std::vector<double>&)>;

/// Standard preconditioned conjugate gradient. Records the residual
/// history and the CG coefficients, from which the condition number of
/// the (preconditioned) operator is estimated on exit.
inline std::pair<std::vector<double>, SolveReport>
pcg(const CsrMatrix& a, std::span<const double> b, const Preconditioner& precond,
    const StoppingRule& stop, std::span<const double> x0 = {}) {
    if (a.n_rows != a.n_cols || int(b.size()) != a.n_rows)
        throw dimension_mismatch("pcg: shape mismatch");
    const int n = a.n_rows;
    std::vector<double> x(n, 0.0);
    if (!x0.empty()) {
        if (int(x0.size()) != n) throw dimension_mismatch("pcg: bad initial guess size");
        x.assign(x0.begin(), x0.end());
    }
    auto norm2 = [](std::span<const double> v) {
        double s = 0.0;
        for (double t : v) s += t * t;
        return std::sqrt(s);
    };

    SolveReport report;
    const double norm_b = norm2(b);
    const double tol = stop.effective_tol();
    const double threshold = stop.kind == StoppingKind::relative ? tol * norm_b : tol;

    std::vector<double> r(n), z, p(n), ap(n);
    spmv_into(a, x, r);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double res_norm = norm2(r);
    report.residual_history.push_back(res_norm);
    if (res_norm <= threshold) {
        report.converged = true;
        return {std::move(x), std::move(report)};
    }

    std::vector<double> alphas, betas;
    z = precond ? precond(r) : r;
    double rho = 0.0;
    for (int i = 0; i < n; ++i) rho += r[i] * z[i];
    if (rho <= 0.0)
        throw indefinite_preconditioner_error("pcg: <M^-1 r, r> <= 0 at start");
    p = z;

    while (report.iterations < stop.max_iters) {
        spmv_into(a, p, ap);
        double p_ap = 0.0;
        for (int i = 0; i < n; ++i) p_ap += p[i] * ap[i];
        if (p_ap <= 0.0) throw indefinite_operator_error("pcg: <p, A p> <= 0");
        const double alpha = rho / p_ap;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        ++report.iterations;
        alphas.push_back(alpha);
        res_norm = norm2(r);
        report.residual_history.push_back(res_norm);
        if (res_norm <= threshold) {
            report.converged = true;
            break;
        }
        z = precond ? precond(r) : r;
        double rho_next = 0.0;
        for (int i = 0; i < n; ++i) rho_next += r[i] * z[i];
        if (rho_next <= 0.0)
            throw indefinite_preconditioner_error("pcg: <M^-1 r, r> <= 0");
        const double beta = rho_next / rho;
        betas.push_back(beta);
        rho = rho_next;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    if (!alphas.empty()) report.kappa_estimate = lanczos_kappa(alphas, betas);
    return {std::move(x), std::move(report)};
}

enum class SolverChoice { cg, cg_rs_amg, cg_sa_amg, direct };

inline std::string solver_name(SolverChoice c) {
    switch (c) {
        case SolverChoice::cg: return "cg";
        case SolverChoice::cg_rs_amg: return "rs-amg";
        case SolverChoice::cg_sa_amg: return "sa-amg";
        case SolverChoice::direct: return "direct";
    }
    return "?";
}

/// Run one solver on A x = b with x0 = 0, timing setup (factorization or
/// hierarchy build) and solve separately on the monotone clock.
inline std::pair<std::vector<double>, SolveReport>
timed_solve(const CsrMatrix& a, std::span<const double> b, SolverChoice choice,
            const StoppingRule& stop) {
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::duration d) {
        return std::chrono::duration<double>(d).count();
    };
    if (choice == SolverChoice::direct) {
        const auto t0 = clock::now();
        const SparseCholesky factor(a);
        const auto t1 = clock::now();
        std::vector<double> x = factor.solve(std::vector<double>(b.begin(), b.end()));
        const auto t2 = clock::now();
        SolveReport report;
        report.converged = true;
        report.setup_time = seconds(t1 - t0);
        report.solve_time = seconds(t2 - t1);
        std::vector<double> r = spmv(a, x);
        for (int i = 0; i < a.n_rows; ++i) r[i] = b[i] - r[i];
        double rn = 0.0;
        for (double v : r) rn += v * v;
        report.residual_history = {std::sqrt(rn)};
        return {std::move(x), std::move(report)};
    }
    Preconditioner precond;
    AmgHierarchy hierarchy;
    const auto t0 = clock::now();
    if (choice != SolverChoice::cg) {
        AmgConfig config;
        config.kind = choice == SolverChoice::cg_rs_amg ? AmgKind::ruge_stuben
                                                        : AmgKind::smoothed_aggregation;
        hierarchy = build_hierarchy(a, config);
        precond = [&hierarchy](const std::vector<double>& r) { return vcycle(hierarchy, r); };
    }
    const auto t1 = clock::now();
    auto [x, report] = pcg(a, b, precond, stop);
    const auto t2 = clock::now();
    report.setup_time = seconds(t1 - t0);
    report.solve_time = seconds(t2 - t1);
    return {std::move(x), std::move(report)};
}

} // namespace polyamg
