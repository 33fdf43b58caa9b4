#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "polyamg/cholesky.hpp"
#include "polyamg/csr.hpp"
#include "polyamg/dense.hpp"
#include "polyamg/errors.hpp"
#include "polyamg/rng.hpp"

namespace polyamg {

/// Per-row sets of strongly connected columns.
struct StrengthGraph {
    std::vector<std::vector<int>> strong;
    double theta = 0.0;
};

enum class AmgKind { ruge_stuben, smoothed_aggregation };

struct AmgConfig {
    AmgKind kind = AmgKind::ruge_stuben;
    double theta_rs = 0.25;
    double theta_sa = 0.08;
    int n_pre = 1;   // forward Gauss-Seidel sweeps
    int n_post = 1;  // backward Gauss-Seidel sweeps
    int coarse_max = 64;
    int max_levels = 25;
    double sa_omega = -1.0;  // < 0: use 4 / (3 lambda_max-estimate)
};

/// Classical strength of connection: j is strong for i when
/// -a_ij >= theta * max_{k != i} (-a_ik). Rows with no negative
/// off-diagonal get an empty strong set.
inline StrengthGraph strength_rs(const CsrMatrix& a, double theta) {
    if (a.n_rows != a.n_cols) throw invalid_parameter("strength_rs: matrix not square");
    StrengthGraph s;
    s.theta = theta;
    s.strong.resize(a.n_rows);
    for (int i = 0; i < a.n_rows; ++i) {
        double max_neg = 0.0;
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            if (a.col_idx[k] != i) max_neg = std::max(max_neg, -a.values[k]);
        if (max_neg <= 0.0) continue;
        const double cut = theta * max_neg;
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            if (a.col_idx[k] != i && -a.values[k] >= cut) s.strong[i].push_back(a.col_idx[k]);
    }
    return s;
}

enum : char { kFPoint = 0, kCPoint = 1 };

/// Ruge-Stuben first-pass coloring by descending influence measure with
/// the standard +-1 measure updates, followed by an enforcement pass that
/// promotes any F point without a strong C neighbor. Ties pick the lowest
/// index. Isolated rows stay F and interpolate nothing.
inline std::vector<char> cf_split(const StrengthGraph& s) {
    const int n = int(s.strong.size());
    std::vector<std::vector<int>> influences(n);  // S^T
    for (int i = 0; i < n; ++i)
        for (int j : s.strong[i]) influences[j].push_back(i);

    std::vector<int> lambda(n);
    for (int i = 0; i < n; ++i) lambda[i] = int(influences[i].size());
    constexpr char kUnassigned = -1;
    std::vector<char> label(n, kUnassigned);

    std::vector<std::set<int>> bucket(2 * n + 1);
    for (int i = 0; i < n; ++i) bucket[lambda[i]].insert(i);
    int top = 2 * n;
    auto move_bucket = [&](int i, int delta) {
        bucket[lambda[i]].erase(i);
        lambda[i] += delta;
        bucket[lambda[i]].insert(i);
        top = std::max(top, lambda[i]);
    };

    while (true) {
        while (top > 0 && bucket[top].empty()) --top;
        if (top == 0) break;  // remaining nodes have no influence: all F
        const int i = *bucket[top].begin();
        bucket[top].erase(bucket[top].begin());
        label[i] = kCPoint;
        for (int j : influences[i]) {
            if (label[j] != kUnassigned) continue;
            bucket[lambda[j]].erase(j);
            label[j] = kFPoint;
            for (int k : s.strong[j])
                if (label[k] == kUnassigned) move_bucket(k, +1);
        }
        for (int j : s.strong[i])
            if (label[j] == kUnassigned) move_bucket(j, -1);
    }
    for (int i = 0; i < n; ++i)
        if (label[i] == kUnassigned) label[i] = kFPoint;

    // every F point with strong connections must see a C point
    for (int i = 0; i < n; ++i) {
        if (label[i] != kFPoint || s.strong[i].empty()) continue;
        bool has_c = false;
        for (int j : s.strong[i])
            if (label[j] == kCPoint) {
                has_c = true;
                break;
            }
        if (!has_c) label[i] = kCPoint;
    }
    return label;
}

/// Direct interpolation. C rows are unit rows; an F row distributes over
/// its strong C neighbors with the classical weights
///   w_ij = -(a_ij / a~_ii) * (sum of all negative couplings) /
///                            (sum of negative couplings to C_i),
/// where positive off-diagonal couplings are lumped into a~_ii. Rows of P
/// sum to 1 whenever the corresponding row of A sums to 0.
inline CsrMatrix interp_direct(const CsrMatrix& a, const StrengthGraph& s,
                               const std::vector<char>& label) {
    const int n = a.n_rows;
    std::vector<int> coarse_id(n, -1);
    int nc = 0;
    for (int i = 0; i < n; ++i)
        if (label[i] == kCPoint) coarse_id[i] = nc++;

    CooBuilder coo(n, std::max(nc, 1));
    std::vector<char> strong_c(n, 0);
    for (int i = 0; i < n; ++i) {
        if (label[i] == kCPoint) {
            coo.add(i, coarse_id[i], 1.0);
            continue;
        }
        if (s.strong[i].empty()) continue;  // isolated row: injected as zero
        for (int j : s.strong[i])
            if (label[j] == kCPoint) strong_c[j] = 1;

        double a_ii = 0.0, lumped_pos = 0.0, sum_neg = 0.0, sum_c_neg = 0.0;
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            const int j = a.col_idx[k];
            const double v = a.values[k];
            if (j == i)
                a_ii = v;
            else if (v > 0.0)
                lumped_pos += v;  // positive couplings lumped to the diagonal
            else {
                sum_neg += v;
                if (strong_c[j]) sum_c_neg += v;
            }
        }
        const double diag = a_ii + lumped_pos;
        if (sum_c_neg == 0.0)
            throw error("interp_direct: F row " + std::to_string(i) +
                        " has no strong C neighbor");
        const double factor = sum_neg / sum_c_neg;
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            const int j = a.col_idx[k];
            if (j == i || a.values[k] >= 0.0 || !strong_c[j]) continue;
            coo.add(i, coarse_id[j], -(a.values[k] / diag) * factor);
        }
        for (int j : s.strong[i]) strong_c[j] = 0;
    }
    return coo.finalize();
}

/// Root-based aggregation: pass 1 greedily forms disjoint
/// root-neighborhood aggregates over the SA strength rule
/// |a_ij| > theta * sqrt(|a_ii a_jj|); pass 2 attaches leftovers to the
/// aggregate behind their strongest coupling. Returns (agg_of_node, count).
inline std::pair<std::vector<int>, int> aggregate_sa(const CsrMatrix& a, double theta) {
    if (a.n_rows != a.n_cols) throw invalid_parameter("aggregate_sa: matrix not square");
    const int n = a.n_rows;
    std::vector<double> diag(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            if (a.col_idx[k] == i) diag[i] = a.values[k];

    auto is_strong = [&](int i, int k) {
        const int j = a.col_idx[k];
        return j != i &&
               std::abs(a.values[k]) > theta * std::sqrt(std::abs(diag[i] * diag[j]));
    };

    std::vector<int> agg(n, -1);
    int count = 0;
    for (int i = 0; i < n; ++i) {
        if (agg[i] >= 0) continue;
        bool free_neighborhood = true;
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1] && free_neighborhood; ++k)
            if (is_strong(i, k) && agg[a.col_idx[k]] >= 0) free_neighborhood = false;
        if (!free_neighborhood) continue;
        agg[i] = count;
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            if (is_strong(i, k)) agg[a.col_idx[k]] = count;
        ++count;
    }
    for (int i = 0; i < n; ++i) {
        if (agg[i] >= 0) continue;
        int best = -1;
        double best_mag = -1.0;
        for (int pass = 0; pass < 2 && best < 0; ++pass)
            for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
                const int j = a.col_idx[k];
                if (j == i || agg[j] < 0) continue;
                if (pass == 0 && !is_strong(i, k)) continue;
                if (std::abs(a.values[k]) > best_mag) {
                    best_mag = std::abs(a.values[k]);
                    best = agg[j];
                }
            }
        agg[i] = best >= 0 ? best : count++;
    }
    return {std::move(agg), count};
}

/// Rayleigh-quotient estimate of lambda_max(D^-1 A) from 10 power
/// iterations on the symmetrized operator D^-1/2 A D^-1/2, started from a
/// fixed seeded random vector.
inline double estimate_lambda_max_dinv_a(const CsrMatrix& a, int iterations = 10) {
    const int n = a.n_rows;
    std::vector<double> dinv_sqrt(n);
    for (int i = 0; i < n; ++i) {
        double d = 0.0;
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            if (a.col_idx[k] == i) d = a.values[k];
        if (d <= 0.0)
            throw singular_diagonal_error("estimate_lambda_max: non-positive diagonal at row " +
                                          std::to_string(i));
        dinv_sqrt[i] = 1.0 / std::sqrt(d);
    }
    SeededRng rng(0x9e3779b9u);
    std::vector<double> x(n), y(n);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
        std::vector<double> t(n);
        for (int i = 0; i < n; ++i) t[i] = dinv_sqrt[i] * in[i];
        spmv_into(a, t, out);
        for (int i = 0; i < n; ++i) out[i] *= dinv_sqrt[i];
    };
    double rq = 1.0;
    for (int it = 0; it < iterations; ++it) {
        apply(x, y);
        double nx = 0.0, xy = 0.0;
        for (int i = 0; i < n; ++i) {
            nx += x[i] * x[i];
            xy += x[i] * y[i];
        }
        rq = xy / nx;
        double ny = 0.0;
        for (double v : y) ny += v * v;
        ny = std::sqrt(ny);
        if (ny == 0.0) break;
        for (int i = 0; i < n; ++i) x[i] = y[i] / ny;
    }
    return rq;
}

/// Smoothed-aggregation prolongator P = (I - omega D^-1 A) P0 with the
/// piecewise-constant tentative P0. omega < 0 selects 4/(3 lambda_hat).
inline CsrMatrix prolong_sa(const CsrMatrix& a, const std::vector<int>& agg, int n_agg,
                            double omega = -1.0) {
    const int n = a.n_rows;
    if (omega < 0.0) omega = 4.0 / (3.0 * estimate_lambda_max_dinv_a(a));
    std::vector<double> dinv(n);
    for (int i = 0; i < n; ++i) {
        double d = 0.0;
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            if (a.col_idx[k] == i) d = a.values[k];
        if (d == 0.0)
            throw singular_diagonal_error("prolong_sa: zero diagonal at row " +
                                          std::to_string(i));
        dinv[i] = 1.0 / d;
    }
    CooBuilder coo(n, n_agg);
    for (int i = 0; i < n; ++i) {
        coo.add(i, agg[i], 1.0);
        const double w = -omega * dinv[i];
        if (w == 0.0) continue;
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            coo.add(i, agg[a.col_idx[k]], w * a.values[k]);
    }
    return coo.finalize();
}

struct AmgLevel {
    CsrMatrix A;
    CsrMatrix P;  // prolongation from the next-coarser level
    CsrMatrix R;  // P^T, cached for the cycle
};

struct AmgHierarchy {
    std::vector<AmgLevel> levels;
    std::unique_ptr<DenseCholesky> coarse_dense;
    std::unique_ptr<SparseCholesky> coarse_sparse;
    AmgConfig config;

    int n_levels() const { return int(levels.size()); }
};

namespace detail {

inline void symmetrize(CsrMatrix& a) {
    const CsrMatrix t = transpose(a);
    for (int k = 0; k < a.nnz(); ++k) a.values[k] = 0.5 * (a.values[k] + t.values[k]);
    a.symmetric = true;
}

inline void factor_coarsest(AmgHierarchy& h) {
    const CsrMatrix& ac = h.levels.back().A;
    if (ac.n_rows <= 600) {
        DenseMatrix d(ac.n_rows, ac.n_cols);
        for (int i = 0; i < ac.n_rows; ++i)
            for (int k = ac.row_ptr[i]; k < ac.row_ptr[i + 1]; ++k)
                d(i, ac.col_idx[k]) = ac.values[k];
        h.coarse_dense = std::make_unique<DenseCholesky>(d);
    } else {
        h.coarse_sparse = std::make_unique<SparseCholesky>(ac);
    }
}

} // namespace detail

/// Repeated coarsening until the operator fits the coarse solver or the
/// reduction stalls (< 5% fewer unknowns). The coarsest level is factored
/// densely (Cholesky); an over-large stalled coarsest level falls back to
/// the sparse factorization.
inline AmgHierarchy build_hierarchy(const CsrMatrix& a, const AmgConfig& config = {}) {
    if (a.n_rows != a.n_cols) throw invalid_parameter("build_hierarchy: matrix not square");
    AmgHierarchy h;
    h.config = config;
    h.levels.push_back({a, {}, {}});
    while (h.n_levels() < config.max_levels) {
        const CsrMatrix& top = h.levels.back().A;
        if (top.n_rows <= config.coarse_max) break;
        int nc = 0;
        CsrMatrix p;
        if (config.kind == AmgKind::ruge_stuben) {
            const StrengthGraph s = strength_rs(top, config.theta_rs);
            const std::vector<char> label = cf_split(s);
            for (char l : label) nc += l == kCPoint;
            if (nc == 0) {
                if (h.n_levels() == 1)
                    throw degenerate_coarsening_error(
                        "build_hierarchy: no coarse points at the finest level");
                break;
            }
            p = interp_direct(top, s, label);
        } else {
            const auto [agg, count] = aggregate_sa(top, config.theta_sa);
            nc = count;
            p = prolong_sa(top, agg, count, config.sa_omega);
        }
        if (nc > 0.95 * top.n_rows) {
            if (h.n_levels() == 1 && top.n_rows > config.coarse_max)
                throw degenerate_coarsening_error(
                    "build_hierarchy: coarsening stalled at the finest level");
            break;
        }
        CsrMatrix r = transpose(p);
        CsrMatrix ac = rap(r, top, p);
        detail::symmetrize(ac);
        h.levels.back().P = std::move(p);
        h.levels.back().R = std::move(r);
        h.levels.push_back({std::move(ac), {}, {}});
    }
    detail::factor_coarsest(h);
    return h;
}

namespace detail {

inline std::vector<double> vcycle_level(const AmgHierarchy& h, int level,
                                        const std::vector<double>& r) {
    if (level == h.n_levels() - 1)
        return h.coarse_dense ? h.coarse_dense->solve(r) : h.coarse_sparse->solve(r);
    const AmgLevel& lvl = h.levels[level];
    const int n = lvl.A.n_rows;
    std::vector<double> x(n, 0.0);
    for (int s = 0; s < h.config.n_pre; ++s)
        gauss_seidel_sweep(lvl.A, x, r, SweepDirection::forward);
    std::vector<double> resid(n);
    spmv_into(lvl.A, x, resid);
    for (int i = 0; i < n; ++i) resid[i] = r[i] - resid[i];
    const std::vector<double> rc = spmv(lvl.R, resid);
    const std::vector<double> ec = vcycle_level(h, level + 1, rc);
    const std::vector<double> corr = spmv(lvl.P, ec);
    for (int i = 0; i < n; ++i) x[i] += corr[i];
    for (int s = 0; s < h.config.n_post; ++s)
        gauss_seidel_sweep(lvl.A, x, r, SweepDirection::backward);
    return x;
}

} // namespace detail

/// One V(n_pre, n_post)-cycle on A z = r with zero initial guess. With
/// symmetric smoothing (forward pre, backward post, n_pre = n_post) this
/// is a fixed SPD linear operator, usable as a CG preconditioner.
inline std::vector<double> vcycle(const AmgHierarchy& h, const std::vector<double>& r) {
    return detail::vcycle_level(h, 0, r);
}

/// Per-level size/nnz table plus grid and operator complexities.
inline std::string hierarchy_stats_csv(const AmgHierarchy& h) {
    std::ostringstream out;
    out << "level,n,nnz\n";
    double sum_n = 0.0, sum_nnz = 0.0;
    for (int l = 0; l < h.n_levels(); ++l) {
        const CsrMatrix& a = h.levels[l].A;
        out << l << "," << a.n_rows << "," << a.nnz() << "\n";
        sum_n += a.n_rows;
        sum_nnz += a.nnz();
    }
    out << "grid_complexity," << sum_n / h.levels[0].A.n_rows << ",\n";
    out << "operator_complexity," << sum_nnz / std::max(1, h.levels[0].A.nnz()) << ",\n";
    return out.str();
}

} // namespace polyamg
