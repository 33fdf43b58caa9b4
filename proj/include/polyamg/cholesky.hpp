#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <vector>

#include "polyamg/csr.hpp"
#include "polyamg/errors.hpp"

namespace polyamg {

/// Reverse Cuthill-McKee ordering. Returns perm with perm[new] = old,
/// starting each component from a pseudo-peripheral vertex (George-Liu).
inline std::vector<int> reverse_cuthill_mckee(const CsrMatrix& a) {
    const int n = a.n_rows;
    std::vector<int> degree(n);
    for (int i = 0; i < n; ++i) degree[i] = a.row_ptr[i + 1] - a.row_ptr[i];

    std::vector<int> order;
    order.reserve(n);
    std::vector<char> visited(n, 0);
    std::vector<int> level(n);

    auto bfs_levels = [&](int root, std::vector<int>& last_level) {
        std::fill(level.begin(), level.end(), -1);
        std::queue<int> q;
        q.push(root);
        level[root] = 0;
        int depth = 0;
        last_level.assign(1, root);
        std::vector<int> cur{root};
        while (true) {
            std::vector<int> next;
            for (int u : cur)
                for (int k = a.row_ptr[u]; k < a.row_ptr[u + 1]; ++k) {
                    const int v = a.col_idx[k];
                    if (level[v] < 0 && !visited[v]) {
                        level[v] = level[u] + 1;
                        next.push_back(v);
                    }
                }
            if (next.empty()) break;
            ++depth;
            last_level = next;
            cur = std::move(next);
        }
        return depth;
    };

    for (int start = 0; start < n; ++start) {
        if (visited[start]) continue;
        // pseudo-peripheral search: repeat BFS from a min-degree vertex of
        // the deepest level until eccentricity stops growing
        int root = start;
        std::vector<int> last;
        int depth = bfs_levels(root, last);
        while (true) {
            int cand = *std::min_element(last.begin(), last.end(), [&](int l, int r) {
                return degree[l] < degree[r] || (degree[l] == degree[r] && l < r);
            });
            std::vector<int> last2;
            const int depth2 = bfs_levels(cand, last2);
            if (depth2 > depth) {
                depth = depth2;
                root = cand;
                last = std::move(last2);
            } else {
                break;
            }
        }
        // Cuthill-McKee BFS, neighbors by increasing degree
        std::queue<int> q;
        q.push(root);
        visited[root] = 1;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            order.push_back(u);
            std::vector<int> nbrs;
            for (int k = a.row_ptr[u]; k < a.row_ptr[u + 1]; ++k) {
                const int v = a.col_idx[k];
                if (!visited[v]) {
                    visited[v] = 1;
                    nbrs.push_back(v);
                }
            }
            std::sort(nbrs.begin(), nbrs.end(), [&](int l, int r) {
                return degree[l] < degree[r] || (degree[l] == degree[r] && l < r);
            });
            for (int v : nbrs) q.push(v);
        }
    }
    std::reverse(order.begin(), order.end());
    return order;
}

/// Sparse SPD factorization: RCM reordering followed by an envelope
/// (profile) Cholesky. The envelope of the permuted matrix is stored row
/// by row from the first nonzero column to the diagonal. solve() applies
/// one step of iterative refinement against the retained matrix.
class SparseCholesky {
  public:
    explicit SparseCholesky(const CsrMatrix& a) : a_(a) {
        if (a.n_rows != a.n_cols)
            throw dimension_mismatch("sparse_cholesky: matrix not square");
        if (!a.symmetric)
            throw invalid_parameter("sparse_cholesky: matrix must be flagged symmetric");
        const int n = a.n_rows;
        n_ = n;
        perm_ = reverse_cuthill_mckee(a);
        inv_perm_.resize(n);
        for (int i = 0; i < n; ++i) inv_perm_[perm_[i]] = i;

        first_.assign(n, 0);
        for (int io = 0; io < n; ++io) {
            const int i = perm_[io];
            int lo = io;
            for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
                lo = std::min(lo, inv_perm_[a.col_idx[k]]);
            first_[io] = lo;
        }
        start_.assign(n + 1, 0);
        for (int i = 0; i < n; ++i) start_[i + 1] = start_[i] + (i - first_[i] + 1);
        env_.assign(start_[n], 0.0);
        for (int io = 0; io < n; ++io) {
            const int i = perm_[io];
            for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
                const int jo = inv_perm_[a.col_idx[k]];
                if (jo <= io) env_[start_[io] + (jo - first_[io])] = a.values[k];
            }
        }
        factorize();
    }

    int size() const { return n_; }
    std::size_t envelope_size() const { return env_.size(); }

    std::vector<double> solve(const std::vector<double>& b) const {
        std::vector<double> x = factor_solve(b);
        // one refinement sweep tightens the residual to the rounding floor
        std::vector<double> r(n_);
        for (int i = 0; i < n_; ++i) {
            double s = b[i];
            for (int k = a_.row_ptr[i]; k < a_.row_ptr[i + 1]; ++k)
                s -= a_.values[k] * x[a_.col_idx[k]];
            r[i] = s;
        }
        const std::vector<double> dx = factor_solve(r);
        for (int i = 0; i < n_; ++i) x[i] += dx[i];
        return x;
    }

  private:
    std::vector<double> factor_solve(const std::vector<double>& b) const {
        std::vector<double> y(n_);
        for (int io = 0; io < n_; ++io) y[io] = b[perm_[io]];
        // L y' = y
        for (int i = 0; i < n_; ++i) {
            double s = y[i];
            const int f = first_[i];
            const double* row = env_.data() + start_[i];
            for (int j = f; j < i; ++j) s -= row[j - f] * y[j];
            y[i] = s / row[i - f];
        }
        // L^T x' = y'
        for (int i = n_ - 1; i >= 0; --i) {
            const int f = first_[i];
            const double* row = env_.data() + start_[i];
            y[i] /= row[i - f];
            const double yi = y[i];
            for (int j = f; j < i; ++j) y[j] -= row[j - f] * yi;
        }
        std::vector<double> x(n_);
        for (int io = 0; io < n_; ++io) x[perm_[io]] = y[io];
        return x;
    }

    void factorize() {
        for (int i = 0; i < n_; ++i) {
            const int fi = first_[i];
            double* rowi = env_.data() + start_[i];
            for (int j = fi; j < i; ++j) {
                const int fj = first_[j];
                const double* rowj = env_.data() + start_[j];
                double s = rowi[j - fi];
                const int lo = std::max(fi, fj);
                for (int k = lo; k < j; ++k) s -= rowi[k - fi] * rowj[k - fj];
                rowi[j - fi] = s / rowj[j - fj];
            }
            double d = rowi[i - fi];
            for (int k = fi; k < i; ++k) d -= rowi[k - fi] * rowi[k - fi];
            if (d <= 0.0)
                throw not_spd_error("sparse_cholesky: non-positive pivot", perm_[i]);
            rowi[i - fi] = std::sqrt(d);
        }
    }

    CsrMatrix a_;
    int n_ = 0;
    std::vector<int> perm_, inv_perm_;
    std::vector<int> first_;          // first envelope column per row
    std::vector<std::size_t> start_;  // row offsets into env_
    std::vector<double> env_;
};

inline SparseCholesky sparse_cholesky(const CsrMatrix& a) { return SparseCholesky(a); }

} // namespace polyamg
