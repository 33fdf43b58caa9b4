#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "polyamg/errors.hpp"

namespace polyamg {

/// Compressed sparse row matrix. Column indices are sorted and unique
/// within each row; entries with |v| < 1e-300 are dropped at build time.
struct CsrMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<int> row_ptr{0};
    std::vector<int> col_idx;
    std::vector<double> values;
    bool symmetric = false;

    int nnz() const { return int(col_idx.size()); }

    double operator()(int i, int j) const {
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            if (col_idx[k] == j) return values[k];
        return 0.0;
    }

    static CsrMatrix identity(int n) {
        CsrMatrix a;
        a.n_rows = a.n_cols = n;
        a.symmetric = true;
        a.row_ptr.resize(n + 1);
        a.col_idx.resize(n);
        a.values.assign(n, 1.0);
        for (int i = 0; i < n; ++i) {
            a.row_ptr[i + 1] = i + 1;
            a.col_idx[i] = i;
        }
        return a;
    }
};

/// Triplet accumulator: duplicates are summed on finalize, which is the
/// natural interface for element-by-element assembly.
class CooBuilder {
  public:
    CooBuilder(int n_rows, int n_cols) : n_rows_(n_rows), n_cols_(n_cols) {}

    void add(int i, int j, double v) {
        if (i < 0 || i >= n_rows_ || j < 0 || j >= n_cols_)
            throw invalid_parameter("CooBuilder::add: index out of range");
        entries_.emplace_back(i, j, v);
    }

    CsrMatrix finalize(bool symmetric = false) {
        CsrMatrix a;
        a.n_rows = n_rows_;
        a.n_cols = n_cols_;
        a.symmetric = symmetric;
        std::sort(entries_.begin(), entries_.end(),
                  [](const Entry& l, const Entry& r) {
                      return std::tie(std::get<0>(l), std::get<1>(l)) <
                             std::tie(std::get<0>(r), std::get<1>(r));
                  });
        a.row_ptr.assign(n_rows_ + 1, 0);
        std::size_t k = 0;
        for (int i = 0; i < n_rows_; ++i) {
            while (k < entries_.size() && std::get<0>(entries_[k]) == i) {
                const int j = std::get<1>(entries_[k]);
                double v = 0.0;
                while (k < entries_.size() && std::get<0>(entries_[k]) == i &&
                       std::get<1>(entries_[k]) == j) {
                    v += std::get<2>(entries_[k]);
                    ++k;
                }
                if (std::abs(v) >= 1e-300) {
                    a.col_idx.push_back(j);
                    a.values.push_back(v);
                }
            }
            a.row_ptr[i + 1] = int(a.col_idx.size());
        }
        return a;
    }

  private:
    using Entry = std::tuple<int, int, double>;
    int n_rows_, n_cols_;
    std::vector<Entry> entries_;
};

inline void spmv_into(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
    if (int(x.size()) != a.n_cols || int(y.size()) != a.n_rows)
        throw dimension_mismatch("spmv: vector size does not match matrix");
    for (int i = 0; i < a.n_rows; ++i) {
        double s = 0.0;
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            s += a.values[k] * x[a.col_idx[k]];
        y[i] = s;
    }
}

inline std::vector<double> spmv(const CsrMatrix& a, std::span<const double> x) {
    std::vector<double> y(a.n_rows);
    spmv_into(a, x, y);
    return y;
}

enum class SweepDirection { forward, backward };

/// One in-place lexicographic Gauss-Seidel sweep on A x = b.
inline void gauss_seidel_sweep(const CsrMatrix& a, std::span<double> x,
                               std::span<const double> b, SweepDirection dir) {
    if (a.n_rows != a.n_cols || int(x.size()) != a.n_rows || int(b.size()) != a.n_rows)
        throw dimension_mismatch("gauss_seidel_sweep: shape mismatch");
    const int n = a.n_rows;
    const int begin = dir == SweepDirection::forward ? 0 : n - 1;
    const int end = dir == SweepDirection::forward ? n : -1;
    const int step = dir == SweepDirection::forward ? 1 : -1;
    for (int i = begin; i != end; i += step) {
        double diag = 0.0;
        double s = b[i];
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            const int j = a.col_idx[k];
            if (j == i)
                diag = a.values[k];
            else
                s -= a.values[k] * x[j];
        }
        if (diag == 0.0)
            throw singular_diagonal_error("gauss_seidel_sweep: zero diagonal at row " +
                                          std::to_string(i));
        x[i] = s / diag;
    }
}

inline CsrMatrix transpose(const CsrMatrix& a) {
    CsrMatrix t;
    t.n_rows = a.n_cols;
    t.n_cols = a.n_rows;
    t.symmetric = a.symmetric;
    t.row_ptr.assign(a.n_cols + 1, 0);
    t.col_idx.resize(a.col_idx.size());
    t.values.resize(a.values.size());
    for (int k = 0; k < a.nnz(); ++k) t.row_ptr[a.col_idx[k] + 1]++;
    for (int i = 0; i < a.n_cols; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
    std::vector<int> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (int i = 0; i < a.n_rows; ++i)
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            const int pos = next[a.col_idx[k]]++;
            t.col_idx[pos] = i;
            t.values[pos] = a.values[k];
        }
    return t;
}

/// Sparse matrix product C = A B (SMMP-style row merge with a dense
/// accumulator). Rows come out with sorted unique columns.
inline CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
    if (a.n_cols != b.n_rows) throw dimension_mismatch("multiply: inner dimensions differ");
    CsrMatrix c;
    c.n_rows = a.n_rows;
    c.n_cols = b.n_cols;
    c.row_ptr.assign(a.n_rows + 1, 0);
    std::vector<double> acc(b.n_cols, 0.0);
    std::vector<int> touched;
    for (int i = 0; i < a.n_rows; ++i) {
        touched.clear();
        for (int ka = a.row_ptr[i]; ka < a.row_ptr[i + 1]; ++ka) {
            const int j = a.col_idx[ka];
            const double va = a.values[ka];
            for (int kb = b.row_ptr[j]; kb < b.row_ptr[j + 1]; ++kb) {
                const int col = b.col_idx[kb];
                if (acc[col] == 0.0) touched.push_back(col);
                acc[col] += va * b.values[kb];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (int col : touched) {
            if (std::abs(acc[col]) >= 1e-300) {
                c.col_idx.push_back(col);
                c.values.push_back(acc[col]);
            }
            acc[col] = 0.0;
        }
        c.row_ptr[i + 1] = int(c.col_idx.size());
    }
    return c;
}

/// Galerkin triple product R A P.
inline CsrMatrix rap(const CsrMatrix& r, const CsrMatrix& a, const CsrMatrix& p) {
    return multiply(r, multiply(a, p));
}

inline void write_matrix_market(const CsrMatrix& a, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw error("write_matrix_market: cannot open " + path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.n_rows << " " << a.n_cols << " " << a.nnz() << "\n";
    char buf[64];
    for (int i = 0; i < a.n_rows; ++i)
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i + 1, a.col_idx[k] + 1,
                          a.values[k]);
            out << buf;
        }
}

inline CsrMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("read_matrix_market: cannot open " + path);
    std::string line;
    int lineno = 0;
    bool sym = false;
    if (!std::getline(in, line)) throw parse_error("read_matrix_market: empty file", 1);
    ++lineno;
    if (line.rfind("%%MatrixMarket", 0) != 0)
        throw parse_error("read_matrix_market: missing banner", lineno);
    if (line.find("symmetric") != std::string::npos) sym = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] != '%') break;
    }
    int nr = 0, nc = 0, nnz = 0;
    if (std::sscanf(line.c_str(), "%d %d %d", &nr, &nc, &nnz) != 3)
        throw parse_error("read_matrix_market: bad size line", lineno);
    CooBuilder coo(nr, nc);
    for (int e = 0; e < nnz; ++e) {
        if (!std::getline(in, line))
            throw parse_error("read_matrix_market: truncated entries", lineno);
        ++lineno;
        int i = 0, j = 0;
        double v = 0.0;
        if (std::sscanf(line.c_str(), "%d %d %lf", &i, &j, &v) != 3)
            throw parse_error("read_matrix_market: bad entry", lineno);
        coo.add(i - 1, j - 1, v);
        if (sym && i != j) coo.add(j - 1, i - 1, v);
    }
    return coo.finalize(sym);
}

} // namespace polyamg
