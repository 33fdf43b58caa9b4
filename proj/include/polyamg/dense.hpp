#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <vector>

#include "polyamg/errors.hpp"

namespace polyamg {

/// Small row-major dense matrix. Used for VEM local operators and the
/// coarsest AMG level; not meant for large n.
class DenseMatrix {
  public:
    DenseMatrix() = default;
    DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(std::size_t(rows) * cols, 0.0) {}

    static DenseMatrix identity(int n) {
        DenseMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return a_[std::size_t(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[std::size_t(i) * cols_ + j]; }

    DenseMatrix transposed() const {
        DenseMatrix t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
        assert(a.cols_ == b.rows_);
        DenseMatrix c(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k) {
                const double v = a(i, k);
                if (v == 0.0) continue;
                for (int j = 0; j < b.cols_; ++j) c(i, j) += v * b(k, j);
            }
        return c;
    }

    friend DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
        assert(a.rows_ == b.rows_ && a.cols_ == b.cols_);
        DenseMatrix c(a.rows_, a.cols_);
        for (std::size_t i = 0; i < a.a_.size(); ++i) c.a_[i] = a.a_[i] - b.a_[i];
        return c;
    }

    friend DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
        assert(a.rows_ == b.rows_ && a.cols_ == b.cols_);
        DenseMatrix c(a.rows_, a.cols_);
        for (std::size_t i = 0; i < a.a_.size(); ++i) c.a_[i] = a.a_[i] + b.a_[i];
        return c;
    }

    void scale(double s) {
        for (double& v : a_) v *= s;
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        assert(int(x.size()) == cols_);
        std::vector<double> y(rows_, 0.0);
        for (int i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : a_) m = std::max(m, std::abs(v));
        return m;
    }

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> a_;
};

/// Solve a 3x3 system in place of a general inverse; throws when the
/// matrix is numerically singular (degenerate element geometry).
inline std::array<double, 3> solve3x3(const DenseMatrix& g, const std::array<double, 3>& rhs) {
    double m[3][4];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) m[i][j] = g(i, j);
        m[i][3] = rhs[i];
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        if (std::abs(m[piv][col]) < 1e-300)
            throw error("solve3x3: singular matrix");
        if (piv != col)
            for (int j = col; j < 4; ++j) std::swap(m[piv][j], m[col][j]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (int j = col; j < 4; ++j) m[r][j] -= f * m[col][j];
        }
    }
    return {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

/// Cholesky factor of a small dense SPD matrix (lower triangular L with
/// A = L L^T). Reports the offending row on a non-positive pivot.
class DenseCholesky {
  public:
    explicit DenseCholesky(const DenseMatrix& a) : n_(a.rows()), l_(a.rows(), a.cols()) {
        if (a.rows() != a.cols()) throw dimension_mismatch("dense_cholesky: matrix not square");
        for (int j = 0; j < n_; ++j) {
            double d = a(j, j);
            for (int k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
            if (d <= 0.0) throw not_spd_error("dense_cholesky: non-positive pivot", j);
            l_(j, j) = std::sqrt(d);
            for (int i = j + 1; i < n_; ++i) {
                double s = a(i, j);
                for (int k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
                l_(i, j) = s / l_(j, j);
            }
        }
    }

    int size() const { return n_; }
    const DenseMatrix& factor() const { return l_; }

    std::vector<double> solve(const std::vector<double>& b) const {
        assert(int(b.size()) == n_);
        std::vector<double> y(b);
        for (int i = 0; i < n_; ++i) {
            double s = y[i];
            for (int k = 0; k < i; ++k) s -= l_(i, k) * y[k];
            y[i] = s / l_(i, i);
        }
        for (int i = n_ - 1; i >= 0; --i) {
            double s = y[i];
            for (int k = i + 1; k < n_; ++k) s -= l_(k, i) * y[k];
            y[i] = s / l_(i, i);
        }
        return y;
    }

  private:
    int n_ = 0;
    DenseMatrix l_;
};

inline DenseCholesky dense_cholesky(const DenseMatrix& a) { return DenseCholesky(a); }

} // namespace polyamg
