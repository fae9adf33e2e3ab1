#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fedvs/errors.hpp"

namespace fedvs {

/// Row-major dense matrix of doubles. Desk-scale: plain loops, no BLAS.
class RealMatrix {
public:
    RealMatrix() = default;
    RealMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    bool same_shape(const RealMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

inline RealMatrix rm_mul(const RealMatrix& a, const RealMatrix& b) {
    if (a.cols() != b.rows()) throw ShapeMismatch("rm_mul: inner dimensions differ");
    RealMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out.at(i, j) += aik * b.at(k, j);
        }
    }
    return out;
}

/// a^T * b without materializing the transpose.
inline RealMatrix rm_transpose_mul(const RealMatrix& a, const RealMatrix& b) {
    if (a.rows() != b.rows()) throw ShapeMismatch("rm_transpose_mul: row counts differ");
    RealMatrix out(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        for (std::size_t i = 0; i < a.cols(); ++i) {
            double aki = a.at(k, i);
            if (aki == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out.at(i, j) += aki * b.at(k, j);
        }
    }
    return out;
}

inline void rm_axpy(RealMatrix& acc, double c, const RealMatrix& m) {
    if (!acc.same_shape(m)) throw ShapeMismatch("rm_axpy: shape mismatch");
    auto av = acc.data();
    auto mv = m.data();
    for (std::size_t i = 0; i < av.size(); ++i) av[i] += c * mv[i];
}

inline RealMatrix rm_rows(const RealMatrix& m, std::span<const std::size_t> rows) {
    RealMatrix out(rows.size(), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= m.rows()) throw ShapeMismatch("rm_rows: row index out of range");
        for (std::size_t j = 0; j < m.cols(); ++j) out.at(i, j) = m.at(rows[i], j);
    }
    return out;
}

inline double rm_max_abs_diff(const RealMatrix& a, const RealMatrix& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("rm_max_abs_diff: shape mismatch");
    double m = 0.0;
    auto av = a.data(), bv = b.data();
    for (std::size_t i = 0; i < av.size(); ++i) m = std::max(m, std::abs(av[i] - bv[i]));
    return m;
}

} // namespace fedvs
