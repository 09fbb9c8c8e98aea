#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace sttf {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles. Small and allocation-friendly; the
/// networks in this project are tiny, so no BLAS backing is needed.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    Vec& data() { return data_; }
    const Vec& data() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vec data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// y = A x
inline Vec matvec(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw std::invalid_argument("matvec: shape mismatch");
    Vec y(a.rows(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) y[r] = dot(a.row(r), x);
    return y;
}

/// y = A^T x
inline Vec matvec_transposed(const Matrix& a, std::span<const double> x) {
    if (a.rows() != x.size()) throw std::invalid_argument("matvec_transposed: shape mismatch");
    Vec y(a.cols(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double xr = x[r];
        auto row = a.row(r);
        for (std::size_t c = 0; c < a.cols(); ++c) y[c] += row[c] * xr;
    }
    return y;
}

/// A += alpha * u v^T
inline void add_outer(Matrix& a, std::span<const double> u, std::span<const double> v,
                      double alpha = 1.0) {
    if (a.rows() != u.size() || a.cols() != v.size())
        throw std::invalid_argument("add_outer: shape mismatch");
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto row = a.row(r);
        const double ur = alpha * u[r];
        for (std::size_t c = 0; c < a.cols(); ++c) row[c] += ur * v[c];
    }
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace sttf
