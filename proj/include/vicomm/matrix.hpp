#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vicomm/errors.hpp"

namespace vicomm {

/// Dense row-major matrix of doubles. data.size() == rows * cols.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::size_t size() const { return data.size(); }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }
};

/// y = A x
inline std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.cols) throw contract_error("matvec: vector length does not match matrix columns");
    std::vector<double> y(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double acc = 0.0;
        const double* row = a.data.data() + i * a.cols;
        for (std::size_t j = 0; j < a.cols; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
    return y;
}

/// y = A^T x
inline std::vector<double> matvec_transposed(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.rows) throw contract_error("matvec_transposed: vector length does not match matrix rows");
    std::vector<double> y(a.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double xi = x[i];
        const double* row = a.data.data() + i * a.cols;
        for (std::size_t j = 0; j < a.cols; ++j) y[j] += row[j] * xi;
    }
    return y;
}

/// A += scale * u v^T
inline void add_outer(Matrix& a, std::span<const double> u, std::span<const double> v, double scale = 1.0) {
    if (u.size() != a.rows || v.size() != a.cols) throw contract_error("add_outer: shape mismatch");
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* row = a.data.data() + i * a.cols;
        const double ui = scale * u[i];
        for (std::size_t j = 0; j < a.cols; ++j) row[j] += ui * v[j];
    }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

} // namespace vicomm
