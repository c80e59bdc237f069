// Row-major double tensor plus the handful of dense kernels the recurrent
// models need. Sizes here are desk-scale; plain loops are enough.
#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace reactsent {

struct Tensor {
    std::vector<size_t> shape;
    std::vector<double> values;

    Tensor() = default;

    static Tensor zeros(std::initializer_list<size_t> dims) {
        Tensor t;
        t.shape.assign(dims);
        size_t n = 1;
        for (size_t d : dims) n *= d;
        t.values.assign(n, 0.0);
        return t;
    }

    size_t count() const { return values.size(); }
    size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    std::span<double> row(size_t r) { return {values.data() + r * cols(), cols()}; }
    std::span<const double> row(size_t r) const {
        return {values.data() + r * cols(), cols()};
    }

    double& at(size_t r, size_t c) { return values[r * cols() + c]; }
    double at(size_t r, size_t c) const { return values[r * cols() + c]; }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

/// out = W x + b, W: m x n row-major.
inline void matvec_bias(const Tensor& w, std::span<const double> x,
                        std::span<const double> b, std::span<double> out) {
    const size_t m = w.rows();
    for (size_t i = 0; i < m; ++i) {
        out[i] = b[i] + dot(w.row(i), x);
    }
}

/// out += W x
inline void matvec_acc(const Tensor& w, std::span<const double> x, std::span<double> out) {
    const size_t m = w.rows();
    for (size_t i = 0; i < m; ++i) {
        out[i] += dot(w.row(i), x);
    }
}

/// out += W^T dy  (row-major friendly: one axpy per row of W)
inline void matvec_transpose_acc(const Tensor& w, std::span<const double> dy,
                                 std::span<double> out) {
    const size_t m = w.rows();
    for (size_t i = 0; i < m; ++i) {
        axpy(dy[i], w.row(i), out);
    }
}

/// dW += dy x^T
inline void outer_acc(Tensor& dw, std::span<const double> dy, std::span<const double> x) {
    const size_t m = dw.rows();
    for (size_t i = 0; i < m; ++i) {
        axpy(dy[i], x, dw.row(i));
    }
}

}  // namespace reactsent
