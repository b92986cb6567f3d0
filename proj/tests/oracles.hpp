#pragma once

// Independent oracles shared by the unit tests and the acceptance runner.
// Everything here is written with plain loops on purpose: none of it goes
// through the library kernels it is used to check.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "sylvinit/matrix.hpp"

namespace sylvinit::oracle {

/// ‖X − WᵀS‖² + λ‖WX − S‖² by direct summation.
inline double objective(const Matrix& w, const Matrix& x, const Matrix& s, double lambda) {
    const std::size_t d_o = w.rows(), d_i = w.cols(), n = x.cols();
    double decode = 0.0, encode = 0.0;
    for (std::size_t r = 0; r < d_i; ++r)
        for (std::size_t k = 0; k < n; ++k) {
            double v = x(r, k);
            for (std::size_t o = 0; o < d_o; ++o) v -= w(o, r) * s(o, k);
            decode += v * v;
        }
    for (std::size_t o = 0; o < d_o; ++o)
        for (std::size_t k = 0; k < n; ++k) {
            double v = -s(o, k);
            for (std::size_t r = 0; r < d_i; ++r) v += w(o, r) * x(r, k);
            encode += v * v;
        }
    return decode + lambda * encode;
}

struct Quadratic {
    Matrix a, b, c;  // SSᵀ, λXXᵀ, (1+λ)SXᵀ computed entry by entry
};

inline Quadratic quadratic_terms(const Matrix& x, const Matrix& s, double lambda) {
    const std::size_t d_o = s.rows(), d_i = x.rows(), n = x.cols();
    Quadratic q{Matrix(d_o, d_o), Matrix(d_i, d_i), Matrix(d_o, d_i)};
    for (std::size_t i = 0; i < d_o; ++i)
        for (std::size_t j = 0; j < d_o; ++j)
            for (std::size_t k = 0; k < n; ++k) q.a(i, j) += s(i, k) * s(j, k);
    for (std::size_t i = 0; i < d_i; ++i)
        for (std::size_t j = 0; j < d_i; ++j)
            for (std::size_t k = 0; k < n; ++k) q.b(i, j) += lambda * x(i, k) * x(j, k);
    for (std::size_t i = 0; i < d_o; ++i)
        for (std::size_t j = 0; j < d_i; ++j)
            for (std::size_t k = 0; k < n; ++k) q.c(i, j) += (1.0 + lambda) * s(i, k) * x(j, k);
    return q;
}

/// Upper bound on the largest eigenvalue of a symmetric matrix (max absolute row sum).
inline double gershgorin_bound(const Matrix& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) row += std::abs(m(i, j));
        best = std::max(best, row);
    }
    return best;
}

struct DescentResult {
    Matrix w;
    std::size_t steps = 0;
};

/// Plain gradient descent on the encode/decode objective from W = 0. The
/// gradient is 2(AW + WB − C); the step is capped at 1/L so the iteration is
/// stable whatever the data scale.
inline DescentResult gradient_descent(const Matrix& x, const Matrix& s, double lambda, double max_step = 1e-3,
                                      std::size_t max_steps = 200000, double tol = 1e-14) {
    const Quadratic q = quadratic_terms(x, s, lambda);
    const std::size_t d_o = s.rows(), d_i = x.rows();
    const double lipschitz = 2.0 * (gershgorin_bound(q.a) + gershgorin_bound(q.b));
    const double step = std::min(max_step, 1.0 / lipschitz);
    DescentResult out{Matrix(d_o, d_i), 0};
    Matrix& w = out.w;
    Matrix grad(d_o, d_i);
    for (; out.steps < max_steps; ++out.steps) {
        double change = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < d_o; ++i)
            for (std::size_t j = 0; j < d_i; ++j) {
                double g = -q.c(i, j);
                for (std::size_t k = 0; k < d_o; ++k) g += q.a(i, k) * w(k, j);
                for (std::size_t k = 0; k < d_i; ++k) g += w(i, k) * q.b(k, j);
                grad(i, j) = 2.0 * g;
            }
        for (std::size_t i = 0; i < d_o; ++i)
            for (std::size_t j = 0; j < d_i; ++j) {
                const double delta = step * grad(i, j);
                w(i, j) -= delta;
                change += delta * delta;
                scale += w(i, j) * w(i, j);
            }
        if (change <= tol * tol * std::max(scale, 1.0)) break;
    }
    return out;
}

/// Central finite differences of f with respect to every entry of m.
inline Matrix finite_difference(const std::function<double(const Matrix&)>& f, Matrix m, double h = 1e-5) {
    Matrix g(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double saved = m(i, j);
            m(i, j) = saved + h;
            const double up = f(m);
            m(i, j) = saved - h;
            const double down = f(m);
            m(i, j) = saved;
            g(i, j) = (up - down) / (2.0 * h);
        }
    return g;
}

/// ‖a − b‖ / max(‖a‖, ‖b‖, floor).
inline double relative_error(const Matrix& a, const Matrix& b, double floor = 1e-12) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        diff += d * d;
        na += a.data()[i] * a.data()[i];
        nb += b.data()[i] * b.data()[i];
    }
    return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

}  // namespace sylvinit::oracle
