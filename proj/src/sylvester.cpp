#include "sylvinit/sylvester.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "sylvinit/errors.hpp"

namespace sylvinit {

SylvesterOperands build_operands(const Matrix& x, const Matrix& s, double lambda) {
    if (x.cols() != s.cols()) {
        throw ShapeError("build_operands: activations " + x.shape_string() + " and code " + s.shape_string() +
                         " have different sample counts");
    }
    if (!(lambda > 0.0)) throw ParameterError("build_operands: lambda must be positive");

    SylvesterOperands ops;
    ops.lambda = lambda;
    ops.a = gram(s);
    ops.b = lambda * gram(x);
    ops.c = (1.0 + lambda) * matmul_nt(s, x);
    return ops;
}

double objective(const Matrix& w, const Matrix& x, const Matrix& s, double lambda) {
    if (w.rows() != s.rows() || w.cols() != x.rows() || x.cols() != s.cols()) {
        throw ShapeError("objective: inconsistent shapes W " + w.shape_string() + ", X " + x.shape_string() +
                         ", S " + s.shape_string());
    }
    const double decoding = frobenius_norm(x - matmul_tn(w, s));
    const double encoding = frobenius_norm(matmul(w, x) - s);
    return decoding * decoding + lambda * encoding * encoding;
}

namespace {

void check_operands(const SylvesterOperands& ops) {
    const auto& [a, b, c, lambda] = ops;
    if (a.rows() != a.cols() || b.rows() != b.cols() || c.rows() != a.rows() || c.cols() != b.rows()) {
        throw ShapeError("sylvester: inconsistent operands A " + a.shape_string() + ", B " + b.shape_string() +
                         ", C " + c.shape_string());
    }
}

Matrix sylvester_lhs(const Matrix& w, const SylvesterOperands& ops) {
    return matmul(ops.a, w) + matmul(w, ops.b);
}

}  // namespace

Matrix objective_gradient(const Matrix& w, const SylvesterOperands& ops) {
    check_operands(ops);
    return 2.0 * (sylvester_lhs(w, ops) - ops.c);
}

double relative_residual(const Matrix& w, const SylvesterOperands& ops) {
    check_operands(ops);
    return frobenius_norm(sylvester_lhs(w, ops) - ops.c) / std::max(frobenius_norm(ops.c), 1.0);
}

double default_eps(double max_eig_a, double max_eig_b) {
    return std::max(1e-8 * (std::max(max_eig_a, 0.0) + std::max(max_eig_b, 0.0)),
                    std::numeric_limits<double>::min());
}

SolveResult solve(const SylvesterOperands& ops, std::optional<double> eps) {
    check_operands(ops);
    if (eps && !(*eps > 0.0)) throw ParameterError("solve: eps must be positive");
    const auto start = std::chrono::steady_clock::now();

    const SymEig ea = sym_eig(ops.a);
    const SymEig eb = sym_eig(ops.b);
    const std::size_t d_o = ops.a.rows(), d_i = ops.b.rows();

    SolveResult result;
    auto& diag = result.diagnostics;
    diag.eps = eps ? *eps
                   : default_eps(ea.eigenvalues.empty() ? 0.0 : ea.eigenvalues.front(),
                                 eb.eigenvalues.empty() ? 0.0 : eb.eigenvalues.front());
    diag.min_denominator = std::numeric_limits<double>::infinity();

    // Rotate C into the joint eigenbasis, divide, rotate back.
    Matrix core = matmul(matmul_tn(ea.eigenvectors, ops.c), eb.eigenvectors);
    for (std::size_t i = 0; i < d_o; ++i) {
        for (std::size_t j = 0; j < d_i; ++j) {
            double denom = ea.eigenvalues[i] + eb.eigenvalues[j];
            diag.min_denominator = std::min(diag.min_denominator, denom);
            if (denom < diag.eps) {
                denom = diag.eps;
                ++diag.clipped_denominators;
            }
            core(i, j) /= denom;
        }
    }
    result.w = matmul_nt(matmul(ea.eigenvectors, core), eb.eigenvectors);

    diag.residual = relative_residual(result.w, ops);
    diag.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace sylvinit
