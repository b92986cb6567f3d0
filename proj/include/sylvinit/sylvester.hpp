#pragma once

#include <cstddef>
#include <optional>

#include "sylvinit/matrix.hpp"

namespace sylvinit {

inline constexpr double kDefaultLambda = 10.0;

/// Operands of A W + W B = C for the encode/decode objective:
/// A = S Sᵀ, B = λ X Xᵀ, C = (1 + λ) S Xᵀ.
struct SylvesterOperands {
    Matrix a;  // d_o x d_o
    Matrix b;  // d_i x d_i
    Matrix c;  // d_o x d_i
    double lambda = kDefaultLambda;
};

struct SolveDiagnostics {
    double residual = 0.0;  // ‖AW + WB − C‖_F / max(‖C‖_F, 1)
    std::size_t clipped_denominators = 0;
    double min_denominator = 0.0;  // before clipping
    double eps = 0.0;              // clip floor actually used
    double wall_time = 0.0;        // seconds
};

struct SolveResult {
    Matrix w;
    SolveDiagnostics diagnostics;
};

/// x: d_i x n activations, s: d_o x n code.
SylvesterOperands build_operands(const Matrix& x, const Matrix& s, double lambda = kDefaultLambda);

/// ‖X − WᵀS‖_F² + λ‖WX − S‖_F².
double objective(const Matrix& w, const Matrix& x, const Matrix& s, double lambda);

/// 2(AW + WB − C), the gradient of `objective` with respect to W.
Matrix objective_gradient(const Matrix& w, const SylvesterOperands& ops);

/// ‖AW + WB − C‖_F / max(‖C‖_F, 1).
double relative_residual(const Matrix& w, const SylvesterOperands& ops);

/// 1e-8 · (largest eigenvalue of A + largest eigenvalue of B), floored at the
/// smallest positive normal double.
double default_eps(double max_eig_a, double max_eig_b);

/// Spectral solve of A W + W B = C for symmetric PSD A and B. With A = UΛUᵀ and
/// B = VMVᵀ, W = U [ (UᵀCV)_ij / (λ_i + μ_j) ] Vᵀ; denominators below `eps` are
/// clipped to `eps`. When eps is not given, default_eps() is used.
SolveResult solve(const SylvesterOperands& ops, std::optional<double> eps = std::nullopt);

}  // namespace sylvinit
