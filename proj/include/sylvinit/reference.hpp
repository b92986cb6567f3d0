#pragma once

// Serial, loop-for-loop implementations of the parallel kernels. They are kept
// for tests and benchmarks only; nothing in the library calls them.

#include <cstddef>

#include "sylvinit/matrix.hpp"
#include "sylvinit/tensor.hpp"

namespace sylvinit::reference {

/// Textbook i-j-k triple loop.
Matrix matmul(const Matrix& a, const Matrix& b);

/// Full (non-symmetric-aware) x * xᵀ.
Matrix gram(const Matrix& x);

/// Classic cyclic-by-row Jacobi, one rotation at a time, stopping when the
/// off-diagonal norm is at most 1e-12·‖M‖_F or after 100 sweeps. Output
/// conventions match sylvinit::sym_eig.
SymEig sym_eig(const Matrix& m);

/// Direct sliding-window convolution of (n, h, w, c_i) activations with a
/// (c_o, c_i, f_h, f_w) weight tensor and zero padding. Returns (n, oh, ow, c_o).
Tensor4 conv2d(const Tensor4& acts, const Tensor4& weight, std::size_t stride, std::size_t pad);

}  // namespace sylvinit::reference
