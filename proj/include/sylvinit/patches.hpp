#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sylvinit/labels.hpp"
#include "sylvinit/matrix.hpp"
#include "sylvinit/tensor.hpp"

namespace sylvinit {

/// Spatial geometry of one convolution over (h, w, c_i) inputs.
struct ConvGeometry {
    std::size_t in_h = 0;
    std::size_t in_w = 0;
    std::size_t in_c = 0;
    std::size_t f_h = 1;
    std::size_t f_w = 1;
    std::size_t stride = 1;
    std::size_t pad = 0;

    std::size_t out_h() const noexcept { return (in_h + 2 * pad - f_h) / stride + 1; }
    std::size_t out_w() const noexcept { return (in_w + 2 * pad - f_w) / stride + 1; }
    std::size_t patch_size() const noexcept { return f_h * f_w * in_c; }
    std::size_t patches_per_image() const noexcept { return out_h() * out_w(); }

    /// Throws ShapeError if the filter does not fit the padded input or stride is 0.
    void validate() const;
};

/// im2col result: one flattened receptive field per column, (row, col, channel) order.
struct PatchMatrix {
    Matrix x;                               // patch_size x n_p
    std::vector<std::size_t> source_image;  // image index per column
    Labels labels;                          // inherited label per column (empty if unlabeled)
};

/// Flattens every receptive field of `acts` (n, h, w, c) into a column, with zero
/// padding. Columns are ordered image-major, then output row, then output column.
/// `labels` is either empty or has one entry per image.
PatchMatrix extract_patches(const Tensor4& acts, std::size_t f_h, std::size_t f_w,
                            std::size_t stride, std::size_t pad, const Labels& labels);

/// Keeps min(per_image, available) uniformly chosen columns per source image,
/// preserving their relative order.
PatchMatrix sample_patches(const PatchMatrix& pm, std::size_t per_image, std::uint64_t seed);

/// c_o x (f_h*f_w*c_i) flattened weights to a (c_o, c_i, f_h, f_w) tensor.
Tensor4 reshape_weight(const Matrix& w, std::size_t c_i, std::size_t f_h, std::size_t f_w);
/// Inverse of reshape_weight.
Matrix flatten_weight(const Tensor4& w);

/// im2col over a known geometry; the workhorse behind extract_patches.
Matrix im2col(const Tensor4& acts, const ConvGeometry& g);
/// Adjoint of im2col: scatters-and-adds column gradients back to (n, h, w, c).
Tensor4 col2im(const Matrix& cols, const ConvGeometry& g, std::size_t n);

}  // namespace sylvinit
