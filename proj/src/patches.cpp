#include "sylvinit/patches.hpp"

#include <algorithm>
#include <iterator>
#include <map>
#include <random>
#include <string>

#include "sylvinit/errors.hpp"

namespace sylvinit {

void ConvGeometry::validate() const {
    if (stride == 0) throw ShapeError("conv geometry: stride must be >= 1");
    if (f_h == 0 || f_w == 0) throw ShapeError("conv geometry: filter dimensions must be >= 1");
    if (f_h > in_h + 2 * pad || f_w > in_w + 2 * pad) {
        throw ShapeError("conv geometry: filter " + std::to_string(f_h) + "x" + std::to_string(f_w) +
                         " larger than padded input " + std::to_string(in_h + 2 * pad) + "x" +
                         std::to_string(in_w + 2 * pad));
    }
}

Matrix im2col(const Tensor4& acts, const ConvGeometry& g) {
    g.validate();
    const std::size_t n = acts.dim(0);
    if (acts.dim(1) != g.in_h || acts.dim(2) != g.in_w || acts.dim(3) != g.in_c) {
        throw ShapeError("im2col: activations " + acts.shape_string() + " do not match geometry");
    }
    const std::size_t oh = g.out_h(), ow = g.out_w(), per_image = oh * ow;
    const std::size_t c = g.in_c;
    Matrix cols(g.patch_size(), n * per_image);
    const auto pad = static_cast<std::ptrdiff_t>(g.pad);

#pragma omp parallel for schedule(static)
    for (std::size_t img = 0; img < n; ++img) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                const std::size_t col = img * per_image + oy * ow + ox;
                for (std::size_t ky = 0; ky < g.f_h; ++ky) {
                    const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - pad;
                    for (std::size_t kx = 0; kx < g.f_w; ++kx) {
                        const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - pad;
                        const std::size_t row0 = (ky * g.f_w + kx) * c;
                        const bool inside = y >= 0 && x >= 0 && y < static_cast<std::ptrdiff_t>(g.in_h) &&
                                            x < static_cast<std::ptrdiff_t>(g.in_w);
                        for (std::size_t ch = 0; ch < c; ++ch) {
                            cols(row0 + ch, col) =
                                inside ? acts(img, static_cast<std::size_t>(y), static_cast<std::size_t>(x), ch)
                                       : 0.0;
                        }
                    }
                }
            }
        }
    }
    return cols;
}

Tensor4 col2im(const Matrix& cols, const ConvGeometry& g, std::size_t n) {
    g.validate();
    const std::size_t oh = g.out_h(), ow = g.out_w(), per_image = oh * ow;
    if (cols.rows() != g.patch_size() || cols.cols() != n * per_image) {
        throw ShapeError("col2im: columns " + cols.shape_string() + " do not match geometry");
    }
    const std::size_t c = g.in_c;
    Tensor4 out({n, g.in_h, g.in_w, c});
    const auto pad = static_cast<std::ptrdiff_t>(g.pad);

#pragma omp parallel for schedule(static)
    for (std::size_t img = 0; img < n; ++img) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                const std::size_t col = img * per_image + oy * ow + ox;
                for (std::size_t ky = 0; ky < g.f_h; ++ky) {
                    const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - pad;
                    if (y < 0 || y >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
                    for (std::size_t kx = 0; kx < g.f_w; ++kx) {
                        const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - pad;
                        if (x < 0 || x >= static_cast<std::ptrdiff_t>(g.in_w)) continue;
                        const std::size_t row0 = (ky * g.f_w + kx) * c;
                        for (std::size_t ch = 0; ch < c; ++ch) {
                            out(img, static_cast<std::size_t>(y), static_cast<std::size_t>(x), ch) +=
                                cols(row0 + ch, col);
                        }
                    }
                }
            }
        }
    }
    return out;
}

PatchMatrix extract_patches(const Tensor4& acts, std::size_t f_h, std::size_t f_w, std::size_t stride,
                            std::size_t pad, const Labels& labels) {
    const std::size_t n = acts.dim(0);
    if (!labels.empty() && labels.size() != n) {
        throw ShapeError("extract_patches: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(n) + " images");
    }
    const ConvGeometry g{acts.dim(1), acts.dim(2), acts.dim(3), f_h, f_w, stride, pad};
    PatchMatrix pm;
    pm.x = im2col(acts, g);
    const std::size_t per_image = g.patches_per_image();
    pm.source_image.resize(n * per_image);
    if (!labels.empty()) pm.labels.resize(n * per_image);
    for (std::size_t img = 0; img < n; ++img) {
        for (std::size_t k = 0; k < per_image; ++k) {
            pm.source_image[img * per_image + k] = img;
            if (!labels.empty()) pm.labels[img * per_image + k] = labels[img];
        }
    }
    return pm;
}

PatchMatrix sample_patches(const PatchMatrix& pm, std::size_t per_image, std::uint64_t seed) {
    if (per_image == 0) throw ParameterError("sample_patches: per_image must be >= 1");
    std::map<std::size_t, std::vector<std::size_t>> by_image;
    for (std::size_t col = 0; col < pm.source_image.size(); ++col) by_image[pm.source_image[col]].push_back(col);

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> keep;
    for (const auto& [img, columns] : by_image) {
        if (columns.size() <= per_image) {
            keep.insert(keep.end(), columns.begin(), columns.end());
        } else {
            // std::sample over forward iterators is order-preserving.
            std::sample(columns.begin(), columns.end(), std::back_inserter(keep), per_image, rng);
        }
    }

    PatchMatrix out;
    out.x = Matrix(pm.x.rows(), keep.size());
    out.source_image.reserve(keep.size());
    if (!pm.labels.empty()) out.labels.reserve(keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j) {
        for (std::size_t r = 0; r < pm.x.rows(); ++r) out.x(r, j) = pm.x(r, keep[j]);
        out.source_image.push_back(pm.source_image[keep[j]]);
        if (!pm.labels.empty()) out.labels.push_back(pm.labels[keep[j]]);
    }
    return out;
}

Tensor4 reshape_weight(const Matrix& w, std::size_t c_i, std::size_t f_h, std::size_t f_w) {
    if (w.cols() != f_h * f_w * c_i) {
        throw ShapeError("reshape_weight: " + w.shape_string() + " has " + std::to_string(w.cols()) +
                         " columns, expected f_h*f_w*c_i = " + std::to_string(f_h * f_w * c_i));
    }
    const std::size_t c_o = w.rows();
    Tensor4 t({c_o, c_i, f_h, f_w});
    for (std::size_t o = 0; o < c_o; ++o)
        for (std::size_t ky = 0; ky < f_h; ++ky)
            for (std::size_t kx = 0; kx < f_w; ++kx)
                for (std::size_t ch = 0; ch < c_i; ++ch) t(o, ch, ky, kx) = w(o, (ky * f_w + kx) * c_i + ch);
    return t;
}

Matrix flatten_weight(const Tensor4& w) {
    const std::size_t c_o = w.dim(0), c_i = w.dim(1), f_h = w.dim(2), f_w = w.dim(3);
    Matrix m(c_o, f_h * f_w * c_i);
    for (std::size_t o = 0; o < c_o; ++o)
        for (std::size_t ky = 0; ky < f_h; ++ky)
            for (std::size_t kx = 0; kx < f_w; ++kx)
                for (std::size_t ch = 0; ch < c_i; ++ch) m(o, (ky * f_w + kx) * c_i + ch) = w(o, ch, ky, kx);
    return m;
}

}  // namespace sylvinit
