#include "sylvinit/reference.hpp"

#include <cmath>

#include "sylvinit/errors.hpp"

namespace sylvinit::reference {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("reference::matmul: " + a.shape_string() + " * " + b.shape_string());
    }
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
            c(i, j) = acc;
        }
    }
    return c;
}

Matrix gram(const Matrix& x) {
    Matrix g(x.rows(), x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.rows(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < x.cols(); ++k) acc += x(i, k) * x(j, k);
            g(i, j) = acc;
        }
    }
    return g;
}

SymEig sym_eig(const Matrix& m) {
    if (m.rows() != m.cols()) throw ShapeError("reference::sym_eig: matrix must be square");
    const std::size_t n = m.rows();
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));
    Matrix v = Matrix::identity(n);
    const double threshold = 1e-12 * frobenius_norm(a);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) off += a(i, j) * a(i, j);
        if (std::sqrt(off) <= threshold) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double xp = a(p, k), xq = a(q, k);
                    a(p, k) = c * xp - s * xq;
                    a(q, k) = s * xp + c * xq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double xp = a(k, p), xq = a(k, q);
                    a(k, p) = c * xp - s * xq;
                    a(k, q) = s * xp + c * xq;
                    const double vp = v(k, p), vq = v(k, q);
                    v(k, p) = c * vp - s * vq;
                    v(k, q) = s * vp + c * vq;
                }
                a(p, q) = a(q, p) = 0.0;
            }
        }
    }

    SymEig out;
    out.eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.eigenvalues[i] = a(i, i);
    out.eigenvectors = std::move(v);
    detail::normalize_eigen_order(out.eigenvalues, out.eigenvectors);
    return out;
}

Tensor4 conv2d(const Tensor4& acts, const Tensor4& weight, std::size_t stride, std::size_t pad) {
    const std::size_t n = acts.dim(0), h = acts.dim(1), w = acts.dim(2), c_i = acts.dim(3);
    const std::size_t c_o = weight.dim(0), f_h = weight.dim(2), f_w = weight.dim(3);
    if (weight.dim(1) != c_i) throw ShapeError("reference::conv2d: channel mismatch");
    if (f_h > h + 2 * pad || f_w > w + 2 * pad || stride == 0) {
        throw ShapeError("reference::conv2d: filter larger than padded input");
    }
    const std::size_t oh = (h + 2 * pad - f_h) / stride + 1;
    const std::size_t ow = (w + 2 * pad - f_w) / stride + 1;
    Tensor4 out({n, oh, ow, c_o});
    for (std::size_t img = 0; img < n; ++img)
        for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox)
                for (std::size_t o = 0; o < c_o; ++o) {
                    double acc = 0.0;
                    for (std::size_t ch = 0; ch < c_i; ++ch)
                        for (std::size_t ky = 0; ky < f_h; ++ky)
                            for (std::size_t kx = 0; kx < f_w; ++kx) {
                                const long y = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
                                const long x = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
                                if (y < 0 || x < 0 || y >= static_cast<long>(h) || x >= static_cast<long>(w))
                                    continue;
                                acc += weight(o, ch, ky, kx) *
                                       acts(img, static_cast<std::size_t>(y), static_cast<std::size_t>(x), ch);
                            }
                    out(img, oy, ox, o) = acc;
                }
    return out;
}

}  // namespace sylvinit::reference
