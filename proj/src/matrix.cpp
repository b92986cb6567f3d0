#include "sylvinit/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "sylvinit/errors.hpp"

namespace sylvinit {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeError("Matrix: data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string());
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer list");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
    Matrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

std::string Matrix::shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix& Matrix::operator+=(const Matrix& other) {
    detail::require_same_shape(*this, other, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    detail::require_same_shape(*this, other, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

namespace detail {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
    }
}

void normalize_eigen_order(std::vector<double>& values, Matrix& vectors) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

    std::vector<double> sorted_values(n);
    Matrix sorted_vectors(vectors.rows(), n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        sorted_values[k] = values[src];
        double sign = 1.0;
        for (std::size_t i = 0; i < vectors.rows(); ++i) {
            const double v = vectors(i, src);
            if (std::abs(v) > 1e-12) {
                sign = v < 0.0 ? -1.0 : 1.0;
                break;
            }
        }
        for (std::size_t i = 0; i < vectors.rows(); ++i) sorted_vectors(i, k) = sign * vectors(i, src);
    }
    values = std::move(sorted_values);
    vectors = std::move(sorted_vectors);
}

}  // namespace detail

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions differ, " + a.shape_string() + " * " +
                         b.shape_string());
    }
    const std::size_t n = a.rows(), inner = a.cols(), m = b.cols();
    Matrix c(n, m);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        double* out = c.row(i).data();
        for (std::size_t k = 0; k < inner; ++k) {
            const double aik = a(i, k);
            const double* brow = b.row(k).data();
            for (std::size_t j = 0; j < m; ++j) out[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw ShapeError("matmul_tn: row counts differ, " + a.shape_string() + "^T * " +
                         b.shape_string());
    }
    const std::size_t n = a.cols(), inner = a.rows(), m = b.cols();
    Matrix c(n, m);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        double* out = c.row(i).data();
        for (std::size_t k = 0; k < inner; ++k) {
            const double aki = a(k, i);
            const double* brow = b.row(k).data();
            for (std::size_t j = 0; j < m; ++j) out[j] += aki * brow[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("matmul_nt: column counts differ, " + a.shape_string() + " * " +
                         b.shape_string() + "^T");
    }
    const std::size_t n = a.rows(), inner = a.cols(), m = b.rows();
    Matrix c(n, m);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = a.row(i).data();
        for (std::size_t j = 0; j < m; ++j) {
            const double* brow = b.row(j).data();
            double acc = 0.0;
            for (std::size_t k = 0; k < inner; ++k) acc += arow[k] * brow[k];
            c(i, j) = acc;
        }
    }
    return c;
}

Matrix gram(const Matrix& x) {
    const std::size_t n = x.rows(), inner = x.cols();
    Matrix g(n, n);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.row(i).data();
        for (std::size_t j = i; j < n; ++j) {
            const double* xj = x.row(j).data();
            double acc = 0.0;
            for (std::size_t k = 0; k < inner; ++k) acc += xi[k] * xj[k];
            g(i, j) = acc;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
    return g;
}

double frobenius_norm(const Matrix& m) {
    double acc = 0.0;
    for (double v : m.data()) acc += v * v;
    return std::sqrt(acc);
}

double trace(const Matrix& m) {
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) t += m(i, i);
    return t;
}

bool all_finite(const Matrix& m) {
    return std::all_of(m.data().begin(), m.data().end(), [](double v) { return std::isfinite(v); });
}

namespace {

constexpr int kMaxQlIterations = 60;

// Householder reduction of the symmetric matrix held in v to tridiagonal form.
// On return d is the diagonal, e[1..n-1] the subdiagonal, and v the orthogonal
// transformation.
void tridiagonalize(Matrix& v, std::vector<double>& d, std::vector<double>& e) {
    const std::size_t n = v.rows();
    for (std::size_t j = 0; j < n; ++j) d[j] = v(n - 1, j);

    for (std::size_t i = n - 1; i > 0; --i) {
        double scale = 0.0, h = 0.0;
        for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
        if (scale == 0.0) {
            e[i] = d[i - 1];
            for (std::size_t j = 0; j < i; ++j) {
                d[j] = v(i - 1, j);
                v(i, j) = 0.0;
                v(j, i) = 0.0;
            }
        } else {
            for (std::size_t k = 0; k < i; ++k) {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            double f = d[i - 1];
            double g = std::sqrt(h);
            if (f > 0) g = -g;
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

            // e = (lower triangle of v) * d, the symmetric product.
            for (std::size_t j = 0; j < i; ++j) {
                f = d[j];
                v(j, i) = f;
                g = e[j] + v(j, j) * f;
                for (std::size_t k = j + 1; k < i; ++k) {
                    g += v(k, j) * d[k];
                    e[k] += v(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                e[j] /= h;
                f += e[j] * d[j];
            }
            const double hh = f / (h + h);
            for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];

            // Rank-2 update of the lower triangle.
            const std::ptrdiff_t cols = static_cast<std::ptrdiff_t>(i);
#pragma omp parallel for schedule(dynamic, 16)
            for (std::ptrdiff_t jj = 0; jj < cols; ++jj) {
                const std::size_t j = static_cast<std::size_t>(jj);
                const double fj = d[j], gj = e[j];
                for (std::size_t k = j; k < i; ++k) v(k, j) -= fj * e[k] + gj * d[k];
            }
            for (std::size_t j = 0; j < i; ++j) {
                d[j] = v(i - 1, j);
                v(i, j) = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate the transformations.
    std::vector<double> col(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        v(n - 1, i) = v(i, i);
        v(i, i) = 1.0;
        const double h = d[i + 1];
        if (h != 0.0) {
            for (std::size_t k = 0; k <= i; ++k) {
                col[k] = v(k, i + 1);
                d[k] = col[k] / h;
            }
            const std::ptrdiff_t cols = static_cast<std::ptrdiff_t>(i + 1);
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t jj = 0; jj < cols; ++jj) {
                const std::size_t j = static_cast<std::size_t>(jj);
                double g = 0.0;
                for (std::size_t k = 0; k <= i; ++k) g += col[k] * v(k, j);
                for (std::size_t k = 0; k <= i; ++k) v(k, j) -= g * d[k];
            }
        }
        for (std::size_t k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
        d[j] = v(n - 1, j);
        v(n - 1, j) = 0.0;
    }
    v(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal (d, e). Rows of zt are the eigenvectors
// and are rotated in place; d receives the eigenvalues.
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, Matrix& zt) {
    const std::size_t n = d.size();
    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;

    const double eps = std::numeric_limits<double>::epsilon();
    double f = 0.0, tst1 = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
        std::size_t m = l;
        while (m < n && std::abs(e[m]) > eps * tst1) ++m;
        if (m > l) {
            int iter = 0;
            do {
                if (++iter > kMaxQlIterations) throw ParameterError("sym_eig: QL iteration did not converge");
                double g = d[l];
                double p = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(p, 1.0);
                if (p < 0) r = -r;
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                const double dl1 = d[l + 1];
                double h = g - d[l];
                for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
                f += h;

                p = d[m];
                double c = 1.0, c2 = 1.0, c3 = 1.0, s = 0.0, s2 = 0.0;
                const double el1 = e[l + 1];
                for (std::size_t i = m; i-- > l;) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = std::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    double* zi = zt.row(i).data();
                    double* zi1 = zt.row(i + 1).data();
                    for (std::size_t k = 0; k < n; ++k) {
                        const double t = zi1[k];
                        zi1[k] = s * zi[k] + c * t;
                        zi[k] = c * zi[k] - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
            } while (std::abs(e[l]) > eps * tst1);
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

}  // namespace

SymEig sym_eig(const Matrix& m) {
    if (m.rows() != m.cols()) throw ShapeError("sym_eig: matrix must be square, got " + m.shape_string());
    const std::size_t n = m.rows();
    SymEig out;
    if (n == 0) return out;

    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) v(i, j) = 0.5 * (m(i, j) + m(j, i));
    if (!all_finite(v)) throw ParameterError("sym_eig: matrix has non-finite entries");

    std::vector<double> d(n), e(n);
    tridiagonalize(v, d, e);
    Matrix zt = v.transpose();
    tridiagonal_ql(d, e, zt);

    out.eigenvalues = std::move(d);
    out.eigenvectors = zt.transpose();
    detail::normalize_eigen_order(out.eigenvalues, out.eigenvectors);
    return out;
}

}  // namespace sylvinit
