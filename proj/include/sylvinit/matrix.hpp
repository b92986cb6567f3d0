#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sylvinit {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    /// Takes ownership of `data`; throws ShapeError unless data.size() == rows*cols.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    /// Row-list construction, e.g. Matrix{{1, 2}, {3, 4}}.
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    const std::vector<double>& storage() const noexcept { return data_; }

    Matrix transpose() const;
    /// "RxC" for error messages.
    std::string shape_string() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s) noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

/// a * b. OpenMP-parallel over output rows; result is independent of thread count.
Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a * bᵀ without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// x * xᵀ, exactly symmetric.
Matrix gram(const Matrix& x);

double frobenius_norm(const Matrix& m);
double trace(const Matrix& m);
bool all_finite(const Matrix& m);

/// Eigen-decomposition of a symmetric matrix.
struct SymEig {
    std::vector<double> eigenvalues;  // descending
    Matrix eigenvectors;              // column k pairs with eigenvalues[k]
};

/// Eigensolver on (m + mᵀ)/2: Householder tridiagonalization followed by
/// implicit-shift QL. The result does not depend on the number of threads.
/// Eigenvalues are sorted descending and each eigenvector's first nonzero
/// component is made non-negative.
SymEig sym_eig(const Matrix& m);

namespace detail {
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);
void normalize_eigen_order(std::vector<double>& values, Matrix& vectors);
}  // namespace detail

}  // namespace sylvinit
