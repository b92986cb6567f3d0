#include <doctest.h>

#include <cmath>
#include <random>

#include "sylvinit/errors.hpp"
#include "sylvinit/matrix.hpp"
#include "sylvinit/reference.hpp"
#include "test_helpers.hpp"

using namespace sylvinit;
using namespace sylvinit::testing;

namespace {

double orthonormality_error(const Matrix& v) {
    return frobenius_norm(matmul_tn(v, v) - Matrix::identity(v.cols()));
}

double reconstruction_error(const SymEig& e, const Matrix& m) {
    const Matrix rebuilt = matmul_nt(matmul(e.eigenvectors, Matrix::diagonal(e.eigenvalues)), e.eigenvectors);
    return frobenius_norm(rebuilt - m);
}

}  // namespace

TEST_CASE("matmul: identity and hand-computed product") {
    std::mt19937_64 rng(1);
    const Matrix m = random_matrix(3, 4, rng);
    CHECK(matmul(Matrix::identity(3), m) == m);
    CHECK(matmul(Matrix{{1, 2}, {3, 4}}, Matrix{{1}, {1}}) == Matrix{{3}, {7}});
}

TEST_CASE("matmul: random product matches the triple-loop reference") {
    std::mt19937_64 rng(2);
    const Matrix a = random_matrix(5, 7, rng);
    const Matrix b = random_matrix(7, 3, rng);
    CHECK(max_abs_diff(matmul(a, b), reference::matmul(a, b)) <= 1e-12);
    CHECK(max_abs_diff(matmul_tn(a.transpose(), b), reference::matmul(a, b)) <= 1e-12);
    CHECK(max_abs_diff(matmul_nt(a, b.transpose()), reference::matmul(a, b)) <= 1e-12);
}

TEST_CASE("matmul: shape mismatch names both shapes") {
    try {
        (void)matmul(Matrix(2, 3), Matrix(2, 3));
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("2x3") != std::string::npos);
    }
    CHECK_THROWS_AS(matmul_tn(Matrix(2, 3), Matrix(3, 2)), ShapeError);
    CHECK_THROWS_AS(matmul_nt(Matrix(2, 3), Matrix(3, 2)), ShapeError);
}

TEST_CASE("matmul: associativity on random triples") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = random_matrix(4, 6, rng), b = random_matrix(6, 5, rng), c = random_matrix(5, 3, rng);
        const Matrix left = matmul(matmul(a, b), c);
        const Matrix right = matmul(a, matmul(b, c));
        CHECK(frobenius_norm(left - right) <= 1e-9 * frobenius_norm(left));
    }
}

TEST_CASE("gram: small cases and PSD on random input") {
    CHECK(gram(Matrix::identity(2)) == Matrix::identity(2));
    CHECK(gram(Matrix{{1, 1}}) == Matrix{{2}});

    std::mt19937_64 rng(4);
    const Matrix x = random_matrix(4, 9, rng);
    const Matrix g = gram(x);
    CHECK(g == g.transpose());
    CHECK(max_abs_diff(g, reference::gram(x)) <= 1e-12);
    const SymEig e = sym_eig(g);
    CHECK(e.eigenvalues.back() >= -1e-10);
    CHECK(e.eigenvalues.back() >= -1e-10 * trace(g));
}

TEST_CASE("gram: rank-deficient input still has non-negative spectrum") {
    std::mt19937_64 rng(5);
    const Matrix x = random_matrix(8, 3, rng);  // rank 3 in an 8x8 gram
    const Matrix g = gram(x);
    for (double v : sym_eig(g).eigenvalues) CHECK(v >= -1e-10 * trace(g));
}

TEST_CASE("sym_eig: identity and diagonal inputs") {
    const SymEig id = sym_eig(Matrix::identity(3));
    for (double v : id.eigenvalues) CHECK(v == doctest::Approx(1.0));

    const SymEig d = sym_eig(Matrix{{1, 0}, {0, 3}});
    CHECK(d.eigenvalues[0] == doctest::Approx(3.0));
    CHECK(d.eigenvalues[1] == doctest::Approx(1.0));
    // Permutation of the identity with the non-negative sign convention.
    CHECK(d.eigenvectors == Matrix{{0, 1}, {1, 0}});
}

TEST_CASE("sym_eig: random symmetric inputs satisfy orthonormality and reconstruction") {
    std::mt19937_64 rng(6);
    for (std::size_t n : {1u, 2u, 3u, 8u, 17u, 40u}) {
        for (int trial = 0; trial < 5; ++trial) {
            const Matrix m = random_symmetric(n, rng);
            const SymEig e = sym_eig(m);
            CHECK(orthonormality_error(e.eigenvectors) <= 1e-10);
            CHECK(reconstruction_error(e, m) <= 1e-9 * std::max(frobenius_norm(m), 1e-300));
            for (std::size_t k = 1; k < n; ++k) CHECK(e.eigenvalues[k - 1] >= e.eigenvalues[k]);
        }
    }
}

TEST_CASE("sym_eig: sign convention makes the first nonzero component non-negative") {
    std::mt19937_64 rng(7);
    const SymEig e = sym_eig(random_symmetric(6, rng));
    for (std::size_t c = 0; c < 6; ++c) {
        for (std::size_t r = 0; r < 6; ++r) {
            if (std::abs(e.eigenvectors(r, c)) > 1e-12) {
                CHECK(e.eigenvectors(r, c) > 0.0);
                break;
            }
        }
    }
}

TEST_CASE("sym_eig: symmetrizes its input and rejects non-square matrices") {
    const Matrix skewed{{2, 1}, {0, 2}};  // symmetric part [[2, .5], [.5, 2]]
    const SymEig e = sym_eig(skewed);
    CHECK(e.eigenvalues[0] == doctest::Approx(2.5));
    CHECK(e.eigenvalues[1] == doctest::Approx(1.5));
    CHECK_THROWS_AS(sym_eig(Matrix(2, 3)), ShapeError);
}

TEST_CASE("sym_eig: agrees with the serial cyclic reference") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix m = random_symmetric(12, rng);
        const SymEig fast = sym_eig(m);
        const SymEig slow = reference::sym_eig(m);
        for (std::size_t k = 0; k < 12; ++k) CHECK(fast.eigenvalues[k] == doctest::Approx(slow.eigenvalues[k]).epsilon(1e-10));
        // Distinct eigenvalues: vectors agree up to the shared sign convention.
        CHECK(max_abs_diff(fast.eigenvectors, slow.eigenvectors) <= 1e-8);
    }
}

TEST_CASE("sym_eig: deterministic") {
    std::mt19937_64 rng(9);
    const Matrix m = random_symmetric(20, rng);
    const SymEig a = sym_eig(m), b = sym_eig(m);
    CHECK(a.eigenvalues == b.eigenvalues);
    CHECK(a.eigenvectors == b.eigenvectors);
}

TEST_CASE("frobenius_norm: hand values") {
    CHECK(frobenius_norm(Matrix(3, 3)) == 0.0);
    CHECK(frobenius_norm(Matrix::identity(4)) == 2.0);
    CHECK(frobenius_norm(Matrix{{3, 4}}) == 5.0);
}

TEST_CASE("Matrix: construction checks data length") {
    CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
    CHECK_THROWS_AS((Matrix{{1, 2}, {3}}), ShapeError);
    CHECK(all_finite(Matrix{{1, 2}}));
}
