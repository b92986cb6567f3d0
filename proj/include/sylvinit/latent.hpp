#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "sylvinit/labels.hpp"
#include "sylvinit/matrix.hpp"

namespace sylvinit {

enum class CodeKind { PCA, OneHot, KMeans, LDA };

std::string_view to_string(CodeKind kind);
/// Accepts "pca", "onehot", "kmeans", "lda"; throws ConfigError otherwise.
CodeKind parse_code_kind(std::string_view text);

struct LatentCodeSpec {
    CodeKind kind = CodeKind::PCA;
    std::uint64_t seed = 0;
    std::size_t kmeans_max_iters = 100;
    double kmeans_tol = 1e-6;

    bool needs_labels() const noexcept { return kind == CodeKind::OneHot || kind == CodeKind::LDA; }
};

/// A set of projection directions (columns of `basis`) applied to centered data.
struct Projection {
    Matrix basis;                 // d_i x k, unit-norm columns
    std::vector<double> mean;     // d_i column mean used for centering
    std::vector<double> strength; // eigenvalue per direction, descending
};

/// Top principal directions of the sample covariance, at most
/// min(max_components, d_i, n − 1). Requires n ≥ 2.
Projection pca_basis(const Matrix& x, std::size_t max_components);

/// PCA latent code: d_o x n projections of the centered activations. Rows past
/// the available component count are filled with small seeded random projections.
Matrix pca_code(const Matrix& x, std::size_t d_o, std::uint64_t seed = 0);

Matrix one_hot_code(const Labels& labels, std::size_t num_classes);

struct KMeansResult {
    Matrix centers;                      // d_i x k
    std::vector<std::size_t> assignment; // cluster per column of x
    std::vector<double> inertia_history; // one entry per Lloyd iteration
    double inertia = 0.0;                // sum of squared distances at the returned centers
    std::size_t iterations = 0;
};

/// k-means++ seeding followed by Lloyd iterations. Stops when the relative
/// inertia change drops to spec.kmeans_tol or after spec.kmeans_max_iters.
KMeansResult kmeans(const Matrix& x, std::size_t k, const LatentCodeSpec& spec);

/// S = Hᵀ X where H holds the d_o K-Means centers.
Matrix kmeans_code(const Matrix& x, std::size_t d_o, const LatentCodeSpec& spec);

/// Fisher discriminant directions from whitened S_w⁻¹ S_b, at most
/// min(max_directions, classes − 1); directions without between-class
/// separation are dropped.
Projection lda_basis(const Matrix& x, const Labels& labels, std::size_t max_directions);

/// LDA latent code: d_o x n projections of the centered activations, padded
/// like pca_code.
Matrix lda_code(const Matrix& x, const Labels& labels, std::size_t d_o, std::uint64_t seed = 0);

/// Dispatch on spec.kind. `num_classes` is only used by the one-hot code, whose
/// row count must equal d_o.
Matrix latent_code(const Matrix& x, const Labels& labels, std::size_t d_o, std::size_t num_classes,
                   const LatentCodeSpec& spec);

}  // namespace sylvinit
