#include "sylvinit/latent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>

#include "sylvinit/errors.hpp"

namespace sylvinit {

std::string_view to_string(CodeKind kind) {
    switch (kind) {
        case CodeKind::PCA: return "pca";
        case CodeKind::OneHot: return "onehot";
        case CodeKind::KMeans: return "kmeans";
        case CodeKind::LDA: return "lda";
    }
    return "unknown";
}

CodeKind parse_code_kind(std::string_view text) {
    if (text == "pca") return CodeKind::PCA;
    if (text == "onehot" || text == "one-hot") return CodeKind::OneHot;
    if (text == "kmeans" || text == "k-means") return CodeKind::KMeans;
    if (text == "lda") return CodeKind::LDA;
    throw ConfigError("unknown latent code '" + std::string(text) + "' (expected pca|onehot|kmeans|lda)");
}

namespace {

std::vector<double> row_means(const Matrix& x) {
    std::vector<double> mean(x.rows(), 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double acc = 0.0;
        for (double v : x.row(r)) acc += v;
        mean[r] = x.cols() ? acc / static_cast<double>(x.cols()) : 0.0;
    }
    return mean;
}

Matrix center_columns(const Matrix& x, const std::vector<double>& mean) {
    Matrix xc = x;
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (double& v : xc.row(r)) v -= mean[r];
    return xc;
}

double row_std(std::span<const double> row) {
    if (row.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(row.size());
    double acc = 0.0;
    for (double v : row) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(row.size() - 1));
}

// Projects centered data on `proj` into the first rows of a d_o x n code and
// fills the remainder with random unit-vector projections scaled to 1% of
// `reference_std`.
Matrix projected_code(const Matrix& centered, const Projection& proj, std::size_t d_o, double reference_std,
                      std::uint64_t seed) {
    const std::size_t d_i = centered.rows(), n = centered.cols();
    const std::size_t kept = std::min(proj.basis.cols(), d_o);
    Matrix code(d_o, n);
    if (kept > 0) {
        Matrix top = matmul_tn(proj.basis, centered);
        for (std::size_t r = 0; r < kept; ++r) std::copy(top.row(r).begin(), top.row(r).end(), code.row(r).begin());
    }
    if (kept == d_o) return code;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix dirs(d_i, d_o - kept);
    for (std::size_t r = 0; r < d_i; ++r)
        for (std::size_t c = 0; c < d_o - kept; ++c) dirs(r, c) = normal(rng);
    for (std::size_t c = 0; c < dirs.cols(); ++c) {
        double norm = 0.0;
        for (std::size_t r = 0; r < d_i; ++r) norm += dirs(r, c) * dirs(r, c);
        norm = std::sqrt(norm);
        if (norm > 0.0)
            for (std::size_t r = 0; r < d_i; ++r) dirs(r, c) /= norm;
    }
    Matrix pad = matmul_tn(dirs, centered);
    const double target = 0.01 * reference_std;
    for (std::size_t p = 0; p < pad.rows(); ++p) {
        const double sd = row_std(pad.row(p));
        const double scale = sd > 0.0 ? target / sd : 0.0;
        auto dst = code.row(kept + p);
        auto src = pad.row(p);
        for (std::size_t j = 0; j < n; ++j) dst[j] = scale * src[j];
    }
    return code;
}

void require_label_count(const Matrix& x, const Labels& labels, const char* who) {
    if (labels.size() != x.cols()) {
        throw LabelError(std::string(who) + ": " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(x.cols()) + " samples");
    }
}

}  // namespace

Projection pca_basis(const Matrix& x, std::size_t max_components) {
    const std::size_t d_i = x.rows(), n = x.cols();
    if (n < 2) throw InsufficientDataError("pca: need at least 2 samples, got " + std::to_string(n));

    Projection proj;
    proj.mean = row_means(x);
    Matrix cov = gram(center_columns(x, proj.mean));
    cov *= 1.0 / static_cast<double>(n - 1);
    const SymEig eig = sym_eig(cov);

    const std::size_t k = std::min({max_components, d_i, n - 1});
    proj.basis = Matrix(d_i, k);
    proj.strength.assign(eig.eigenvalues.begin(), eig.eigenvalues.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t r = 0; r < d_i; ++r)
        for (std::size_t c = 0; c < k; ++c) proj.basis(r, c) = eig.eigenvectors(r, c);
    return proj;
}

Matrix pca_code(const Matrix& x, std::size_t d_o, std::uint64_t seed) {
    if (d_o == 0) throw ParameterError("pca_code: d_o must be >= 1");
    const Projection proj = pca_basis(x, d_o);
    const double smallest = proj.strength.empty() ? 0.0 : std::sqrt(std::max(proj.strength.back(), 0.0));
    return projected_code(center_columns(x, proj.mean), proj, d_o, smallest, seed);
}

Matrix one_hot_code(const Labels& labels, std::size_t num_classes) {
    Matrix s(num_classes, labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= num_classes) {
            throw LabelError("one_hot_code: label " + std::to_string(labels[i]) + " at position " +
                             std::to_string(i) + " outside [0, " + std::to_string(num_classes) + ")");
        }
        s(labels[i], i) = 1.0;
    }
    return s;
}

KMeansResult kmeans(const Matrix& x, std::size_t k, const LatentCodeSpec& spec) {
    const std::size_t d = x.rows(), n = x.cols();
    if (k == 0) throw ParameterError("kmeans: k must be >= 1");
    if (n < k) {
        throw InsufficientDataError("kmeans: " + std::to_string(n) + " samples for " + std::to_string(k) +
                                    " clusters");
    }
    const Matrix points = x.transpose();  // n x d, one point per row
    Matrix centers(k, d);                 // one center per row while iterating

    auto sq_dist = [&](std::size_t p, std::size_t c) {
        const double* a = points.row(p).data();
        const double* b = centers.row(c).data();
        double acc = 0.0;
        for (std::size_t r = 0; r < d; ++r) acc += (a[r] - b[r]) * (a[r] - b[r]);
        return acc;
    };

    // k-means++ seeding.
    std::mt19937_64 rng(spec.seed);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::vector<bool> chosen(n, false);
    std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    for (std::size_t c = 0; c < k; ++c) {
        if (c > 0) {
            double total = 0.0;
            for (double v : nearest) total += v;
            if (total > 0.0) {
                const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
                double acc = 0.0;
                pick = n - 1;
                for (std::size_t p = 0; p < n; ++p) {
                    acc += nearest[p];
                    if (acc > target && nearest[p] > 0.0) {
                        pick = p;
                        break;
                    }
                }
            } else {
                pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
            }
        }
        chosen[pick] = true;
        std::copy(points.row(pick).begin(), points.row(pick).end(), centers.row(c).begin());
        for (std::size_t p = 0; p < n; ++p) nearest[p] = std::min(nearest[p], sq_dist(p, c));
    }

    KMeansResult result;
    result.assignment.assign(n, 0);
    std::vector<double> dist(n, 0.0);

    auto assign = [&]() {
#pragma omp parallel for schedule(static)
        for (std::size_t p = 0; p < n; ++p) {
            std::size_t best = 0;
            double best_d = sq_dist(p, 0);
            for (std::size_t c = 1; c < k; ++c) {
                const double dc = sq_dist(p, c);
                if (dc < best_d) {
                    best_d = dc;
                    best = c;
                }
            }
            result.assignment[p] = best;
            dist[p] = best_d;
        }
        // Serial sum keeps the total independent of the thread count.
        double inertia = 0.0;
        for (double v : dist) inertia += v;
        return inertia;
    };

    for (std::size_t iter = 0; iter < spec.kmeans_max_iters; ++iter) {
        const double inertia = assign();

        std::vector<std::size_t> counts(k, 0);
        for (std::size_t a : result.assignment) ++counts[a];
        // Empty clusters take the point farthest from its center, drawn from a
        // cluster that can spare it.
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far = n;
            for (std::size_t p = 0; p < n; ++p) {
                if (counts[result.assignment[p]] < 2) continue;
                if (far == n || dist[p] > dist[far]) far = p;
            }
            if (far == n) break;
            --counts[result.assignment[far]];
            result.assignment[far] = c;
            dist[far] = 0.0;
            counts[c] = 1;
        }

        centers = Matrix(k, d);
        for (std::size_t p = 0; p < n; ++p) {
            auto dst = centers.row(result.assignment[p]);
            auto src = points.row(p);
            for (std::size_t r = 0; r < d; ++r) dst[r] += src[r];
        }
        for (std::size_t c = 0; c < k; ++c)
            if (counts[c] > 0)
                for (double& v : centers.row(c)) v /= static_cast<double>(counts[c]);

        result.inertia_history.push_back(inertia);
        result.iterations = iter + 1;
        if (iter > 0) {
            const double prev = result.inertia_history[iter - 1];
            if (prev - inertia <= spec.kmeans_tol * prev) break;
        }
        if (inertia == 0.0) break;
    }

    result.inertia = assign();
    result.centers = centers.transpose();
    return result;
}

Matrix kmeans_code(const Matrix& x, std::size_t d_o, const LatentCodeSpec& spec) {
    const KMeansResult km = kmeans(x, d_o, spec);
    return matmul_tn(km.centers, x);
}

Projection lda_basis(const Matrix& x, const Labels& labels, std::size_t max_directions) {
    require_label_count(x, labels, "lda");
    const std::size_t d_i = x.rows(), n = x.cols();

    std::map<ClassId, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < n; ++i) members[labels[i]].push_back(i);
    if (members.size() < 2) throw DegenerateLabelsError("lda: need at least 2 classes, got " + std::to_string(members.size()));
    for (const auto& [cls, idx] : members) {
        if (idx.size() < 2) {
            throw DegenerateLabelsError("lda: class " + std::to_string(cls) + " has " + std::to_string(idx.size()) +
                                        " sample(s), need at least 2");
        }
    }

    Projection proj;
    proj.mean = row_means(x);
    Matrix within(d_i, d_i);
    Matrix between(d_i, d_i);
    for (const auto& [cls, idx] : members) {
        Matrix xc(d_i, idx.size());
        for (std::size_t r = 0; r < d_i; ++r)
            for (std::size_t j = 0; j < idx.size(); ++j) xc(r, j) = x(r, idx[j]);
        const std::vector<double> mu = row_means(xc);
        within += gram(center_columns(xc, mu));
        for (std::size_t r = 0; r < d_i; ++r)
            for (std::size_t c = 0; c < d_i; ++c)
                between(r, c) += static_cast<double>(idx.size()) * (mu[r] - proj.mean[r]) * (mu[c] - proj.mean[c]);
    }
    const double tr = trace(within);
    const double ridge = tr > 0.0 ? 1e-6 * tr / static_cast<double>(d_i) : 1e-6;
    for (std::size_t r = 0; r < d_i; ++r) within(r, r) += ridge;

    // within^{-1/2} via its eigendecomposition.
    const SymEig ew = sym_eig(within);
    Matrix scaled = ew.eigenvectors;
    for (std::size_t c = 0; c < d_i; ++c) {
        const double s = 1.0 / std::sqrt(std::max(ew.eigenvalues[c], ridge));
        for (std::size_t r = 0; r < d_i; ++r) scaled(r, c) *= s;
    }
    const Matrix inv_sqrt = matmul_nt(scaled, ew.eigenvectors);
    const SymEig em = sym_eig(matmul(matmul(inv_sqrt, between), inv_sqrt));

    std::size_t k = std::min(max_directions, members.size() - 1);
    k = std::min(k, d_i);
    std::size_t kept = 0;
    while (kept < k && em.eigenvalues[kept] > 1e-10) ++kept;

    proj.basis = Matrix(d_i, kept);
    for (std::size_t c = 0; c < kept; ++c) {
        double norm = 0.0;
        std::vector<double> dir(d_i, 0.0);
        for (std::size_t r = 0; r < d_i; ++r) {
            for (std::size_t j = 0; j < d_i; ++j) dir[r] += inv_sqrt(r, j) * em.eigenvectors(j, c);
            norm += dir[r] * dir[r];
        }
        norm = std::sqrt(norm);
        for (std::size_t r = 0; r < d_i; ++r) proj.basis(r, c) = dir[r] / norm;
        proj.strength.push_back(em.eigenvalues[c]);
    }
    return proj;
}

Matrix lda_code(const Matrix& x, const Labels& labels, std::size_t d_o, std::uint64_t seed) {
    if (d_o == 0) throw ParameterError("lda_code: d_o must be >= 1");
    const Projection proj = lda_basis(x, labels, d_o);
    const Matrix centered = center_columns(x, proj.mean);

    double reference_std = 0.0;
    if (proj.basis.cols() > 0) {
        const Matrix proj_rows = matmul_tn(proj.basis, centered);
        reference_std = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < proj_rows.rows(); ++r) reference_std = std::min(reference_std, row_std(proj_rows.row(r)));
    } else {
        // No discriminant survived: scale padding against the overall data spread.
        const double n1 = static_cast<double>(std::max<std::size_t>(x.cols(), 2) - 1);
        reference_std = std::sqrt(trace(gram(centered)) / n1 / static_cast<double>(x.rows()));
    }
    return projected_code(centered, proj, d_o, reference_std, seed);
}

Matrix latent_code(const Matrix& x, const Labels& labels, std::size_t d_o, std::size_t num_classes,
                   const LatentCodeSpec& spec) {
    if (spec.needs_labels()) require_label_count(x, labels, "latent_code");
    switch (spec.kind) {
        case CodeKind::PCA: return pca_code(x, d_o, spec.seed);
        case CodeKind::OneHot:
            if (d_o != num_classes) {
                throw ConfigError("one-hot code needs d_o == num_classes (" + std::to_string(d_o) + " vs " +
                                  std::to_string(num_classes) + ")");
            }
            return one_hot_code(labels, num_classes);
        case CodeKind::KMeans: return kmeans_code(x, d_o, spec);
        case CodeKind::LDA: return lda_code(x, labels, d_o, spec.seed);
    }
    throw ConfigError("latent_code: unhandled code kind");
}

}  // namespace sylvinit
