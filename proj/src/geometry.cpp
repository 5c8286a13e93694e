#include "protoicl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "protoicl/rng.hpp"

namespace protoicl {

Index SimilarityParams::effective_k_max(Index batch_size) const {
    if (k_max >= 0) return std::min(k_max, batch_size - 1);
    return std::min(batch_size - 1, Index(32));
}

Index SimilarityParams::effective_n_anchors(Index batch_size) const {
    if (n_anchors >= 0) return n_anchors;
    return std::min(batch_size, std::max(Index(4), batch_size / 4));
}

Matrix pca_basis(const Matrix& points, const Vector& origin, Index m, bool* rank_deficient) {
    const Index n = points.rows();
    const Index d = points.cols();
    if (n < 1 || m < 1) throw std::invalid_argument("pca_basis: need at least one point and m >= 1");
    if (origin.size() != d) throw std::invalid_argument("pca_basis: origin dimension mismatch");

    Matrix centered = points.rowwise() - origin.transpose();
    Matrix scatter = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(scatter);
    if (eig.info() != Eigen::Success) throw std::runtime_error("pca_basis: eigensolver failed");

    const Vector& evals = eig.eigenvalues();  // ascending
    const double max_eval = std::max(evals[d - 1], 0.0);
    const double tol = std::max(max_eval * 1e-10, 1e-300);
    Index rank = 0;
    for (Index i = 0; i < d; ++i)
        if (evals[i] > tol) ++rank;

    const Index keep = std::min(m, rank);
    if (rank_deficient) *rank_deficient = keep < m;

    Matrix basis(d, keep);
    for (Index k = 0; k < keep; ++k) {
        Vector v = eig.eigenvectors().col(d - 1 - k);
        // sign convention: first nonzero component positive
        for (Index i = 0; i < d; ++i) {
            if (std::abs(v[i]) > 1e-12) {
                if (v[i] < 0) v = -v;
                break;
            }
        }
        basis.col(k) = v;
    }
    return basis;
}

Vector project(const Vector& z, const LocalManifold& mf) {
    if (mf.basis.cols() == 0) return mf.anchor;
    const Vector delta = z - mf.anchor;
    return mf.anchor + mf.basis * (mf.basis.transpose() * delta);
}

double orthogonal_distance(const Vector& z, const LocalManifold& mf) {
    return (z - project(z, mf)).norm();
}

double projected_distance(const Vector& z, const LocalManifold& mf) {
    return (project(z, mf) - mf.anchor).norm();
}

double reconstruction_quality(const Vector& x, const LocalManifold& mf) {
    const double total = (x - mf.anchor).squaredNorm();
    if (total == 0.0) return 1.0;
    const double o = orthogonal_distance(x, mf);
    return std::clamp(1.0 - o * o / total, 0.0, 1.0);
}

namespace {

Matrix gather_rows(const Matrix& batch, const std::vector<Index>& ids) {
    Matrix out(static_cast<Index>(ids.size()), batch.cols());
    for (std::size_t r = 0; r < ids.size(); ++r) out.row(static_cast<Index>(r)) = batch.row(ids[r]);
    return out;
}

} // namespace

LocalManifold build_local_manifold(const Matrix& batch, Index anchor_idx,
                                   const SimilarityParams& params) {
    const Index n = batch.rows();
    const Index m = params.m;
    if (n < m) throw std::invalid_argument("build_local_manifold: batch smaller than m");
    if (anchor_idx < 0 || anchor_idx >= n) throw std::invalid_argument("anchor index out of range");

    LocalManifold mf;
    mf.anchor_id = anchor_idx;
    mf.anchor = batch.row(anchor_idx).transpose();

    // neighbors by Euclidean distance to the anchor, ties by index
    std::vector<std::pair<double, Index>> ranked;
    ranked.reserve(static_cast<std::size_t>(n - 1));
    for (Index i = 0; i < n; ++i) {
        if (i == anchor_idx) continue;
        ranked.emplace_back((batch.row(i) - batch.row(anchor_idx)).norm(), i);
    }
    std::sort(ranked.begin(), ranked.end());

    mf.member_ids.push_back(anchor_idx);
    for (Index j = 0; j < m - 1 && j < static_cast<Index>(ranked.size()); ++j)
        mf.member_ids.push_back(ranked[static_cast<std::size_t>(j)].second);

    mf.basis = pca_basis(gather_rows(batch, mf.member_ids), mf.anchor, m, &mf.rank_deficient);

    const Index k_eff = params.effective_k_max(n);
    for (Index j = m - 1; j < k_eff && j < static_cast<Index>(ranked.size()); ++j) {
        std::vector<Index> candidate = mf.member_ids;
        candidate.push_back(ranked[static_cast<std::size_t>(j)].second);

        LocalManifold trial = mf;
        trial.member_ids = candidate;
        trial.basis = pca_basis(gather_rows(batch, candidate), mf.anchor, m, &trial.rank_deficient);

        bool all_pass = true;
        for (Index id : candidate) {
            if (reconstruction_quality(batch.row(id).transpose(), trial) <
                params.admission_threshold) {
                all_pass = false;
                break;
            }
        }
        if (all_pass) mf = std::move(trial);
    }
    return mf;
}

ManifoldAtlas build_atlas(const Matrix& batch, const SimilarityParams& params, std::uint64_t seed) {
    const Index n = batch.rows();
    if (n < params.m + 1) throw std::invalid_argument("build_atlas: batch smaller than m+1");
    const Index n_anchors = params.effective_n_anchors(n);
    if (n_anchors > n) throw std::invalid_argument("build_atlas: more anchors than points");

    // anchors without replacement, partial Fisher-Yates
    std::vector<Index> pool(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    std::vector<Index> anchors;
    for (Index a = 0; a < n_anchors; ++a) {
        const std::size_t j = a + static_cast<std::size_t>(rng.next_index(
                                      static_cast<std::uint64_t>(n - a)));
        std::swap(pool[static_cast<std::size_t>(a)], pool[j]);
        anchors.push_back(pool[static_cast<std::size_t>(a)]);
    }

    ManifoldAtlas atlas;
    for (Index a : anchors) atlas.manifolds.push_back(build_local_manifold(batch, a, params));

    atlas.assignment.assign(static_cast<std::size_t>(n), -1);
    for (Index p = 0; p < n; ++p) {
        Index best = -1;
        double best_dist = 0.0;
        // prefer manifolds whose member set contains p; nearest anchor breaks ties
        for (std::size_t mi = 0; mi < atlas.manifolds.size(); ++mi) {
            const auto& mf = atlas.manifolds[mi];
            const bool member =
                std::find(mf.member_ids.begin(), mf.member_ids.end(), p) != mf.member_ids.end();
            if (!member) continue;
            const double dist = (batch.row(p).transpose() - mf.anchor).norm();
            if (best < 0 || dist < best_dist) {
                best = static_cast<Index>(mi);
                best_dist = dist;
            }
        }
        if (best < 0) {
            for (std::size_t mi = 0; mi < atlas.manifolds.size(); ++mi) {
                const double dist =
                    (batch.row(p).transpose() - atlas.manifolds[mi].anchor).norm();
                if (best < 0 || dist < best_dist) {
                    best = static_cast<Index>(mi);
                    best_dist = dist;
                }
            }
        }
        atlas.assignment[static_cast<std::size_t>(p)] = best;
    }
    return atlas;
}

double directed_similarity(const Vector& zi, const LocalManifold& mf,
                           const SimilarityParams& params) {
    const double o = orthogonal_distance(zi, mf);
    const double p = projected_distance(zi, mf);
    const double alpha = std::pow(1.0 + o * o, -params.n_alpha);
    const double beta = std::pow(1.0 + p, -params.n_beta);
    return alpha * beta;
}

double pair_similarity(const Matrix& batch, Index i, Index j, const ManifoldAtlas& atlas,
                       const SimilarityParams& params) {
    const Index mi = atlas.assignment.at(static_cast<std::size_t>(i));
    const Index mj = atlas.assignment.at(static_cast<std::size_t>(j));
    if (mi < 0 || mj < 0) throw std::invalid_argument("pair_similarity: unassigned point");
    // the chart of the target point is its manifold's basis re-centered at the
    // point itself: proj(z_i) = z_j + sum_k <z_i - z_j, v_k> v_k
    LocalManifold chart_j = atlas.manifolds[static_cast<std::size_t>(mj)];
    chart_j.anchor = batch.row(j).transpose();
    LocalManifold chart_i = atlas.manifolds[static_cast<std::size_t>(mi)];
    chart_i.anchor = batch.row(i).transpose();
    const double fwd = directed_similarity(batch.row(i).transpose(), chart_j, params);
    const double bwd = directed_similarity(batch.row(j).transpose(), chart_i, params);
    return 0.5 * (fwd + bwd);
}

} // namespace protoicl
