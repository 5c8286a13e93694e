#pragma once

#include <cstdint>
#include <vector>

#include "protoicl/types.hpp"

namespace protoicl {

/// Local linear chart: anchor point plus an orthonormal basis spanning the
/// admitted neighborhood.
struct LocalManifold {
    Index anchor_id = -1;              // index into the batch
    std::vector<Index> member_ids;     // admitted neighborhood, anchor included
    Matrix basis;                      // d x m, columns orthonormal
    Vector anchor;                     // chart origin
    bool rank_deficient = false;       // neighborhood rank fell below m
};

struct ManifoldAtlas {
    std::vector<LocalManifold> manifolds;
    std::vector<Index> assignment;     // point index -> manifold index
};

struct SimilarityParams {
    double n_alpha = 4.0;      // off-manifold decay exponent
    double n_beta = 0.5;       // on-manifold decay exponent
    double admission_threshold = 0.90;  // T
    Index m = 3;               // submanifold dimension
    Index k_max = -1;          // neighbor budget; -1 = min(|B|-1, 32)
    Index n_anchors = -1;      // anchors per batch; -1 = max(4, |B|/4)

    Index effective_k_max(Index batch_size) const;
    Index effective_n_anchors(Index batch_size) const;
};

/// Top-m principal directions of (points - origin), deterministic sign
/// (first component of largest magnitude made positive). Rank-deficient
/// neighborhoods return the achievable basis.
Matrix pca_basis(const Matrix& points, const Vector& origin, Index m, bool* rank_deficient = nullptr);

Vector project(const Vector& z, const LocalManifold& mf);
double orthogonal_distance(const Vector& z, const LocalManifold& mf);
double projected_distance(const Vector& z, const LocalManifold& mf);

/// Fraction of squared displacement from the anchor captured by the chart;
/// 1 at the anchor itself.
double reconstruction_quality(const Vector& x, const LocalManifold& mf);

/// Iterative neighborhood expansion with PCA admission testing.
/// batch is row-major: one point per row.
LocalManifold build_local_manifold(const Matrix& batch, Index anchor_idx,
                                   const SimilarityParams& params);

ManifoldAtlas build_atlas(const Matrix& batch, const SimilarityParams& params, std::uint64_t seed);

/// Directional similarity s'(z_i, z_j) against the manifold assigned to j.
double directed_similarity(const Vector& zi, const LocalManifold& mf,
                           const SimilarityParams& params);

/// Symmetrized manifold similarity between batch points i and j.
double pair_similarity(const Matrix& batch, Index i, Index j, const ManifoldAtlas& atlas,
                       const SimilarityParams& params);

} // namespace protoicl
