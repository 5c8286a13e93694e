#pragma once

#include <map>
#include <utility>
#include <vector>

#include "protoicl/types.hpp"

namespace protoicl {

enum class SignMode { Corrected, PaperExact };
enum class PairReduction { Mean, Sum };

struct ProxyAnchorResult {
    double loss = 0.0;
    Matrix embedding_grads;  // batch x p
    Matrix proxy_grads;      // C x p
};

/// Proxy-Anchor loss with Euclidean distances. Positive term averages over
/// proxies that have a positive in the batch, negative term over all proxies.
/// Inner sums use max-shifted log-sum-exp.
ProxyAnchorResult proxy_anchor_loss(const Matrix& embeddings, const std::vector<int>& labels,
                                    const Matrix& theta_q, double alpha, double epsilon,
                                    SignMode sign_mode);

using PairSims = std::map<std::pair<Index, Index>, double>;

struct ManifoldLossResult {
    double loss = 0.0;
    Matrix embedding_grads;  // batch x p
};

/// Sum or mean over pairs of (delta*(1-s) - ||h_i - h_j||)^2.
ManifoldLossResult manifold_loss(const Matrix& embeddings, const PairSims& pair_sims,
                                 double delta, PairReduction reduction);

} // namespace protoicl
