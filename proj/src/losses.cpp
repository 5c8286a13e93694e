#include "protoicl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace protoicl {

namespace {

// log(1 + sum(exp(x_i))) and the softmax-like weights exp(x_i)/(1+sum),
// both max-shifted for stability
double log1p_sum_exp(const std::vector<double>& xs, std::vector<double>* weights) {
    double m = 0.0;  // the implicit "1" contributes exp(0)
    for (double x : xs) m = std::max(m, x);
    double denom = std::exp(-m);
    for (double x : xs) denom += std::exp(x - m);
    if (weights) {
        weights->resize(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) (*weights)[i] = std::exp(xs[i] - m) / denom;
    }
    return m + std::log(denom);
}

} // namespace

ProxyAnchorResult proxy_anchor_loss(const Matrix& embeddings, const std::vector<int>& labels,
                                    const Matrix& theta_q, double alpha, double epsilon,
                                    SignMode sign_mode) {
    const Index n = embeddings.rows();
    const Index C = theta_q.rows();
    if (n == 0) throw std::invalid_argument("proxy_anchor_loss: empty batch");
    if (static_cast<Index>(labels.size()) != n)
        throw std::invalid_argument("proxy_anchor_loss: label count mismatch");
    for (int l : labels)
        if (l < 0 || l >= C) throw std::invalid_argument("proxy_anchor_loss: label out of range");

    const double pos_sign = sign_mode == SignMode::Corrected ? 1.0 : -1.0;
    const double neg_sign = -pos_sign;

    ProxyAnchorResult res;
    res.embedding_grads = Matrix::Zero(n, embeddings.cols());
    res.proxy_grads = Matrix::Zero(C, theta_q.cols());

    Index num_pos_proxies = 0;
    for (Index c = 0; c < C; ++c)
        if (std::find(labels.begin(), labels.end(), static_cast<int>(c)) != labels.end())
            ++num_pos_proxies;

    double pos_loss = 0.0;
    double neg_loss = 0.0;

    for (Index c = 0; c < C; ++c) {
        std::vector<Index> pos, neg;
        for (Index b = 0; b < n; ++b)
            (labels[static_cast<std::size_t>(b)] == static_cast<int>(c) ? pos : neg).push_back(b);

        auto add_term = [&](const std::vector<Index>& members, double sign, double scale,
                            double& accum) {
            if (members.empty()) return;
            std::vector<double> xs;
            std::vector<double> dists;
            xs.reserve(members.size());
            for (Index b : members) {
                const double d = (embeddings.row(b) - theta_q.row(c)).norm();
                dists.push_back(d);
                xs.push_back(sign * alpha * (d - epsilon));
            }
            std::vector<double> w;
            accum += scale * log1p_sum_exp(xs, &w);
            for (std::size_t k = 0; k < members.size(); ++k) {
                const Index b = members[k];
                const double d = dists[k];
                if (d <= 1e-300) continue;  // gradient direction undefined at d=0
                const double coeff = scale * w[k] * sign * alpha / d;
                const Vector diff = (embeddings.row(b) - theta_q.row(c)).transpose();
                res.embedding_grads.row(b) += coeff * diff.transpose();
                res.proxy_grads.row(c) -= coeff * diff.transpose();
            }
        };

        if (!pos.empty())
            add_term(pos, pos_sign, 1.0 / static_cast<double>(num_pos_proxies), pos_loss);
        add_term(neg, neg_sign, 1.0 / static_cast<double>(C), neg_loss);
    }

    res.loss = pos_loss + neg_loss;
    return res;
}

ManifoldLossResult manifold_loss(const Matrix& embeddings, const PairSims& pair_sims,
                                 double delta, PairReduction reduction) {
    const Index n = embeddings.rows();
    ManifoldLossResult res;
    res.embedding_grads = Matrix::Zero(n, embeddings.cols());
    if (pair_sims.empty()) return res;

    const double scale = reduction == PairReduction::Mean
                             ? 1.0 / static_cast<double>(pair_sims.size())
                             : 1.0;

    for (const auto& [pair, s] : pair_sims) {
        const auto [i, j] = pair;
        if (i < 0 || i >= n || j < 0 || j >= n)
            throw std::invalid_argument("manifold_loss: pair index out of range");
        const Vector diff = (embeddings.row(i) - embeddings.row(j)).transpose();
        const double dist = diff.norm();
        const double r = delta * (1.0 - s) - dist;
        res.loss += scale * r * r;
        if (dist > 1e-300) {
            const Vector g = scale * 2.0 * r * (-diff / dist);
            res.embedding_grads.row(i) += g.transpose();
            res.embedding_grads.row(j) -= g.transpose();
        }
    }
    return res;
}

} // namespace protoicl
