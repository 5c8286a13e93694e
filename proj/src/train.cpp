#include "protoicl/train.hpp"

#include <cmath>
#include <stdexcept>

#include "protoicl/rng.hpp"

namespace protoicl {

ProxyBank ProxyBank::init(Index num_classes, Index proto_dim, std::uint64_t seed, double gamma) {
    ProxyBank bank;
    bank.gamma = gamma;
    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(proto_dim));
    bank.theta_q.resize(num_classes, proto_dim);
    for (Index c = 0; c < num_classes; ++c)
        for (Index j = 0; j < proto_dim; ++j) bank.theta_q(c, j) = scale * rng.next_normal();
    bank.theta_m = bank.theta_q;
    return bank;
}

void momentum_update(ProxyBank& bank) {
    bank.theta_m = bank.gamma * bank.theta_m + (1.0 - bank.gamma) * bank.theta_q;
}

PairSims batch_pair_sims(const Matrix& batch_z, const ProjectionNetwork& net,
                         const TrainConfig& cfg, std::uint64_t atlas_seed) {
    const Index n = batch_z.rows();
    Matrix space;
    if (cfg.manifold_space == ManifoldSpace::Input) {
        space = batch_z;
    } else {
        space.resize(n, net.output_dim());
        for (Index i = 0; i < n; ++i)
            space.row(i) = net.forward(batch_z.row(i).transpose()).transpose();
    }
    const ManifoldAtlas atlas = build_atlas(space, cfg.similarity, atlas_seed);
    PairSims sims;
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            sims[{i, j}] = pair_similarity(space, i, j, atlas, cfg.similarity);
    return sims;
}

BatchLoss batch_loss_and_grads(const Matrix& batch_z, const std::vector<int>& labels,
                               ProjectionNetwork& net, const Matrix& theta_q,
                               const PairSims& pair_sims, const TrainConfig& cfg,
                               Matrix* proxy_grads) {
    const Index n = batch_z.rows();
    Matrix embeddings(n, net.output_dim());
    for (Index i = 0; i < n; ++i)
        embeddings.row(i) = net.forward(batch_z.row(i).transpose()).transpose();

    ProxyAnchorResult pa =
        proxy_anchor_loss(embeddings, labels, theta_q, cfg.pa_alpha, cfg.pa_epsilon, cfg.sign_mode);
    ManifoldLossResult ml =
        manifold_loss(embeddings, pair_sims, cfg.manifold_delta, cfg.pair_reduction);

    const Matrix embedding_grads = pa.embedding_grads + ml.embedding_grads;
    for (Index i = 0; i < n; ++i)
        net.accumulate_gradient(batch_z.row(i).transpose(), embedding_grads.row(i).transpose());

    if (proxy_grads) *proxy_grads = pa.proxy_grads;

    BatchLoss out;
    out.pa = pa.loss;
    out.manifold = ml.loss;
    out.total = pa.loss + ml.loss;
    return out;
}

TrainResult train(const EmbeddingDataset& dataset, const TrainConfig& config) {
    if (!dataset.encoded) throw std::invalid_argument("train: dataset must be label-encoded");
    const Index n = dataset.size();
    const Index d = dataset.dim;
    const Index C = dataset.num_classes();
    const Index batch_size = std::min(config.batch_size, n);

    TrainResult res;
    res.network = ProjectionNetwork(d, config.proto_dim, Rng::mix(config.seed, 0x6e6574));
    res.bank = ProxyBank::init(C, config.proto_dim, Rng::mix(config.seed, 0x70726f78),
                               config.gamma);

    AdamState adam_w = AdamState::for_shape(d, config.proto_dim);
    AdamState adam_b = AdamState::for_shape(config.proto_dim, 1);
    AdamState adam_proxy = AdamState::for_shape(C, config.proto_dim);

    double lr_net = config.lr_network;
    double lr_proxy = config.lr_proxy;

    for (Index epoch = 0; epoch < config.epochs; ++epoch) {
        const BatchPlan plan =
            make_batches(dataset, batch_size, config.seed, static_cast<std::uint64_t>(epoch));
        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr_network = lr_net;
        rec.lr_proxy = lr_proxy;

        for (Index b = 0; b < plan.num_batches(); ++b) {
            const std::vector<Index> idx = plan.batch(b);
            const Index bn = static_cast<Index>(idx.size());
            if (bn < config.similarity.m + 1) continue;  // too small for an atlas

            Matrix batch_z(bn, d);
            std::vector<int> labels(static_cast<std::size_t>(bn));
            for (Index i = 0; i < bn; ++i) {
                const auto& s = dataset.samples[static_cast<std::size_t>(idx[i])];
                batch_z.row(i) = s.vector.transpose();
                labels[static_cast<std::size_t>(i)] = s.encoded_label;
            }

            const std::uint64_t atlas_seed =
                Rng::mix(config.seed, 0x61746c * (epoch * 4096 + b + 1));
            const PairSims sims = batch_pair_sims(batch_z, res.network, config, atlas_seed);

            res.network.zero_gradients();
            Matrix proxy_grads;
            const BatchLoss loss = batch_loss_and_grads(batch_z, labels, res.network,
                                                        res.bank.theta_q, sims, config,
                                                        &proxy_grads);
            if (!std::isfinite(loss.total))
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch) + " batch " + std::to_string(b));

            adam_step(adam_w, res.network.weight(), res.network.weight_grad(), lr_net);
            adam_step(adam_b, res.network.bias(), res.network.bias_grad(), lr_net);
            adam_step(adam_proxy, res.bank.theta_q, proxy_grads, lr_proxy);
            if (config.momentum_cadence == MomentumCadence::PerBatch) momentum_update(res.bank);

            rec.total_loss += loss.total;
            rec.pa_loss += loss.pa;
            rec.manifold_loss += loss.manifold;
        }
        if (config.momentum_cadence == MomentumCadence::PerEpoch) momentum_update(res.bank);

        // mean distance from each sample's projection to its own theta_q
        double intra = 0.0;
        for (const auto& s : dataset.samples) {
            const Vector h = res.network.forward(s.vector);
            intra += (h - res.bank.theta_q.row(s.encoded_label).transpose()).norm();
        }
        rec.mean_intra_proxy_distance = intra / static_cast<double>(n);

        res.report.epochs.push_back(rec);
        lr_net *= config.lr_decay;
        lr_proxy *= config.lr_decay;
    }
    return res;
}

} // namespace protoicl
