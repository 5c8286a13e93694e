#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "protoicl/corpus.hpp"
#include "protoicl/geometry.hpp"
#include "protoicl/losses.hpp"
#include "protoicl/network.hpp"
#include "protoicl/optim.hpp"

namespace protoicl {

/// Per-class proxy pair: theta_q trained by backprop, theta_m its
/// momentum-smoothed copy used for prototype selection.
struct ProxyBank {
    Matrix theta_q;  // C x p
    Matrix theta_m;  // C x p
    double gamma = 0.99;

    static ProxyBank init(Index num_classes, Index proto_dim, std::uint64_t seed, double gamma);
};

/// theta_m <- gamma*theta_m + (1-gamma)*theta_q
void momentum_update(ProxyBank& bank);

enum class ManifoldSpace { Input, Projected };
enum class MomentumCadence { PerBatch, PerEpoch };

struct TrainConfig {
    Index epochs = 200;
    double lr_network = 1e-3;
    double lr_proxy = 1e-3;
    double lr_decay = 0.97;
    Index batch_size = 128;
    double pa_alpha = 32.0;
    double pa_epsilon = 0.1;
    double manifold_delta = 2.0;
    SimilarityParams similarity;
    double gamma = 0.99;
    Index proto_dim = 50;
    std::uint64_t seed = 0;
    SignMode sign_mode = SignMode::Corrected;
    PairReduction pair_reduction = PairReduction::Mean;
    ManifoldSpace manifold_space = ManifoldSpace::Input;
    MomentumCadence momentum_cadence = MomentumCadence::PerBatch;
};

struct EpochRecord {
    Index epoch = 0;
    double total_loss = 0.0;
    double pa_loss = 0.0;
    double manifold_loss = 0.0;
    double mean_intra_proxy_distance = 0.0;
    double lr_network = 0.0;
    double lr_proxy = 0.0;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
};

struct TrainResult {
    ProjectionNetwork network;
    ProxyBank bank;
    TrainReport report;
};

struct BatchLoss {
    double total = 0.0;
    double pa = 0.0;
    double manifold = 0.0;
};

/// One batch: forward all points, both losses, gradients accumulated into
/// the network and returned for the proxies. Shared by train() and the
/// finite-difference checks.
BatchLoss batch_loss_and_grads(const Matrix& batch_z, const std::vector<int>& labels,
                               ProjectionNetwork& net, const Matrix& theta_q,
                               const PairSims& pair_sims, const TrainConfig& cfg,
                               Matrix* proxy_grads);

/// Manifold pair similarities for a batch, in input or projected space.
PairSims batch_pair_sims(const Matrix& batch_z, const ProjectionNetwork& net,
                         const TrainConfig& cfg, std::uint64_t atlas_seed);

TrainResult train(const EmbeddingDataset& dataset, const TrainConfig& config);

} // namespace protoicl
