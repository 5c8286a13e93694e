#include "protoicl/network.hpp"

#include <cmath>
#include <stdexcept>

#include "protoicl/rng.hpp"

namespace protoicl {

ProjectionNetwork::ProjectionNetwork(Index input_dim, Index output_dim, std::uint64_t seed) {
    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
    weight_.resize(input_dim, output_dim);
    for (Index j = 0; j < output_dim; ++j)
        for (Index i = 0; i < input_dim; ++i) weight_(i, j) = scale * rng.next_normal();
    bias_ = Vector::Zero(output_dim);
    weight_grad_ = Matrix::Zero(input_dim, output_dim);
    bias_grad_ = Vector::Zero(output_dim);
}

Vector ProjectionNetwork::forward(const Vector& z) const {
    if (z.size() != weight_.rows())
        throw std::invalid_argument("forward: input dimension mismatch");
    const Vector pre = weight_.transpose() * z + bias_;
    const Index p = pre.size();
    const double mean = pre.mean();
    const double var = (pre.array() - mean).square().sum() / static_cast<double>(p);
    const double inv_std = 1.0 / std::sqrt(var + kNormEpsilon);
    const Vector normed = (pre.array() - mean) * inv_std;
    return normed.cwiseMax(0.0);
}

void ProjectionNetwork::accumulate_gradient(const Vector& z, const Vector& grad_output) {
    const Vector pre = weight_.transpose() * z + bias_;
    const Index p = pre.size();
    const double pd = static_cast<double>(p);
    const double mean = pre.mean();
    const double var = (pre.array() - mean).square().sum() / pd;
    const double inv_std = 1.0 / std::sqrt(var + kNormEpsilon);
    const Vector normed = (pre.array() - mean) * inv_std;

    // ReLU gate
    Vector g = grad_output;
    for (Index i = 0; i < p; ++i)
        if (normed[i] <= 0.0) g[i] = 0.0;

    // InstanceNorm backward (single sample, no affine):
    // d_pre = inv_std * (g - mean(g) - normed * mean(g .* normed))
    const double g_mean = g.mean();
    const double gy_mean = (g.array() * normed.array()).sum() / pd;
    const Vector d_pre = inv_std * (g.array() - g_mean - normed.array() * gy_mean).matrix();

    weight_grad_ += z * d_pre.transpose();
    bias_grad_ += d_pre;
}

void ProjectionNetwork::zero_gradients() {
    weight_grad_.setZero();
    bias_grad_.setZero();
}

} // namespace protoicl
