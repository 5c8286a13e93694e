#pragma once

#include <cstdint>

#include "protoicl/types.hpp"

namespace protoicl {

/// Linear -> InstanceNorm (no affine) -> ReLU, with hand-derived reverse mode.
class ProjectionNetwork {
public:
    ProjectionNetwork() = default;
    ProjectionNetwork(Index input_dim, Index output_dim, std::uint64_t seed);

    Index input_dim() const { return weight_.rows(); }
    Index output_dim() const { return weight_.cols(); }

    Vector forward(const Vector& z) const;

    /// Accumulates dL/dW and dL/db for one sample given dL/d(output).
    /// Recomputes the forward intermediates from z.
    void accumulate_gradient(const Vector& z, const Vector& grad_output);

    void zero_gradients();

    Matrix& weight() { return weight_; }
    Vector& bias() { return bias_; }
    const Matrix& weight() const { return weight_; }
    const Vector& bias() const { return bias_; }
    const Matrix& weight_grad() const { return weight_grad_; }
    const Vector& bias_grad() const { return bias_grad_; }
    Matrix& weight_grad() { return weight_grad_; }
    Vector& bias_grad() { return bias_grad_; }

    static constexpr double kNormEpsilon = 1e-5;

private:
    Matrix weight_;       // d x p
    Vector bias_;         // p
    Matrix weight_grad_;
    Vector bias_grad_;
};

} // namespace protoicl
