#pragma once

#include <cstdint>

#include "protoicl/types.hpp"

namespace protoicl {

/// Bias-corrected Adam for one parameter tensor (matrices; vectors go
/// through as n x 1).
struct AdamState {
    Matrix first_moment;
    Matrix second_moment;
    std::int64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState for_shape(Index rows, Index cols);
};

void adam_step(AdamState& state, Matrix& params, const Matrix& grads, double lr);
void adam_step(AdamState& state, Vector& params, const Vector& grads, double lr);

} // namespace protoicl
