#include "protoicl/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace protoicl {

AdamState AdamState::for_shape(Index rows, Index cols) {
    AdamState s;
    s.first_moment = Matrix::Zero(rows, cols);
    s.second_moment = Matrix::Zero(rows, cols);
    return s;
}

void adam_step(AdamState& state, Matrix& params, const Matrix& grads, double lr) {
    if (params.rows() != grads.rows() || params.cols() != grads.cols())
        throw std::invalid_argument("adam_step: shape mismatch");
    if (!grads.allFinite())
        throw std::runtime_error("adam_step: non-finite gradient at step " +
                                 std::to_string(state.step + 1));

    state.step += 1;
    state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads;
    state.second_moment =
        state.beta2 * state.second_moment.array() + (1.0 - state.beta2) * grads.array().square();

    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    params.array() -= lr * (state.first_moment.array() / bc1) /
                      ((state.second_moment.array() / bc2).sqrt() + state.eps);
}

void adam_step(AdamState& state, Vector& params, const Vector& grads, double lr) {
    Matrix p = params;
    adam_step(state, p, Matrix(grads), lr);
    params = p.col(0);
}

} // namespace protoicl
