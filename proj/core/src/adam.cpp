#include "emomix/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace emomix {

AdamState::AdamState(const std::vector<std::size_t>& shape, double lr_, double beta1_,
                     double beta2_, double epsilon_)
    : m(shape), v(shape), lr(lr_), beta1(beta1_), beta2(beta2_), epsilon(epsilon_) {}

void adam_update(Tensor& params, const Tensor& grads, AdamState& state) {
    if (!params.same_shape(grads) || !params.same_shape(state.m)) {
        throw std::invalid_argument("adam_update: shape mismatch");
    }
    if (!grads.all_finite()) throw std::runtime_error("adam_update: non-finite gradient");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads.at(i);
        state.m.at(i) = state.beta1 * state.m.at(i) + (1.0 - state.beta1) * g;
        state.v.at(i) = state.beta2 * state.v.at(i) + (1.0 - state.beta2) * g * g;
        const double mhat = state.m.at(i) / bc1;
        const double vhat = state.v.at(i) / bc2;
        params.at(i) -= state.lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
}

}  // namespace emomix
