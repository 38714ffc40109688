#pragma once

#include <cstdint>
#include <vector>

#include "emomix/tensor.hpp"

namespace emomix {

// Adam with bias correction over one parameter tensor.
struct AdamState {
    Tensor m;  // first moment
    Tensor v;  // second moment
    std::int64_t t = 0;

    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    explicit AdamState(const std::vector<std::size_t>& shape, double lr_ = 1e-3,
                       double beta1_ = 0.9, double beta2_ = 0.999, double epsilon_ = 1e-8);
};

// One Adam step. Increments state.t, updates moments with bias correction,
// applies the update in place. Throws std::runtime_error on non-finite
// gradients.
void adam_update(Tensor& params, const Tensor& grads, AdamState& state);

}  // namespace emomix
