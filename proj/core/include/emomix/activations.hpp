#pragma once

#include <cmath>

#include "emomix/tensor.hpp"

namespace emomix::act {

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double tanh(double x) { return std::tanh(x); }

// Shift-invariant softmax: exp(v - max v) / sum.
Tensor softmax(const Tensor& v);

// Loss on renormalized clamped scores: -ln(c[target] / sum c),
// c = clamp(scores, 1e-7, 1 - 1e-7). Throws std::out_of_range on bad target.
double categorical_cross_entropy(const Tensor& scores, int target);

inline constexpr double kScoreClamp = 1e-7;

}  // namespace emomix::act
