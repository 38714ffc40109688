#include "emomix/activations.hpp"

#include <algorithm>
#include <stdexcept>

namespace emomix::act {

Tensor softmax(const Tensor& v) {
    if (v.size() == 0) throw std::invalid_argument("softmax: empty input");
    Tensor out = v;
    double mx = *std::max_element(v.data.begin(), v.data.end());
    double z = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.at(i) = std::exp(v.at(i) - mx);
        z += out.at(i);
    }
    for (double& x : out.data) x /= z;
    return out;
}

double categorical_cross_entropy(const Tensor& scores, int target) {
    if (target < 0 || static_cast<std::size_t>(target) >= scores.size()) {
        throw std::out_of_range("cross entropy: target out of range");
    }
    const double lo = kScoreClamp, hi = 1.0 - kScoreClamp;
    double z = 0.0;
    for (double s : scores.data) z += std::clamp(s, lo, hi);
    const double ct = std::clamp(scores.at(static_cast<std::size_t>(target)), lo, hi);
    return std::log(z) - std::log(ct);
}

}  // namespace emomix::act
