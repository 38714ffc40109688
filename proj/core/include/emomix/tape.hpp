#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "emomix/tensor.hpp"

namespace emomix {

// Reverse-mode autodiff over a linear op record. Ops may only reference
// previously created vars, so creation order is a topological order and
// backward() is a single reverse sweep.
class Tape {
  public:
    using VarId = std::int32_t;

    VarId leaf(Tensor value);

    const Tensor& value(VarId id) const { return nodes_[id].value; }
    const Tensor& grad(VarId id) const { return grads_[id]; }
    std::size_t num_vars() const { return nodes_.size(); }

    // emb: V x d, ids index rows -> T x d
    VarId lookup(VarId emb, const std::vector<std::int32_t>& ids);

    // x: (n) or (m x n); w: n x p; b: (p) -> (p) or (m x p)
    VarId affine(VarId x, VarId w, VarId b);

    // input: L x d; kernels: F x k x d; bias: (F) -> (L-k+1) x F
    VarId conv1d_valid(VarId input, VarId kernels, VarId bias);

    // input: T x F -> (F); rows at or beyond valid_rows are excluded
    // (valid_rows == 0 means all rows). Ties go to the first occurrence.
    VarId global_max_pool(VarId input, std::size_t valid_rows = 0);

    VarId relu(VarId x);
    VarId sigmoid(VarId x);
    VarId tanh(VarId x);
    VarId softmax(VarId v);  // rank-1

    // softmax over entries [0, valid) with the rest forced to zero weight;
    // valid == 0 means all entries.
    VarId masked_softmax(VarId v, std::size_t valid);

    VarId add(VarId a, VarId b);          // same shape
    VarId mul(VarId a, VarId b);          // elementwise, same shape
    VarId scale(VarId x, double c);
    VarId mul_const(VarId x, const Tensor& mask);  // elementwise by a constant
    VarId concat(const std::vector<VarId>& parts);  // rank-1 parts
    VarId stack_rows(const std::vector<VarId>& rows);  // rank-1 rows -> matrix
    VarId row(VarId m, std::size_t i);              // matrix row as rank-1
    VarId slice(VarId v, std::size_t start, std::size_t len);  // rank-1
    VarId sum(VarId x);  // scalar (shape {1})
    VarId add_scalars(const std::vector<VarId>& xs);

    // states: T x H; alpha: (T) -> (H), out = sum_t alpha[t] * states[t,:]
    VarId rows_weighted_sum(VarId states, VarId alpha);

    // scores: rank-1 in (0,1); clamped, renormalized, -ln p[target] -> scalar
    VarId cross_entropy(VarId scores, int target);

    // Seeds d(loss)/d(loss) = 1 and accumulates gradients for every var.
    // loss must be scalar. Unreached vars keep zero gradient.
    void backward(VarId loss);

  private:
    struct Node {
        Tensor value;
        std::function<void(Tape&)> back;  // empty for leaves
    };

    VarId push(Tensor value, std::function<void(Tape&)> back);
    Tensor& grad_ref(VarId id) { return grads_[id]; }

    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;
};

struct LstmWeights {
    Tape::VarId wx;  // d x 4H, gate order [i f o g]
    Tape::VarId wh;  // H x 4H
    Tape::VarId b;   // 4H
};

struct LstmState {
    Tape::VarId h;
    Tape::VarId c;
};

// One step of a standard LSTM cell: i,f,o sigmoid gates, tanh candidate,
// c = f*c_prev + i*g, h = o*tanh(c). Built from tape primitives so the
// backward pass comes from the tape.
LstmState lstm_cell(Tape& tape, Tape::VarId x_t, LstmState prev, const LstmWeights& w,
                    std::size_t hidden);

// Plain-tensor dropout. Training: inverted dropout with survivor scale
// 1/(1-p); inference: identity. Throws std::invalid_argument unless
// 0 <= p < 1.
Tensor dropout(const Tensor& input, double p, bool training, std::uint64_t seed);

// 0/1-over-(1-p) mask for use as a mul_const operand.
Tensor dropout_mask(const std::vector<std::size_t>& shape, double p, std::mt19937_64& rng);

}  // namespace emomix
