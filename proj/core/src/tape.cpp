#include "emomix/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "emomix/activations.hpp"

namespace emomix {

Tape::VarId Tape::push(Tensor value, std::function<void(Tape&)> back) {
    nodes_.push_back({std::move(value), std::move(back)});
    grads_.emplace_back();
    return static_cast<VarId>(nodes_.size() - 1);
}

Tape::VarId Tape::leaf(Tensor value) { return push(std::move(value), {}); }

Tape::VarId Tape::lookup(VarId emb, const std::vector<std::int32_t>& ids) {
    const Tensor& e = value(emb);
    if (e.rank() != 2) throw std::invalid_argument("lookup: embedding must be rank 2");
    const std::size_t d = e.cols();
    Tensor out({ids.size(), d});
    for (std::size_t t = 0; t < ids.size(); ++t) {
        auto id = static_cast<std::size_t>(ids[t]);
        if (id >= e.rows()) throw std::out_of_range("lookup: id out of range");
        for (std::size_t j = 0; j < d; ++j) out.at(t, j) = e.at(id, j);
    }
    VarId out_id = push(std::move(out), nullptr);
    nodes_[out_id].back = [out_id, emb, ids, d](Tape& t) {
        const Tensor& go = t.grad(out_id);
        Tensor& ge = t.grad_ref(emb);
        for (std::size_t k = 0; k < ids.size(); ++k) {
            auto id = static_cast<std::size_t>(ids[k]);
            for (std::size_t j = 0; j < d; ++j) ge.at(id, j) += go.at(k, j);
        }
    };
    return out_id;
}

Tape::VarId Tape::affine(VarId x, VarId w, VarId b) {
    const Tensor& xv = value(x);
    const Tensor& wv = value(w);
    const Tensor& bv = value(b);
    if (wv.rank() != 2 || bv.rank() != 1 || bv.shape[0] != wv.cols()) {
        throw std::invalid_argument("affine: bad weight/bias shapes");
    }
    const std::size_t n = wv.rows(), p = wv.cols();
    Tensor out;
    if (xv.rank() == 1) {
        if (xv.shape[0] != n) throw std::invalid_argument("affine: input size mismatch");
        out = Tensor({p});
        for (std::size_t j = 0; j < p; ++j) {
            double acc = bv.at(j);
            for (std::size_t i = 0; i < n; ++i) acc += xv.at(i) * wv.at(i, j);
            out.at(j) = acc;
        }
    } else if (xv.rank() == 2) {
        if (xv.cols() != n) throw std::invalid_argument("affine: input size mismatch");
        const std::size_t m = xv.rows();
        out = Tensor({m, p});
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t j = 0; j < p; ++j) {
                double acc = bv.at(j);
                for (std::size_t i = 0; i < n; ++i) acc += xv.at(r, i) * wv.at(i, j);
                out.at(r, j) = acc;
            }
        }
    } else {
        throw std::invalid_argument("affine: input must be rank 1 or 2");
    }
    VarId out_id = push(std::move(out), nullptr);
    nodes_[out_id].back = [out_id, x, w, b, n, p](Tape& t) {
        const Tensor& go = t.grad(out_id);
        const Tensor& xv = t.value(x);
        const Tensor& wv = t.value(w);
        Tensor& gx = t.grad_ref(x);
        Tensor& gw = t.grad_ref(w);
        Tensor& gb = t.grad_ref(b);
        if (xv.rank() == 1) {
            for (std::size_t j = 0; j < p; ++j) {
                gb.at(j) += go.at(j);
                for (std::size_t i = 0; i < n; ++i) {
                    gx.at(i) += go.at(j) * wv.at(i, j);
                    gw.at(i, j) += xv.at(i) * go.at(j);
                }
            }
        } else {
            const std::size_t m = xv.rows();
            for (std::size_t r = 0; r < m; ++r) {
                for (std::size_t j = 0; j < p; ++j) {
                    const double g = go.at(r, j);
                    gb.at(j) += g;
                    for (std::size_t i = 0; i < n; ++i) {
                        gx.at(r, i) += g * wv.at(i, j);
                        gw.at(i, j) += xv.at(r, i) * g;
                    }
                }
            }
        }
    };
    return out_id;
}

Tape::VarId Tape::conv1d_valid(VarId input, VarId kernels, VarId bias) {
    const Tensor& in = value(input);
    const Tensor& ker = value(kernels);
    const Tensor& bv = value(bias);
    if (in.rank() != 2 || ker.rank() != 3) {
        throw std::invalid_argument("conv1d_valid: input must be L x d, kernels F x k x d");
    }
    const std::size_t L = in.rows(), d = in.cols();
    const std::size_t F = ker.shape[0], k = ker.shape[1];
    if (ker.shape[2] != d || bv.shape != std::vector<std::size_t>{F}) {
        throw std::invalid_argument("conv1d_valid: shape mismatch");
    }
    if (L < k) throw std::invalid_argument("conv1d_valid: input shorter than kernel");
    const std::size_t T = L - k + 1;
    Tensor out({T, F});
    auto kat = [&](std::size_t f, std::size_t i, std::size_t j) {
        return ker.data[(f * k + i) * d + j];
    };
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t f = 0; f < F; ++f) {
            double acc = bv.at(f);
            for (std::size_t i = 0; i < k; ++i) {
                for (std::size_t j = 0; j < d; ++j) acc += in.at(t + i, j) * kat(f, i, j);
            }
            out.at(t, f) = acc;
        }
    }
    VarId out_id = push(std::move(out), nullptr);
    nodes_[out_id].back = [out_id, input, kernels, bias, T, F, k, d](Tape& t) {
        const Tensor& go = t.grad(out_id);
        const Tensor& in = t.value(input);
        const Tensor& ker = t.value(kernels);
        Tensor& gin = t.grad_ref(input);
        Tensor& gker = t.grad_ref(kernels);
        Tensor& gbias = t.grad_ref(bias);
        for (std::size_t s = 0; s < T; ++s) {
            for (std::size_t f = 0; f < F; ++f) {
                const double g = go.at(s, f);
                gbias.at(f) += g;
                for (std::size_t i = 0; i < k; ++i) {
                    for (std::size_t j = 0; j < d; ++j) {
                        gin.at(s + i, j) += g * ker.data[(f * k + i) * d + j];
                        gker.data[(f * k + i) * d + j] += g * in.at(s + i, j);
                    }
                }
            }
        }
    };
    return out_id;
}

Tape::VarId Tape::global_max_pool(VarId input, std::size_t valid_rows) {
    const Tensor& in = value(input);
    if (in.rank() != 2 || in.rows() == 0) {
        throw std::invalid_argument("global_max_pool: input must be T x F with T >= 1");
    }
    const std::size_t T = (valid_rows == 0 || valid_rows > in.rows()) ? in.rows() : valid_rows;
    const std::size_t F = in.cols();
    Tensor out({F});
    std::vector<std::size_t> argmax(F, 0);
    for (std::size_t f = 0; f < F; ++f) {
        double best = in.at(0, f);
        for (std::size_t t = 1; t < T; ++t) {
            if (in.at(t, f) > best) {
                best = in.at(t, f);
                argmax[f] = t;
            }
        }
        out.at(f) = best;
    }
    VarId out_id = push(std::move(out), nullptr);
    nodes_[out_id].back = [out_id, input, argmax, F](Tape& t) {
        const Tensor& go = t.grad(out_id);
        Tensor& gin = t.grad_ref(input);
        for (std::size_t f = 0; f < F; ++f) gin.at(argmax[f], f) += go.at(f);
    };
    return out_id;
}

Tape::VarId Tape::relu(VarId x) {
    Tensor out = value(x);
    for (double& v : out.data) v = act::relu(v);
    VarId out_id = push(std::move(out), nullptr);
    nodes_[out_id].back = [out_id, x](Tape& t) {
        const Tensor& go = t.grad(out_id);
        const Tensor& xv = t.value(x);
        Tensor& gx = t.grad_ref(x);
        for (std::size_t i = 0; i < xv.size(); ++i) {
            if (xv.at(i) > 0.0) gx.at(i) += go.at(i);
        }
    };
    return out_id;
}

Tape::VarId Tape::sigmoid(VarId x) {
    Tensor out = value(x);
    for (double& v : out.data) v = act::sigmoid(v);
    VarId out_id = push(std::move(out), nullptr);
    nodes_[out_id].back = [out_id, x](Tape& t) {
        const Tensor& go = t.grad(out_id);
        const Tensor& y = t.value(out_id);
        Tensor& gx = t.grad_ref(x);
        for (std::size_t i = 0; i < y.size(); ++i) {
            gx.at(i) += go.at(i) * y.at(i) * (1.0 - y.at(i));
        }
    };
    return out_id;
}

Tape::VarId Tape::tanh(VarId x) {
    Tensor out = value(x);
    for (double& v : out.data) v = std::tanh(v);
    VarId out_id = push(std::move(out), nullptr);
    nodes_[out_id].back = [out_id, x](Tape& t) {
        const Tensor& go = t.grad(out_id);
        const Tensor& y = t.value(out_id);
        Tensor& gx = t.grad_ref(x);
        for (std::size_t i = 0; i < y.size(); ++i) {
            gx.at(i) += go.at(i) * (1.0 - y.at(i) * y.at(i));
        }
    };
    return out_id;
}

Tape::VarId Tape::softmax(VarId v) { return masked_softmax(v, 0); }

Tape::VarId Tape::masked_softmax(VarId v, std::size_t valid) {
    const Tensor& x = value(v);
    if (x.rank() != 1) throw std::invalid_argument("softmax: rank-1 input required");
    const std::size_t n = x.size();
    const std::size_t m = (valid == 0 || valid > n) ? n : valid;
    Tensor out({n});
    double mx = x.at(0);
    for (std::size_t i = 1; i < m; ++i) mx = std::max(mx, x.at(i));
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        out.at(i) = std::exp(x.at(i) - mx);
        z += out.at(i);
    }
    for (std::size_t i = 0; i < m; ++i) out.at(i) /= z;
    VarId out_id = push(std::move(out), nullptr);
    nodes_[out_id].back = [out_id, v, m](Tape& t) {
        const Tensor& go = t.grad(out_id);
        const Tensor& y = t.value(out_id);
        Tensor& gx = t.grad_ref(v);
        double dot = 0.0;
        for (std::size_t i = 0; i < m; ++i) dot += go.at(i) * y.at(i);
        for (std::size_t i = 0; i < m; ++i) gx.at(i) += y.at(i) * (go.at(i) - dot);
    };
    return out_id;
}

Tape::VarId Tape::add(VarId a, VarId b) {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    if (!av.same_shape(bv)) throw std::invalid_argument("add: shape mismatch");
    Tensor out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out.at(i) += bv.at(i);
    VarId out_id = push(std::move(out), nullptr);
    nodes_[out_id].back = [out_id, a, b](Tape& t) {
        const Tensor& go = t.grad(out_id);
        Tensor& ga = t.grad_ref(a);
        Tensor& gb = t.grad_ref(b);
        for (std::size_t i = 0; i < go.size(); ++i) {
            ga.at(i) += go.at(i);
            gb.at(i) += go.at(i);
        }
    };
    return out_id;
}

Tape::VarId Tape::mul(VarId a, VarId b) {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    if (!av.same_shape(bv)) throw std::invalid_argument("mul: shape mismatch");
    Tensor out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out.at(i) *= bv.at(i);
    VarId out_id = push(std::move(out), nullptr);
    nodes_[out_id].back = [out_id, a, b](Tape& t) {
        const Tensor& go = t.grad(out_id);
        const Tensor& av = t.value(a);
        const Tensor& bv = t.value(b);
        Tensor& ga = t.grad_ref(a);
        Tensor& gb = t.grad_ref(b);
        for (std::size_t i = 0; i < go.size(); ++i) {
            ga.at(i) += go.at(i) * bv.at(i);
            gb.at(i) += go.at(i) * av.at(i);
        }
    };
    return out_id;
}

Tape::VarId Tape::scale(VarId x, double c) {
    Tensor out = value(x);
    for (double& v : out.data) v *= c;
    VarId out_id = push(std::move(out), nullptr);
    nodes_[out_id].back = [out_id, x, c](Tape& t) {
        const Tensor& go = t.grad(out_id);
        Tensor& gx = t.grad_ref(x);
        for (std::size_t i = 0; i < go.size(); ++i) gx.at(i) += c * go.at(i);
    };
    return out_id;
}

Tape::VarId Tape::mul_const(VarId x, const Tensor& mask) {
    const Tensor& xv = value(x);
    if (!xv.same_shape(mask)) throw std::invalid_argument("mul_const: shape mismatch");
    Tensor out = xv;
    for (std::size_t i = 0; i < out.size(); ++i) out.at(i) *= mask.at(i);
    VarId out_id = push(std::move(out), nullptr);
    nodes_[out_id].back = [out_id, x, mask](Tape& t) {
        const Tensor& go = t.grad(out_id);
        Tensor& gx = t.grad_ref(x);
        for (std::size_t i = 0; i < go.size(); ++i) gx.at(i) += go.at(i) * mask.at(i);
    };
    return out_id;
}

Tape::VarId Tape::concat(const std::vector<VarId>& parts) {
    std::size_t total = 0;
    for (VarId p : parts) {
        if (value(p).rank() != 1) throw std::invalid_argument("concat: rank-1 parts required");
        total += value(p).size();
    }
    Tensor out({total});
    std::size_t off = 0;
    for (VarId p : parts) {
        const Tensor& pv = value(p);
        for (std::size_t i = 0; i < pv.size(); ++i) out.at(off + i) = pv.at(i);
        off += pv.size();
    }
    VarId out_id = push(std::move(out), nullptr);
    nodes_[out_id].back = [out_id, parts](Tape& t) {
        const Tensor& go = t.grad(out_id);
        std::size_t off = 0;
        for (VarId p : parts) {
            Tensor& gp = t.grad_ref(p);
            for (std::size_t i = 0; i < gp.size(); ++i) gp.at(i) += go.at(off + i);
            off += gp.size();
        }
    };
    return out_id;
}

Tape::VarId Tape::stack_rows(const std::vector<VarId>& rows) {
    if (rows.empty()) throw std::invalid_argument("stack_rows: no rows");
    const std::size_t n = value(rows[0]).size();
    Tensor out({rows.size(), n});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Tensor& rv = value(rows[i]);
        if (rv.rank() != 1 || rv.size() != n) {
            throw std::invalid_argument("stack_rows: inconsistent row shapes");
        }
        for (std::size_t j = 0; j < n; ++j) out.at(i, j) = rv.at(j);
    }
    VarId out_id = push(std::move(out), nullptr);
    nodes_[out_id].back = [out_id, rows, n](Tape& t) {
        const Tensor& go = t.grad(out_id);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Tensor& gr = t.grad_ref(rows[i]);
            for (std::size_t j = 0; j < n; ++j) gr.at(j) += go.at(i, j);
        }
    };
    return out_id;
}

Tape::VarId Tape::row(VarId m, std::size_t i) {
    const Tensor& mv = value(m);
    if (mv.rank() != 2 || i >= mv.rows()) throw std::out_of_range("row: bad index");
    const std::size_t n = mv.cols();
    Tensor out({n});
    for (std::size_t j = 0; j < n; ++j) out.at(j) = mv.at(i, j);
    VarId out_id = push(std::move(out), nullptr);
    nodes_[out_id].back = [out_id, m, i, n](Tape& t) {
        const Tensor& go = t.grad(out_id);
        Tensor& gm = t.grad_ref(m);
        for (std::size_t j = 0; j < n; ++j) gm.at(i, j) += go.at(j);
    };
    return out_id;
}

Tape::VarId Tape::slice(VarId v, std::size_t start, std::size_t len) {
    const Tensor& xv = value(v);
    if (xv.rank() != 1 || start + len > xv.size()) {
        throw std::out_of_range("slice: bad range");
    }
    Tensor out({len});
    for (std::size_t i = 0; i < len; ++i) out.at(i) = xv.at(start + i);
    VarId out_id = push(std::move(out), nullptr);
    nodes_[out_id].back = [out_id, v, start, len](Tape& t) {
        const Tensor& go = t.grad(out_id);
        Tensor& gx = t.grad_ref(v);
        for (std::size_t i = 0; i < len; ++i) gx.at(start + i) += go.at(i);
    };
    return out_id;
}

Tape::VarId Tape::sum(VarId x) {
    const Tensor& xv = value(x);
    double acc = 0.0;
    for (double v : xv.data) acc += v;
    VarId out_id = push(Tensor({1}, {acc}), nullptr);
    nodes_[out_id].back = [out_id, x](Tape& t) {
        const double g = t.grad(out_id).at(0);
        Tensor& gx = t.grad_ref(x);
        for (double& v : gx.data) v += g;
    };
    return out_id;
}

Tape::VarId Tape::add_scalars(const std::vector<VarId>& xs) {
    double acc = 0.0;
    for (VarId x : xs) {
        if (value(x).size() != 1) throw std::invalid_argument("add_scalars: scalars required");
        acc += value(x).at(0);
    }
    VarId out_id = push(Tensor({1}, {acc}), nullptr);
    nodes_[out_id].back = [out_id, xs](Tape& t) {
        const double g = t.grad(out_id).at(0);
        for (VarId x : xs) t.grad_ref(x).at(0) += g;
    };
    return out_id;
}

Tape::VarId Tape::rows_weighted_sum(VarId states, VarId alpha) {
    const Tensor& s = value(states);
    const Tensor& a = value(alpha);
    if (s.rank() != 2 || a.rank() != 1 || a.size() != s.rows()) {
        throw std::invalid_argument("rows_weighted_sum: shape mismatch");
    }
    const std::size_t T = s.rows(), H = s.cols();
    Tensor out({H});
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t h = 0; h < H; ++h) out.at(h) += a.at(t) * s.at(t, h);
    }
    VarId out_id = push(std::move(out), nullptr);
    nodes_[out_id].back = [out_id, states, alpha, T, H](Tape& t) {
        const Tensor& go = t.grad(out_id);
        const Tensor& s = t.value(states);
        const Tensor& a = t.value(alpha);
        Tensor& gs = t.grad_ref(states);
        Tensor& ga = t.grad_ref(alpha);
        for (std::size_t k = 0; k < T; ++k) {
            double dot = 0.0;
            for (std::size_t h = 0; h < H; ++h) {
                gs.at(k, h) += a.at(k) * go.at(h);
                dot += go.at(h) * s.at(k, h);
            }
            ga.at(k) += dot;
        }
    };
    return out_id;
}

Tape::VarId Tape::cross_entropy(VarId scores, int target) {
    const Tensor& s = value(scores);
    if (s.rank() != 1) throw std::invalid_argument("cross_entropy: rank-1 scores required");
    if (target < 0 || static_cast<std::size_t>(target) >= s.size()) {
        throw std::out_of_range("cross_entropy: target out of range");
    }
    const double lo = act::kScoreClamp, hi = 1.0 - act::kScoreClamp;
    double z = 0.0;
    for (double v : s.data) z += std::clamp(v, lo, hi);
    const double ct = std::clamp(s.at(static_cast<std::size_t>(target)), lo, hi);
    const double loss = std::log(z) - std::log(ct);
    VarId out_id = push(Tensor({1}, {loss}), nullptr);
    nodes_[out_id].back = [out_id, scores, target, z, ct, lo, hi](Tape& t) {
        const double g = t.grad(out_id).at(0);
        const Tensor& s = t.value(scores);
        Tensor& gs = t.grad_ref(scores);
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (s.at(j) <= lo || s.at(j) >= hi) continue;  // clamped: no gradient
            double d = 1.0 / z;
            if (j == static_cast<std::size_t>(target)) d -= 1.0 / ct;
            gs.at(j) += g * d;
        }
    };
    return out_id;
}

void Tape::backward(VarId loss) {
    if (value(loss).size() != 1) throw std::invalid_argument("backward: loss must be scalar");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        grads_[i] = Tensor(nodes_[i].value.shape);
    }
    grads_[loss].at(0) = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        if (nodes_[i].back) nodes_[i].back(*this);
    }
}

LstmState lstm_cell(Tape& tape, Tape::VarId x_t, LstmState prev, const LstmWeights& w,
                    std::size_t hidden) {
    auto zx = tape.affine(x_t, w.wx, w.b);
    auto zero_b = tape.leaf(Tensor({4 * hidden}));
    auto zh = tape.affine(prev.h, w.wh, zero_b);
    auto z = tape.add(zx, zh);
    auto i = tape.sigmoid(tape.slice(z, 0, hidden));
    auto f = tape.sigmoid(tape.slice(z, hidden, hidden));
    auto o = tape.sigmoid(tape.slice(z, 2 * hidden, hidden));
    auto g = tape.tanh(tape.slice(z, 3 * hidden, hidden));
    auto c = tape.add(tape.mul(f, prev.c), tape.mul(i, g));
    auto h = tape.mul(o, tape.tanh(c));
    return {h, c};
}

Tensor dropout_mask(const std::vector<std::size_t>& shape, double p, std::mt19937_64& rng) {
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must be in [0, 1)");
    Tensor mask(shape);
    if (p == 0.0) {
        for (double& v : mask.data) v = 1.0;
        return mask;
    }
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    const double keep_scale = 1.0 / (1.0 - p);
    for (double& v : mask.data) v = dist(rng) < p ? 0.0 : keep_scale;
    return mask;
}

Tensor dropout(const Tensor& input, double p, bool training, std::uint64_t seed) {
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must be in [0, 1)");
    if (!training || p == 0.0) return input;
    std::mt19937_64 rng(seed);
    Tensor mask = dropout_mask(input.shape, p, rng);
    Tensor out = input;
    for (std::size_t i = 0; i < out.size(); ++i) out.at(i) *= mask.at(i);
    return out;
}

}  // namespace emomix
