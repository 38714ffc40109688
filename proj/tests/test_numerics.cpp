#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "emomix/activations.hpp"
#include "emomix/adam.hpp"
#include "emomix/checkpoint.hpp"
#include "emomix/tape.hpp"
#include "emomix/tensor.hpp"

using namespace emomix;

namespace {

using Builder = std::function<Tape::VarId(Tape&, const std::vector<Tape::VarId>&)>;

double eval_loss(const std::vector<Tensor>& leaves, const Builder& build) {
    Tape tape;
    std::vector<Tape::VarId> vars;
    for (const auto& t : leaves) vars.push_back(tape.leaf(t));
    auto loss = build(tape, vars);
    REQUIRE(tape.value(loss).size() == 1);
    return tape.value(loss).at(0);
}

// Central-difference check of every element of every leaf against the tape's
// backward pass.
void check_gradients(std::vector<Tensor> leaves, const Builder& build, double tol = 1e-6,
                     double eps = 1e-5) {
    Tape tape;
    std::vector<Tape::VarId> vars;
    for (const auto& t : leaves) vars.push_back(tape.leaf(t));
    auto loss = build(tape, vars);
    tape.backward(loss);

    for (std::size_t li = 0; li < leaves.size(); ++li) {
        const Tensor& analytic = tape.grad(vars[li]);
        REQUIRE(analytic.same_shape(leaves[li]));
        for (std::size_t i = 0; i < leaves[li].size(); ++i) {
            const double saved = leaves[li].at(i);
            leaves[li].at(i) = saved + eps;
            const double up = eval_loss(leaves, build);
            leaves[li].at(i) = saved - eps;
            const double down = eval_loss(leaves, build);
            leaves[li].at(i) = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic.at(i);
            const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
            INFO("leaf ", li, " element ", i, " analytic ", a, " numeric ", numeric);
            CHECK(std::abs(a - numeric) / denom < tol);
        }
    }
}

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng, double lo = -1.0,
                     double hi = 1.0) {
    return Tensor::uniform(std::move(shape), lo, hi, rng);
}

}  // namespace

TEST_CASE("gradient checks for elementwise ops") {
    std::mt19937_64 rng(101);
    SUBCASE("sigmoid") {
        check_gradients({random_tensor({5}, rng)}, [](Tape& t, const auto& v) {
            return t.sum(t.sigmoid(v[0]));
        });
    }
    SUBCASE("tanh") {
        check_gradients({random_tensor({5}, rng)}, [](Tape& t, const auto& v) {
            return t.sum(t.tanh(v[0]));
        });
    }
    SUBCASE("relu away from the kink") {
        Tensor x = Tensor::vector({-2.0, -0.5, 0.3, 1.7, -1.1, 0.9});
        check_gradients({x}, [](Tape& t, const auto& v) { return t.sum(t.relu(v[0])); });
    }
    SUBCASE("add, mul, scale") {
        check_gradients({random_tensor({4}, rng), random_tensor({4}, rng)},
                        [](Tape& t, const auto& v) {
                            return t.sum(t.scale(t.mul(t.add(v[0], v[1]), v[1]), 0.7));
                        });
    }
    SUBCASE("mul_const") {
        Tensor mask = Tensor::vector({2.0, 0.0, 1.0, 0.5});
        check_gradients({random_tensor({4}, rng)}, [mask](Tape& t, const auto& v) {
            return t.sum(t.mul_const(v[0], mask));
        });
    }
}

TEST_CASE("gradient checks for structural ops") {
    std::mt19937_64 rng(202);
    SUBCASE("concat and slice") {
        Tensor w = random_tensor({3}, rng);
        check_gradients({random_tensor({3}, rng), random_tensor({2}, rng)},
                        [w](Tape& t, const auto& v) {
                            auto c = t.concat({v[0], v[1]});
                            return t.sum(t.mul_const(t.slice(c, 1, 3), w));
                        });
    }
    SUBCASE("stack_rows and row") {
        Tensor w = random_tensor({3}, rng);
        check_gradients({random_tensor({3}, rng), random_tensor({3}, rng)},
                        [w](Tape& t, const auto& v) {
                            auto m = t.stack_rows({v[0], v[1], v[0]});
                            return t.sum(t.mul_const(t.row(m, 2), w));
                        });
    }
    SUBCASE("add_scalars") {
        check_gradients({random_tensor({1}, rng), random_tensor({1}, rng),
                         random_tensor({1}, rng)},
                        [](Tape& t, const auto& v) {
                            return t.add_scalars({v[0], v[1], v[2]});
                        });
    }
    SUBCASE("lookup routes gradients to the referenced rows") {
        Tensor w = random_tensor({8}, rng);
        check_gradients({random_tensor({4, 2}, rng)}, [w](Tape& t, const auto& v) {
            auto rows = t.lookup(v[0], {3, 1, 1, 0});
            Tensor flat_w({4, 2});
            for (std::size_t i = 0; i < 8; ++i) flat_w.at(i) = w.at(i);
            return t.sum(t.mul_const(rows, flat_w));
        });
    }
}

TEST_CASE("gradient checks for affine") {
    std::mt19937_64 rng(303);
    SUBCASE("rank-1 input") {
        check_gradients(
            {random_tensor({3}, rng), random_tensor({3, 2}, rng), random_tensor({2}, rng)},
            [](Tape& t, const auto& v) { return t.sum(t.sigmoid(t.affine(v[0], v[1], v[2]))); });
    }
    SUBCASE("rank-2 input") {
        check_gradients(
            {random_tensor({4, 3}, rng), random_tensor({3, 2}, rng), random_tensor({2}, rng)},
            [](Tape& t, const auto& v) { return t.sum(t.tanh(t.affine(v[0], v[1], v[2]))); });
    }
}

TEST_CASE("conv1d_valid") {
    std::mt19937_64 rng(404);
    const std::size_t L = 7, d = 3, F = 2, k = 2;
    Tensor input = random_tensor({L, d}, rng);
    Tensor kernels = random_tensor({F, k, d}, rng);
    Tensor bias = random_tensor({F}, rng);

    SUBCASE("matches a brute-force sliding window") {
        Tape tape;
        auto out = tape.conv1d_valid(tape.leaf(input), tape.leaf(kernels), tape.leaf(bias));
        const Tensor& got = tape.value(out);
        REQUIRE(got.shape == std::vector<std::size_t>{L - k + 1, F});
        for (std::size_t pos = 0; pos + k <= L; ++pos) {
            for (std::size_t f = 0; f < F; ++f) {
                double acc = bias.at(f);
                for (std::size_t off = 0; off < k; ++off) {
                    for (std::size_t c = 0; c < d; ++c) {
                        acc += input.at(pos + off, c) * kernels.at((f * k + off) * d + c);
                    }
                }
                CHECK(got.at(pos, f) == doctest::Approx(acc).epsilon(1e-12));
            }
        }
    }
    SUBCASE("gradient check") {
        check_gradients({input, kernels, bias}, [](Tape& t, const auto& v) {
            return t.sum(t.tanh(t.conv1d_valid(v[0], v[1], v[2])));
        });
    }
}

TEST_CASE("global_max_pool") {
    SUBCASE("column maxima with first-tie argmax") {
        Tensor m = Tensor::matrix(3, 2,
                                  {1.0, 5.0,   //
                                   4.0, 5.0,   //
                                   4.0, -1.0});
        Tape tape;
        auto out = tape.global_max_pool(tape.leaf(m));
        CHECK(tape.value(out).shape == std::vector<std::size_t>{2});
        CHECK(tape.value(out).at(0) == 4.0);
        CHECK(tape.value(out).at(1) == 5.0);
        tape.backward(tape.sum(out));
        const Tensor& g = tape.grad(0);
        // column 0 max first at row 1, column 1 tie resolved to row 0
        CHECK(g.at(1, 0) == 1.0);
        CHECK(g.at(2, 0) == 0.0);
        CHECK(g.at(0, 1) == 1.0);
        CHECK(g.at(1, 1) == 0.0);
    }
    SUBCASE("valid_rows masks the tail") {
        Tensor m = Tensor::matrix(3, 1, {1.0, 2.0, 9.0});
        Tape tape;
        auto out = tape.global_max_pool(tape.leaf(m), 2);
        CHECK(tape.value(out).at(0) == 2.0);
    }
    SUBCASE("brute-force oracle over random matrices") {
        std::mt19937_64 rng(505);
        for (int trial = 0; trial < 120; ++trial) {
            const std::size_t rows = 1 + rng() % 8;
            const std::size_t cols = 1 + rng() % 5;
            Tensor m = random_tensor({rows, cols}, rng, -3.0, 3.0);
            const std::size_t valid = 1 + rng() % rows;
            Tape tape;
            auto out = tape.global_max_pool(tape.leaf(m), valid);
            for (std::size_t c = 0; c < cols; ++c) {
                double best = m.at(0, c);
                for (std::size_t r = 1; r < valid; ++r) best = std::max(best, m.at(r, c));
                CHECK(tape.value(out).at(c) == best);
            }
        }
    }
    SUBCASE("gradient check on distinct entries") {
        Tensor m = Tensor::matrix(4, 2,
                                  {0.11, -0.7,  //
                                   0.92, 0.33,  //
                                   -0.5, 0.81,  //
                                   0.4, 0.2});
        check_gradients({m}, [](Tape& t, const auto& v) {
            return t.sum(t.global_max_pool(v[0], 3));
        });
    }
}

TEST_CASE("softmax") {
    SUBCASE("hand values") {
        Tensor v = Tensor::vector({std::log(1.0), std::log(3.0)});
        Tensor out = act::softmax(v);
        CHECK(out.at(0) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(out.at(1) == doctest::Approx(0.75).epsilon(1e-12));
    }
    SUBCASE("shift invariance") {
        std::mt19937_64 rng(606);
        Tensor v = random_tensor({6}, rng);
        Tensor shifted = v;
        for (auto& x : shifted.data) x += 1000.0;
        Tensor a = act::softmax(v);
        Tensor b = act::softmax(shifted);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a.at(i) == doctest::Approx(b.at(i)).epsilon(1e-10));
        }
    }
    SUBCASE("tape softmax gradient") {
        std::mt19937_64 rng(607);
        Tensor w = random_tensor({4}, rng);
        check_gradients({random_tensor({4}, rng)}, [w](Tape& t, const auto& v) {
            return t.sum(t.mul_const(t.softmax(v[0]), w));
        });
    }
    SUBCASE("masked_softmax zeros the tail and sums to one over the head") {
        Tensor v = Tensor::vector({0.2, -0.4, 100.0, 100.0});
        Tape tape;
        auto out = tape.masked_softmax(tape.leaf(v), 2);
        const Tensor& got = tape.value(out);
        CHECK(got.at(2) == 0.0);
        CHECK(got.at(3) == 0.0);
        CHECK(got.at(0) + got.at(1) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("masked_softmax gradient") {
        std::mt19937_64 rng(608);
        Tensor w = random_tensor({5}, rng);
        check_gradients({random_tensor({5}, rng)}, [w](Tape& t, const auto& v) {
            return t.sum(t.mul_const(t.masked_softmax(v[0], 3), w));
        });
    }
}

TEST_CASE("rows_weighted_sum") {
    std::mt19937_64 rng(707);
    SUBCASE("hand value") {
        Tensor states = Tensor::matrix(2, 2, {1.0, 2.0, 3.0, 4.0});
        Tensor alpha = Tensor::vector({0.25, 0.75});
        Tape tape;
        auto out = tape.rows_weighted_sum(tape.leaf(states), tape.leaf(alpha));
        CHECK(tape.value(out).at(0) == doctest::Approx(0.25 * 1 + 0.75 * 3));
        CHECK(tape.value(out).at(1) == doctest::Approx(0.25 * 2 + 0.75 * 4));
    }
    SUBCASE("gradient check") {
        Tensor w = random_tensor({3}, rng);
        check_gradients({random_tensor({4, 3}, rng), random_tensor({4}, rng)},
                        [w](Tape& t, const auto& v) {
                            return t.sum(t.mul_const(t.rows_weighted_sum(v[0], v[1]), w));
                        });
    }
}

TEST_CASE("cross entropy") {
    SUBCASE("uniform scores give ln 6") {
        Tensor scores({6}, 0.5);
        CHECK(act::categorical_cross_entropy(scores, 2) ==
              doctest::Approx(std::log(6.0)).epsilon(1e-12));
    }
    SUBCASE("scores are clamped before renormalizing") {
        Tensor scores = Tensor::vector({0.0, 1.0});
        const double c = act::kScoreClamp;
        const double expected = -std::log(c / (c + (1.0 - c)));
        CHECK(act::categorical_cross_entropy(scores, 0) ==
              doctest::Approx(expected).epsilon(1e-10));
    }
    SUBCASE("bad target throws") {
        Tensor scores({6}, 0.5);
        CHECK_THROWS_AS(act::categorical_cross_entropy(scores, 6), std::out_of_range);
        CHECK_THROWS_AS(act::categorical_cross_entropy(scores, -1), std::out_of_range);
    }
    SUBCASE("tape op matches the plain function") {
        std::mt19937_64 rng(808);
        for (int trial = 0; trial < 20; ++trial) {
            Tensor scores = random_tensor({6}, rng, 0.05, 0.95);
            const int target = static_cast<int>(rng() % 6);
            Tape tape;
            auto loss = tape.cross_entropy(tape.leaf(scores), target);
            CHECK(tape.value(loss).at(0) ==
                  doctest::Approx(act::categorical_cross_entropy(scores, target)).epsilon(1e-12));
        }
    }
    SUBCASE("gradient check inside the clamp interval") {
        std::mt19937_64 rng(809);
        Tensor scores = random_tensor({6}, rng, 0.1, 0.9);
        check_gradients({scores}, [](Tape& t, const auto& v) { return t.cross_entropy(v[0], 3); });
    }
    SUBCASE("end-to-end sigmoid + cross entropy gradient") {
        std::mt19937_64 rng(810);
        check_gradients({random_tensor({6}, rng)}, [](Tape& t, const auto& v) {
            return t.cross_entropy(t.sigmoid(v[0]), 1);
        });
    }
}

TEST_CASE("lstm_cell gradient check") {
    std::mt19937_64 rng(909);
    const std::size_t d = 3, H = 2;
    std::vector<Tensor> leaves = {
        random_tensor({d}, rng),         // x
        random_tensor({H}, rng),         // h_prev
        random_tensor({H}, rng),         // c_prev
        random_tensor({d, 4 * H}, rng),  // wx
        random_tensor({H, 4 * H}, rng),  // wh
        random_tensor({4 * H}, rng),     // b
    };
    check_gradients(leaves, [H](Tape& t, const auto& v) {
        LstmWeights w{v[3], v[4], v[5]};
        LstmState prev{v[1], v[2]};
        auto next = lstm_cell(t, v[0], prev, w, H);
        return t.add_scalars({t.sum(next.h), t.sum(t.tanh(next.c))});
    });
}

TEST_CASE("backward basics") {
    SUBCASE("grad of sum is all ones") {
        Tape tape;
        auto x = tape.leaf(Tensor({3, 2}, 0.5));
        tape.backward(tape.sum(x));
        for (double g : tape.grad(x).data) CHECK(g == 1.0);
    }
    SUBCASE("vars not on the path keep zero gradient") {
        Tape tape;
        auto x = tape.leaf(Tensor::vector({1.0, 2.0}));
        auto y = tape.leaf(Tensor::vector({3.0, 4.0}));
        tape.backward(tape.sum(x));
        for (double g : tape.grad(y).data) CHECK(g == 0.0);
    }
    SUBCASE("fan-out accumulates") {
        // f(x) = sum(x + x) -> grad 2 everywhere
        Tape tape;
        auto x = tape.leaf(Tensor::vector({1.0, -1.0}));
        tape.backward(tape.sum(tape.add(x, x)));
        for (double g : tape.grad(x).data) CHECK(g == 2.0);
    }
}

TEST_CASE("dropout") {
    SUBCASE("inference mode is the identity") {
        Tensor x = Tensor::vector({1.0, 2.0, 3.0});
        Tensor out = dropout(x, 0.5, false, 7);
        CHECK(out.data == x.data);
    }
    SUBCASE("p = 0 is the identity in training too") {
        Tensor x = Tensor::vector({1.0, 2.0});
        CHECK(dropout(x, 0.0, true, 7).data == x.data);
    }
    SUBCASE("invalid rates throw") {
        Tensor x = Tensor::vector({1.0});
        CHECK_THROWS_AS(dropout(x, -0.1, true, 7), std::invalid_argument);
        CHECK_THROWS_AS(dropout(x, 1.0, true, 7), std::invalid_argument);
    }
    SUBCASE("drop rate and survivor scale at p = 0.5") {
        const std::size_t n = 200000;
        Tensor x({n}, 1.0);
        Tensor out = dropout(x, 0.5, true, 12345);
        std::size_t zeros = 0;
        double sum = 0.0;
        for (double v : out.data) {
            if (v == 0.0) {
                ++zeros;
            } else {
                CHECK(v == doctest::Approx(2.0));
            }
            sum += v;
        }
        const double zero_frac = static_cast<double>(zeros) / n;
        CHECK(std::abs(zero_frac - 0.5) < 0.01);
        CHECK(std::abs(sum / n - 1.0) < 0.02);  // expectation preserved
    }
    SUBCASE("mask entries are 0 or 1/(1-p)") {
        std::mt19937_64 rng(3);
        Tensor mask = dropout_mask({1000}, 0.2, rng);
        for (double v : mask.data) {
            CHECK((v == 0.0 || v == doctest::Approx(1.25)));
        }
    }
}

TEST_CASE("adam") {
    SUBCASE("first step moves by about lr in the opposite sign of the gradient") {
        Tensor p = Tensor::vector({1.0, -2.0});
        Tensor g = Tensor::vector({0.5, -0.3});
        AdamState state({2}, 0.01);
        adam_update(p, g, state);
        CHECK(p.at(0) == doctest::Approx(1.0 - 0.01).epsilon(1e-4));
        CHECK(p.at(1) == doctest::Approx(-2.0 + 0.01).epsilon(1e-4));
        CHECK(state.t == 1);
    }
    SUBCASE("two steps match the textbook recurrence") {
        const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
        Tensor p = Tensor::vector({0.7});
        AdamState state({1}, lr, b1, b2, eps);
        const double g1 = 0.4, g2 = -0.2;
        double m = 0.0, v = 0.0, x = 0.7;
        for (int t = 1; t <= 2; ++t) {
            const double g = (t == 1) ? g1 : g2;
            m = b1 * m + (1 - b1) * g;
            v = b2 * v + (1 - b2) * g * g;
            const double mhat = m / (1 - std::pow(b1, t));
            const double vhat = v / (1 - std::pow(b2, t));
            x -= lr * mhat / (std::sqrt(vhat) + eps);
        }
        adam_update(p, Tensor::vector({g1}), state);
        adam_update(p, Tensor::vector({g2}), state);
        CHECK(p.at(0) == doctest::Approx(x).epsilon(1e-10));
    }
    SUBCASE("non-finite gradients are rejected") {
        Tensor p = Tensor::vector({1.0});
        AdamState state({1});
        CHECK_THROWS_AS(adam_update(p, Tensor::vector({std::nan("")}), state),
                        std::runtime_error);
    }
    SUBCASE("zero gradient leaves parameters unchanged") {
        Tensor p = Tensor::vector({3.0});
        AdamState state({1});
        adam_update(p, Tensor::vector({0.0}), state);
        CHECK(p.at(0) == 3.0);
    }
}

TEST_CASE("checkpoint round trip") {
    std::mt19937_64 rng(4242);
    std::vector<std::pair<std::string, Tensor>> tensors;
    tensors.emplace_back("embedding", Tensor::uniform({5, 3}, -1, 1, rng));
    tensors.emplace_back("bias", Tensor::uniform({7}, -1, 1, rng));
    tensors.emplace_back("scalarish", Tensor::vector({0.1234567890123456789}));
    const std::string path = "ckpt_roundtrip.bin";
    save_checkpoint(path, tensors);
    auto loaded = load_checkpoint(path);
    REQUIRE(loaded.size() == tensors.size());
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        CHECK(loaded[i].first == tensors[i].first);
        CHECK(loaded[i].second.shape == tensors[i].second.shape);
        CHECK(loaded[i].second.data == tensors[i].second.data);  // bit-exact
    }
    std::remove(path.c_str());

    CHECK_THROWS(load_checkpoint("no_such_checkpoint.bin"));
}
