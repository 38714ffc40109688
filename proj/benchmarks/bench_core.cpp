#include <benchmark/benchmark.h>

#include <random>

#include "emomix/embeddings.hpp"
#include "emomix/models.hpp"
#include "emomix/tape.hpp"
#include "emomix/vocab.hpp"

namespace {

emomix::Vocab toy_vocab(int n) {
    std::vector<std::string> tokens;
    for (int i = 0; i < n; ++i) {
        for (int rep = 0; rep < 5; ++rep) tokens.push_back("w" + std::to_string(i));
    }
    return emomix::Vocab::build(tokens, 1);
}

void BM_SgnsStep(benchmark::State& state) {
    auto vocab = toy_vocab(100);
    emomix::SgnsConfig cfg;
    cfg.dim = static_cast<int>(state.range(0));
    auto emb = emomix::init_embeddings(vocab, cfg);
    std::vector<std::int32_t> negatives = {4, 5, 6, 7, 8};
    for (auto _ : state) {
        benchmark::DoNotOptimize(emomix::sgns_step(2, 3, negatives, emb, 0.01));
    }
}
BENCHMARK(BM_SgnsStep)->Arg(100)->Arg(300);

void BM_Conv1d(benchmark::State& state) {
    emomix::Tape tape;
    std::mt19937_64 rng(7);
    auto input = tape.leaf(emomix::Tensor::uniform({64, 100}, -1, 1, rng));
    auto kernels = tape.leaf(emomix::Tensor::uniform({50, 3, 100}, -1, 1, rng));
    auto bias = tape.leaf(emomix::Tensor({50}));
    for (auto _ : state) {
        emomix::Tape t;
        std::mt19937_64 r(7);
        auto in = t.leaf(emomix::Tensor::uniform({64, 100}, -1, 1, r));
        auto k = t.leaf(emomix::Tensor::uniform({50, 3, 100}, -1, 1, r));
        auto b = t.leaf(emomix::Tensor({50}));
        benchmark::DoNotOptimize(t.conv1d_valid(in, k, b));
    }
    (void)input;
    (void)kernels;
    (void)bias;
}
BENCHMARK(BM_Conv1d);

void BM_LstmForward(benchmark::State& state) {
    auto hyper = emomix::ModelHyper{};
    hyper.arch = emomix::Architecture::lstm;
    hyper.max_len = 32;
    hyper.emb_dim = 64;
    hyper.lstm_units = 64;
    auto params = emomix::ModelParams::init_random(hyper, 500, 11);
    std::vector<std::int32_t> ids(32, 0);
    for (int i = 0; i < 20; ++i) ids[static_cast<std::size_t>(i)] = 2 + i;
    for (auto _ : state) {
        benchmark::DoNotOptimize(emomix::forward_scores(params, ids));
    }
}
BENCHMARK(BM_LstmForward);

}  // namespace

BENCHMARK_MAIN();
