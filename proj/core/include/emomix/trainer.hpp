#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "emomix/corpus.hpp"
#include "emomix/models.hpp"
#include "emomix/vocab.hpp"

namespace emomix {

struct Example {
    std::vector<std::int32_t> ids;
    int label = 0;  // emotion code
};

using Dataset = std::vector<Example>;

struct TrainConfig {
    int epochs = 20;
    int batch_size = 64;
    double lr = 1e-3;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 42;
    double val_fraction = 0.10;
    std::string checkpoint_dir;  // empty: no checkpoints written
    bool verbose = false;
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
    std::string checkpoint_path;
};

struct RunHistory {
    std::vector<EpochRecord> epochs;
};

void write_history_jsonl(const RunHistory& history, std::ostream& out);

// Stratified split: each class is split as close to `fraction` as rounding
// allows, with at least one example on each side. Deterministic per seed.
std::pair<Dataset, Dataset> split_train_val(const Dataset& dataset, double fraction,
                                            std::uint64_t seed);

// Batched Adam training with per-epoch metrics and checkpoints. Mutates the
// model in place; deterministic for a fixed seed.
RunHistory train(ModelParams& model, const Dataset& train_set, const Dataset& val_set,
                 const TrainConfig& cfg);

// Best-validation-accuracy epoch (1-based); earliest on ties.
int select_checkpoint(const RunHistory& history);

struct EvalReport {
    double accuracy = 0.0;
    std::array<std::array<std::size_t, kNumEmotions>, kNumEmotions> confusion{};  // [true][pred]
    std::array<double, kNumEmotions> precision{};
    std::array<double, kNumEmotions> recall{};
    std::array<double, kNumEmotions> f1{};
    std::size_t total = 0;
};

EvalReport evaluate(const ModelParams& model, const Dataset& dataset);
std::string format_eval_report(const EvalReport& report);

struct GridCellInput {
    Architecture arch = Architecture::cnn;
    std::string embedding_name;  // e.g. "word2vec", "fasttext"
    std::string corpus_name;     // e.g. "hinglish", "hinglish_english"
    std::string vec_path;
};

struct GridCellResult {
    GridCellInput cell;
    bool ok = false;
    std::string error;
    double accuracy = 0.0;
    int best_epoch = 0;
};

// Trains one model per cell on the given labeled corpus. A missing or
// unreadable embedding artifact fails only that cell.
std::vector<GridCellResult> run_experiment_grid(const std::vector<GridCellInput>& cells,
                                                const std::vector<TweetRecord>& corpus,
                                                const ModelHyper& base_hyper,
                                                const TrainConfig& cfg, int min_count);

// `architecture<TAB>embedding<TAB>corpus<TAB>accuracy<TAB>best_epoch`
void write_grid_tsv(const std::vector<GridCellResult>& results, std::ostream& out);
std::string format_grid_table(const std::vector<GridCellResult>& results);

// Helpers shared by trainer and CLI.
Dataset encode_dataset(const std::vector<TweetRecord>& corpus, const Vocab& vocab,
                       std::size_t max_len);
Vocab vocab_from_corpus(const std::vector<TweetRecord>& corpus, int min_count);

}  // namespace emomix
