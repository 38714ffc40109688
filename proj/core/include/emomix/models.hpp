#pragma once

#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "emomix/corpus.hpp"
#include "emomix/embeddings.hpp"
#include "emomix/emotion.hpp"
#include "emomix/tape.hpp"
#include "emomix/tensor.hpp"
#include "emomix/vocab.hpp"

namespace emomix {

enum class Architecture { cnn, lstm, bilstm, attn_bilstm };

std::string_view arch_name(Architecture a);
std::optional<Architecture> arch_from_name(std::string_view name);

struct ModelHyper {
    Architecture arch = Architecture::cnn;
    int max_len = 64;
    int emb_dim = 300;
    int lstm_units = 150;
    int num_kernels = 200;                       // per kernel size
    std::vector<int> kernel_sizes = {3, 6, 9, 12};
    int cnn_hidden1 = 256;
    int cnn_hidden2 = 64;
    int rnn_hidden = 64;
    int attn_dim = 64;
    double cnn_dropout = 0.5;
    double input_dropout = 0.2;
    double recurrent_dropout = 0.2;
    bool freeze_embedding = false;
};

// All weight tensors for one classifier, addressable by name for
// checkpointing and optimizer state.
struct ModelParams {
    ModelHyper hyper;
    std::vector<std::pair<std::string, Tensor>> tensors;
    std::unordered_map<std::string, std::size_t> name_index;

    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;
    void add(std::string name, Tensor t);

    // Embedding row for each vocab id comes from the embedding set
    // (pad/unk rows start at zero); other weights are Glorot-uniform with
    // the given seed, biases zero except the LSTM forget gate at 1.
    static ModelParams init(const ModelHyper& hyper, const Vocab& vocab,
                            const EmbeddingSet& emb, std::uint64_t seed);
    // Random embedding rows, for tests that need no trained vectors.
    static ModelParams init_random(const ModelHyper& hyper, std::size_t vocab_size,
                                   std::uint64_t seed);
};

// Parameter leaves registered on one tape; reused across samples in a batch
// so gradients accumulate per parameter.
struct ForwardContext {
    Tape* tape;
    std::vector<std::pair<std::string, Tape::VarId>> leaves;

    Tape::VarId leaf(const std::string& name) const;
};

ForwardContext make_context(Tape& tape, const ModelParams& params);

// Runs one encoded tweet through the architecture; returns the 6-score var.
// Dropout draws from rng only when training is set.
Tape::VarId model_forward(ForwardContext& ctx, const ModelParams& params,
                          const std::vector<std::int32_t>& ids, bool training,
                          std::mt19937_64& rng);

// Inference-mode forward on a throwaway tape.
Tensor forward_scores(const ModelParams& params, const std::vector<std::int32_t>& ids);

int argmax_class(const Tensor& scores);  // ties to the lowest index

struct EmptyInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Prediction {
    Emotion emotion;
    Tensor scores;
};

// clean -> encode -> forward (training off) -> argmax.
// Throws EmptyInputError when cleaning leaves nothing.
Prediction predict(const std::string& raw_text, const ModelParams& params, const Vocab& vocab,
                   const std::unordered_set<std::string>& scrape_keywords);

// Checkpoint plus a human-readable key-value manifest at path + ".manifest".
void save_model(const ModelParams& params, const std::string& path,
                const std::unordered_map<std::string, std::string>& extra_manifest = {});
ModelParams load_model(const std::string& path);
std::unordered_map<std::string, std::string> load_manifest(const std::string& path);

}  // namespace emomix
