#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "emomix/tensor.hpp"
#include "emomix/vocab.hpp"

namespace emomix {

enum class EmbeddingMode { word, subword };

struct SgnsConfig {
    int dim = 300;
    int window = 10;
    int negatives = 5;
    int epochs = 5;
    double lr_start = 0.025;
    double lr_floor = 1e-4;
    std::uint64_t seed = 1;
    EmbeddingMode mode = EmbeddingMode::word;
    int nmin = 3;
    int nmax = 6;
    std::size_t num_buckets = 200000;
};

// Character n-grams of the '<'-'>' bracketed word: all contiguous substrings
// with length in [nmin, nmax] except the whole bracketed word, ordered by
// start index then length, followed by the whole bracketed word once.
std::vector<std::string> ngrams(const std::string& word, int nmin, int nmax);

std::uint32_t fnv1a_hash(const std::string& s);

struct EmbeddingSet {
    EmbeddingMode mode = EmbeddingMode::word;
    int dim = 0;
    int nmin = 3;
    int nmax = 6;
    std::vector<std::string> tokens;  // by id, includes pad/unk at 0/1
    std::unordered_map<std::string, std::int32_t> index;
    Tensor input;    // V x d, word vectors
    Tensor output;   // V x d, context vectors
    Tensor buckets;  // B x d, subword mode only
    std::vector<std::vector<std::uint32_t>> word_buckets;  // per id, hashed n-grams

    std::int32_t id_of(const std::string& token) const;
    std::vector<double> input_row(std::int32_t id) const;
    // Word vector for any token: input row in word mode (unknown -> zeros),
    // subword composition in subword mode.
    std::vector<double> vector_for(const std::string& token) const;
};

EmbeddingSet init_embeddings(const Vocab& vocab, const SgnsConfig& cfg);

// One SGNS update. Returns the loss at the pre-update parameters, then
// applies one SGD step to the center representation (word vector, plus its
// n-gram vectors in subword mode) and to the context/negative vectors.
double sgns_step(std::int32_t center, std::int32_t context,
                 const std::vector<std::int32_t>& negatives, EmbeddingSet& emb, double lr);

// Skip-gram training over token-id sentences with dynamic window and K
// table-sampled negatives per pair. Deterministic for a fixed seed.
EmbeddingSet train_sgns(const std::vector<std::vector<std::int32_t>>& sentences,
                        const Vocab& vocab, const NegativeTable& table,
                        const SgnsConfig& cfg);

// Mean of the word's own vector (when in vocab) and its hashed n-gram
// vectors. Requires subword mode.
std::vector<double> fasttext_vector(const std::string& word, const EmbeddingSet& emb);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

struct Neighbor {
    std::string token;
    double cosine;
};

std::vector<Neighbor> nearest_neighbors(const std::string& query, const EmbeddingSet& emb,
                                        std::size_t k);

// `.vec` text format: header "V d", then one "token v1 ... vd" line per id.
// Subword bucket matrix goes to a binary sidecar at path + ".sub".
void save_vec(const EmbeddingSet& emb, const std::string& path);
EmbeddingSet load_vec(const std::string& path);

}  // namespace emomix
