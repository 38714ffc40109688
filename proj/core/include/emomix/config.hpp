#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace emomix {

// Pipeline configuration, key-value file with four sections mirroring the
// training setup plus a paths section. Unknown keys are rejected.
struct PipelineConfig {
    struct Paths {
        std::string corpus_in;
        std::string corpus_out;
        std::string diagnostics_out;
        std::string hindi_lexicon;
        std::string english_lexicon;
        std::string hashtag_map;
        std::string vocab_out;
        std::string vec_out;
        std::string checkpoint_dir;
        std::string history_out;
        std::string report_out;
        std::string grid_out;
        std::string model_in;
    } paths;

    struct Embedding {
        int size = 300;
        int window = 10;
        int negatives = 5;
        int epochs = 5;
        double lr_start = 0.025;
        double lr_floor = 1e-4;
        std::string mode = "word";  // word | subword
        int nmin = 3;
        int nmax = 6;
        std::uint64_t buckets = 200000;
        double alpha = 0.75;
    } embedding;

    struct Cnn {
        double dropout = 0.5;
        int stride = 1;  // the only supported value
        int kernels = 200;
        int ks1 = 3;
        int ks2 = 6;
        int ks3 = 9;
        int ks4 = 12;
        int hidden1 = 256;
        int hidden2 = 64;
    } cnn;

    struct Rnn {
        int lstm_units = 150;
        double input_dropout = 0.2;
        double recurrent_dropout = 0.2;
        int hidden = 64;
        int attn_dim = 64;
    } rnn;

    struct Training {
        int epochs = 20;
        int batch_size = 64;
        double lr = 1e-3;
        double adam_epsilon = 1e-8;
        double val_fraction = 0.10;
        std::uint64_t seed = 42;
        int max_len = 64;
        int min_count = 10;
        std::string architecture = "attn_bilstm";
        bool freeze_embedding = false;
    } training;

    static PipelineConfig load(const std::string& path);
    void apply(const std::string& dotted_key, const std::string& value);  // "section.key"
    void dump(std::ostream& out) const;
    std::string dump_string() const;
    void validate() const;
};

}  // namespace emomix
