// Command-line pipeline driver: preprocess, vocab/embedding training,
// classifier training, evaluation, prediction, and the experiment grid.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "emomix/config.hpp"
#include "emomix/corpus.hpp"
#include "emomix/embeddings.hpp"
#include "emomix/models.hpp"
#include "emomix/text.hpp"
#include "emomix/trainer.hpp"
#include "emomix/vocab.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitMissingInput = 2;
constexpr int kExitEmptyCorpus = 3;
constexpr int kExitBadArchitecture = 4;
constexpr int kExitEmptyPredictionInput = 5;

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;  // section.key=value
};

emomix::PipelineConfig resolve_config(const Common& common) {
    emomix::PipelineConfig cfg;
    if (!common.config_path.empty()) cfg = emomix::PipelineConfig::load(common.config_path);
    for (const auto& kv : common.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("--set expects section.key=value, got: " + kv);
        }
        cfg.apply(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, Common& common) {
    cmd->add_option("--config", common.config_path, "Key-value config file");
    cmd->add_option("--set", common.overrides,
                    "Override a config key, e.g. --set training.epochs=5");
    cmd->footer("Config keys and defaults:\n" + emomix::PipelineConfig().dump_string());
}

bool file_exists(const std::string& path) {
    return !path.empty() && std::filesystem::exists(path);
}

emomix::SgnsConfig sgns_config(const emomix::PipelineConfig& cfg) {
    emomix::SgnsConfig sc;
    sc.dim = cfg.embedding.size;
    sc.window = cfg.embedding.window;
    sc.negatives = cfg.embedding.negatives;
    sc.epochs = cfg.embedding.epochs;
    sc.lr_start = cfg.embedding.lr_start;
    sc.lr_floor = cfg.embedding.lr_floor;
    sc.seed = cfg.training.seed;
    sc.mode = cfg.embedding.mode == "subword" ? emomix::EmbeddingMode::subword
                                              : emomix::EmbeddingMode::word;
    sc.nmin = cfg.embedding.nmin;
    sc.nmax = cfg.embedding.nmax;
    sc.num_buckets = cfg.embedding.buckets;
    return sc;
}

emomix::ModelHyper model_hyper(const emomix::PipelineConfig& cfg, emomix::Architecture arch,
                               int emb_dim) {
    emomix::ModelHyper h;
    h.arch = arch;
    h.max_len = cfg.training.max_len;
    h.emb_dim = emb_dim;
    h.lstm_units = cfg.rnn.lstm_units;
    h.num_kernels = cfg.cnn.kernels;
    h.kernel_sizes = {cfg.cnn.ks1, cfg.cnn.ks2, cfg.cnn.ks3, cfg.cnn.ks4};
    h.cnn_hidden1 = cfg.cnn.hidden1;
    h.cnn_hidden2 = cfg.cnn.hidden2;
    h.rnn_hidden = cfg.rnn.hidden;
    h.attn_dim = cfg.rnn.attn_dim;
    h.cnn_dropout = cfg.cnn.dropout;
    h.input_dropout = cfg.rnn.input_dropout;
    h.recurrent_dropout = cfg.rnn.recurrent_dropout;
    h.freeze_embedding = cfg.training.freeze_embedding;
    return h;
}

emomix::TrainConfig train_config(const emomix::PipelineConfig& cfg) {
    emomix::TrainConfig tc;
    tc.epochs = cfg.training.epochs;
    tc.batch_size = cfg.training.batch_size;
    tc.lr = cfg.training.lr;
    tc.adam_epsilon = cfg.training.adam_epsilon;
    tc.seed = cfg.training.seed;
    tc.val_fraction = cfg.training.val_fraction;
    tc.checkpoint_dir = cfg.paths.checkpoint_dir;
    return tc;
}

std::vector<emomix::TweetRecord> load_clean_corpus(const emomix::PipelineConfig& cfg) {
    auto parsed = emomix::parse_corpus_file(cfg.paths.corpus_in);
    for (const auto& d : parsed.diagnostics) {
        std::cerr << "line " << d.line_no << ": " << d.message << '\n';
    }
    return std::move(parsed.records);
}

int cmd_preprocess(const Common& common) {
    auto cfg = resolve_config(common);
    if (!file_exists(cfg.paths.corpus_in)) {
        std::cerr << "missing input corpus: " << cfg.paths.corpus_in << '\n';
        return kExitMissingInput;
    }
    emomix::HashtagMap map = cfg.paths.hashtag_map.empty()
                                 ? emomix::HashtagMap::builtin_default()
                                 : emomix::HashtagMap::load(cfg.paths.hashtag_map);
    emomix::WordSet hindi, english;
    const bool filter = !cfg.paths.hindi_lexicon.empty() && !cfg.paths.english_lexicon.empty();
    if (filter) {
        hindi = emomix::load_word_list(cfg.paths.hindi_lexicon);
        english = emomix::load_word_list(cfg.paths.english_lexicon);
    }

    auto parsed = emomix::parse_corpus_file(cfg.paths.corpus_in);
    std::ofstream diag;
    if (!cfg.paths.diagnostics_out.empty()) {
        diag.open(cfg.paths.diagnostics_out);
        if (!diag) {
            std::cerr << "cannot write diagnostics: " << cfg.paths.diagnostics_out << '\n';
            return kExitOther;
        }
    }
    auto report = [&](const std::string& id, const std::string& reason) {
        if (diag.is_open()) diag << id << '\t' << reason << '\n';
    };
    for (const auto& d : parsed.diagnostics) {
        report("line:" + std::to_string(d.line_no), d.message);
    }

    std::vector<emomix::TweetRecord> kept;
    for (auto& rec : parsed.records) {
        if (!rec.label) {
            auto labeled = emomix::label_from_hashtags(rec, map);
            if (labeled.status == emomix::LabelStatus::unlabeled) {
                report(rec.id, "unlabeled");
                continue;
            }
            if (labeled.status == emomix::LabelStatus::ambiguous) {
                report(rec.id, "ambiguous");
                continue;
            }
            rec.label = labeled.emotion;
        }
        if (filter) {
            auto verdict = emomix::filter_language(rec, hindi, english);
            if (verdict != emomix::FilterVerdict::keep) {
                const char* reason =
                    verdict == emomix::FilterVerdict::drop_devanagari    ? "devanagari"
                    : verdict == emomix::FilterVerdict::drop_pure_english ? "pure-english"
                                                                          : "pure-hindi";
                report(rec.id, reason);
                continue;
            }
        }
        rec.clean_text = emomix::clean_text(rec.raw_text, map.scrape_keywords);
        if (rec.clean_text->empty()) {
            report(rec.id, "empty-after-cleaning");
            continue;
        }
        kept.push_back(std::move(rec));
    }
    emomix::drop_rare_words(kept, cfg.training.min_count);

    std::ofstream out(cfg.paths.corpus_out);
    if (!out) {
        std::cerr << "cannot write corpus: " << cfg.paths.corpus_out << '\n';
        return kExitOther;
    }
    emomix::write_corpus_jsonl(kept, out);

    auto counts = emomix::class_counts(kept);
    std::size_t total = 0;
    std::printf("%-12s %s\n", "Emotion", "Number of instances");
    for (const auto& [emo, n] : counts) {
        std::printf("%-12s %zu\n", std::string(emomix::emotion_name(emo)).c_str(), n);
        total += n;
    }
    std::printf("%-12s %zu\n", "Total", total);
    return kExitOk;
}

int cmd_build_vocab(const Common& common) {
    auto cfg = resolve_config(common);
    if (!file_exists(cfg.paths.corpus_in)) {
        std::cerr << "missing input corpus: " << cfg.paths.corpus_in << '\n';
        return kExitMissingInput;
    }
    auto corpus = load_clean_corpus(cfg);
    auto vocab = emomix::vocab_from_corpus(corpus, cfg.training.min_count);
    if (vocab.num_real_tokens() == 0) {
        std::cerr << "corpus has no tokens above min_count\n";
        return kExitEmptyCorpus;
    }
    vocab.save(cfg.paths.vocab_out);
    std::printf("vocab size %zu written to %s\n", vocab.size(), cfg.paths.vocab_out.c_str());
    return kExitOk;
}

int cmd_train_embeddings(const Common& common) {
    auto cfg = resolve_config(common);
    if (!file_exists(cfg.paths.corpus_in)) {
        std::cerr << "missing input corpus: " << cfg.paths.corpus_in << '\n';
        return kExitMissingInput;
    }
    auto corpus = load_clean_corpus(cfg);
    auto vocab = emomix::vocab_from_corpus(corpus, cfg.training.min_count);
    if (vocab.num_real_tokens() == 0) {
        std::cerr << "empty corpus\n";
        return kExitEmptyCorpus;
    }
    std::vector<std::vector<std::int32_t>> sentences;
    for (const auto& rec : corpus) {
        if (!rec.clean_text || rec.clean_text->empty()) continue;
        std::vector<std::int32_t> ids;
        for (const auto& tok : emomix::tokenize(*rec.clean_text)) {
            ids.push_back(vocab.id_of(tok));
        }
        sentences.push_back(std::move(ids));
    }
    if (sentences.empty()) {
        std::cerr << "empty corpus\n";
        return kExitEmptyCorpus;
    }
    emomix::NegativeTable table(vocab, cfg.embedding.alpha);
    auto emb = emomix::train_sgns(sentences, vocab, table, sgns_config(cfg));
    emomix::save_vec(emb, cfg.paths.vec_out);
    std::printf("vocab %zu dim %d mode %s -> %s\n", emb.tokens.size(), emb.dim,
                cfg.embedding.mode.c_str(), cfg.paths.vec_out.c_str());
    return kExitOk;
}

int cmd_train(const Common& common) {
    auto cfg = resolve_config(common);
    auto arch = emomix::arch_from_name(cfg.training.architecture);
    if (!arch) {
        std::cerr << "unknown architecture: " << cfg.training.architecture << '\n';
        return kExitBadArchitecture;
    }
    if (!file_exists(cfg.paths.corpus_in) || !file_exists(cfg.paths.vec_out)) {
        std::cerr << "missing corpus or embedding artifact\n";
        return kExitMissingInput;
    }
    auto corpus = load_clean_corpus(cfg);
    auto vocab = emomix::vocab_from_corpus(corpus, cfg.training.min_count);
    auto emb = emomix::load_vec(cfg.paths.vec_out);
    auto hyper = model_hyper(cfg, *arch, emb.dim);
    auto data = emomix::encode_dataset(corpus, vocab, static_cast<std::size_t>(hyper.max_len));
    if (data.empty()) {
        std::cerr << "no labeled examples\n";
        return kExitEmptyCorpus;
    }
    auto [train_set, val_set] =
        emomix::split_train_val(data, cfg.training.val_fraction, cfg.training.seed);
    auto model = emomix::ModelParams::init(hyper, vocab, emb, cfg.training.seed);
    auto tc = train_config(cfg);
    tc.verbose = true;
    auto history = emomix::train(model, train_set, val_set, tc);
    const int best = emomix::select_checkpoint(history);
    if (!cfg.paths.history_out.empty()) {
        std::ofstream h(cfg.paths.history_out);
        emomix::write_history_jsonl(history, h);
    }
    if (!tc.checkpoint_dir.empty()) {
        std::ofstream marker(tc.checkpoint_dir + "/best_epoch.txt");
        marker << best << '\n';
    }
    if (!cfg.paths.vocab_out.empty()) vocab.save(cfg.paths.vocab_out);
    std::printf("best epoch %d (val accuracy %.4f)\n", best,
                history.epochs[static_cast<std::size_t>(best - 1)].val_accuracy);
    return kExitOk;
}

emomix::Dataset dataset_for_model(const emomix::PipelineConfig& cfg,
                                  const emomix::ModelParams& model, emomix::Vocab& vocab) {
    auto corpus = emomix::parse_corpus_file(cfg.paths.corpus_in).records;
    if (!cfg.paths.vocab_out.empty() && std::filesystem::exists(cfg.paths.vocab_out)) {
        vocab = emomix::Vocab::load(cfg.paths.vocab_out);
    } else {
        vocab = emomix::vocab_from_corpus(corpus, cfg.training.min_count);
    }
    return emomix::encode_dataset(corpus, vocab,
                                  static_cast<std::size_t>(model.hyper.max_len));
}

int cmd_evaluate(const Common& common) {
    auto cfg = resolve_config(common);
    if (!file_exists(cfg.paths.model_in) || !file_exists(cfg.paths.corpus_in)) {
        std::cerr << "missing model checkpoint or corpus\n";
        return kExitMissingInput;
    }
    auto model = emomix::load_model(cfg.paths.model_in);
    emomix::Vocab vocab;
    auto data = dataset_for_model(cfg, model, vocab);
    if (data.empty()) {
        std::cerr << "no labeled examples\n";
        return kExitEmptyCorpus;
    }
    auto report = emomix::evaluate(model, data);
    std::string text = emomix::format_eval_report(report);
    std::fputs(text.c_str(), stdout);
    if (!cfg.paths.report_out.empty()) {
        std::ofstream out(cfg.paths.report_out);
        out << text;
    }
    return kExitOk;
}

int cmd_predict(const Common& common, const std::string& text) {
    auto cfg = resolve_config(common);
    if (!file_exists(cfg.paths.model_in)) {
        std::cerr << "missing model checkpoint: " << cfg.paths.model_in << '\n';
        return kExitMissingInput;
    }
    auto model = emomix::load_model(cfg.paths.model_in);
    emomix::Vocab vocab;
    if (!cfg.paths.vocab_out.empty() && std::filesystem::exists(cfg.paths.vocab_out)) {
        vocab = emomix::Vocab::load(cfg.paths.vocab_out);
    } else {
        std::cerr << "missing vocab file: " << cfg.paths.vocab_out << '\n';
        return kExitMissingInput;
    }
    emomix::HashtagMap map = cfg.paths.hashtag_map.empty()
                                 ? emomix::HashtagMap::builtin_default()
                                 : emomix::HashtagMap::load(cfg.paths.hashtag_map);
    try {
        auto pred = emomix::predict(text, model, vocab, map.scrape_keywords);
        std::printf("%s", std::string(emomix::emotion_name(pred.emotion)).c_str());
        for (std::size_t i = 0; i < pred.scores.size(); ++i) {
            std::printf(" %.6f", pred.scores.at(i));
        }
        std::printf("\n");
    } catch (const emomix::EmptyInputError&) {
        std::cerr << "input is empty after cleaning\n";
        return kExitEmptyPredictionInput;
    }
    return kExitOk;
}

int cmd_grid(const Common& common, const std::vector<std::string>& vec_specs) {
    auto cfg = resolve_config(common);
    if (!file_exists(cfg.paths.corpus_in)) {
        std::cerr << "missing input corpus: " << cfg.paths.corpus_in << '\n';
        return kExitMissingInput;
    }
    // vec specs: embedding:corpus=path, e.g. word2vec:hinglish=emb.vec
    std::map<std::pair<std::string, std::string>, std::string> vec_paths;
    for (const auto& spec : vec_specs) {
        auto colon = spec.find(':');
        auto eq = spec.find('=', colon == std::string::npos ? 0 : colon);
        if (colon == std::string::npos || eq == std::string::npos) {
            std::cerr << "--vec expects embedding:corpus=path, got: " << spec << '\n';
            return kExitOther;
        }
        vec_paths[{spec.substr(0, colon), spec.substr(colon + 1, eq - colon - 1)}] =
            spec.substr(eq + 1);
    }
    const std::vector<std::string> embeddings = {"word2vec", "fasttext"};
    const std::vector<std::string> corpora = {"hinglish", "hinglish_english"};
    std::vector<emomix::GridCellInput> cells;
    for (auto arch : {emomix::Architecture::cnn, emomix::Architecture::lstm,
                      emomix::Architecture::bilstm, emomix::Architecture::attn_bilstm}) {
        for (const auto& embedding : embeddings) {
            for (const auto& corpus_name : corpora) {
                emomix::GridCellInput cell;
                cell.arch = arch;
                cell.embedding_name = embedding;
                cell.corpus_name = corpus_name;
                auto it = vec_paths.find({embedding, corpus_name});
                if (it != vec_paths.end()) cell.vec_path = it->second;
                cells.push_back(cell);
            }
        }
    }
    auto corpus = load_clean_corpus(cfg);
    auto base_hyper = model_hyper(cfg, emomix::Architecture::cnn, cfg.embedding.size);
    auto results = emomix::run_experiment_grid(cells, corpus, base_hyper, train_config(cfg),
                                               cfg.training.min_count);
    std::fputs(emomix::format_grid_table(results).c_str(), stdout);
    if (!cfg.paths.grid_out.empty()) {
        std::ofstream out(cfg.paths.grid_out);
        emomix::write_grid_tsv(results, out);
    }
    return kExitOk;
}

int cmd_neighbors(const Common& common, const std::string& query, std::size_t k) {
    auto cfg = resolve_config(common);
    if (!file_exists(cfg.paths.vec_out)) {
        std::cerr << "missing embedding artifact: " << cfg.paths.vec_out << '\n';
        return kExitMissingInput;
    }
    auto emb = emomix::load_vec(cfg.paths.vec_out);
    for (const auto& n : emomix::nearest_neighbors(query, emb, k)) {
        std::printf("%s %.4f\n", n.token.c_str(), n.cosine);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Emotion classification pipeline for Hindi-English code-mixed text"};
    app.require_subcommand(1);

    Common common;
    std::string predict_text;
    std::vector<std::string> vec_specs;
    std::string query;
    std::size_t k = 10;

    auto* preprocess = app.add_subcommand(
        "preprocess", "Label, filter and clean a raw tweet corpus");
    add_common(preprocess, common);
    auto* build_vocab = app.add_subcommand("build-vocab", "Build the token vocabulary");
    add_common(build_vocab, common);
    auto* train_embeddings = app.add_subcommand(
        "train-embeddings", "Train skip-gram negative-sampling embeddings");
    add_common(train_embeddings, common);
    auto* train = app.add_subcommand("train", "Train a classifier with checkpoints");
    add_common(train, common);
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a trained checkpoint");
    add_common(evaluate, common);
    auto* predict = app.add_subcommand("predict", "Predict the emotion of one text");
    add_common(predict, common);
    predict->add_option("--text", predict_text, "Raw input text")->required();
    auto* grid = app.add_subcommand("grid", "Run the architecture x embedding x corpus grid");
    add_common(grid, common);
    grid->add_option("--vec", vec_specs, "Embedding artifact, embedding:corpus=path");
    auto* neighbors = app.add_subcommand("neighbors", "Nearest neighbors of a word");
    add_common(neighbors, common);
    neighbors->add_option("--query", query, "Query word")->required();
    neighbors->add_option("-k", k, "Number of neighbors");

    CLI11_PARSE(app, argc, argv);

    try {
        if (preprocess->parsed()) return cmd_preprocess(common);
        if (build_vocab->parsed()) return cmd_build_vocab(common);
        if (train_embeddings->parsed()) return cmd_train_embeddings(common);
        if (train->parsed()) return cmd_train(common);
        if (evaluate->parsed()) return cmd_evaluate(common);
        if (predict->parsed()) return cmd_predict(common, predict_text);
        if (grid->parsed()) return cmd_grid(common, vec_specs);
        if (neighbors->parsed()) return cmd_neighbors(common, query, k);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitOther;
    }
    return kExitOther;
}
