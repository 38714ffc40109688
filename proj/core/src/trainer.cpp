#include "emomix/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "emomix/activations.hpp"
#include "emomix/adam.hpp"
#include "emomix/text.hpp"
#include "json.hpp"

namespace emomix {

void write_history_jsonl(const RunHistory& history, std::ostream& out) {
    for (const auto& r : history.epochs) {
        nlohmann::json j;
        j["epoch"] = r.epoch;
        j["train_loss"] = r.train_loss;
        j["train_accuracy"] = r.train_accuracy;
        j["val_loss"] = r.val_loss;
        j["val_accuracy"] = r.val_accuracy;
        j["checkpoint"] = r.checkpoint_path;
        out << j.dump() << '\n';
    }
}

std::pair<Dataset, Dataset> split_train_val(const Dataset& dataset, double fraction,
                                            std::uint64_t seed) {
    if (dataset.size() < 10) throw std::invalid_argument("split: dataset too small");
    if (fraction <= 0.0 || fraction >= 1.0) {
        throw std::invalid_argument("split: fraction must be in (0, 1)");
    }
    std::array<std::vector<std::size_t>, kNumEmotions> by_class;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        by_class.at(static_cast<std::size_t>(dataset[i].label)).push_back(i);
    }
    std::mt19937_64 rng(seed);
    Dataset train, val;
    for (auto& idx : by_class) {
        if (idx.empty()) continue;
        if (idx.size() < 2) throw std::invalid_argument("split: class with fewer than 2 examples");
        std::shuffle(idx.begin(), idx.end(), rng);
        auto want = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(idx.size())));
        want = std::clamp<std::size_t>(want, 1, idx.size() - 1);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            (i < want ? val : train).push_back(dataset[idx[i]]);
        }
    }
    return {std::move(train), std::move(val)};
}

namespace {

struct EvalNumbers {
    double loss = 0.0;
    double accuracy = 0.0;
};

EvalNumbers eval_loss_acc(const ModelParams& model, const Dataset& data) {
    EvalNumbers out;
    if (data.empty()) return out;
    std::size_t correct = 0;
    for (const auto& ex : data) {
        Tensor scores = forward_scores(model, ex.ids);
        out.loss += act::categorical_cross_entropy(scores, ex.label);
        if (argmax_class(scores) == ex.label) ++correct;
    }
    out.loss /= static_cast<double>(data.size());
    out.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    return out;
}

}  // namespace

RunHistory train(ModelParams& model, const Dataset& train_set, const Dataset& val_set,
                 const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (train_set.empty()) throw std::invalid_argument("train: empty training set");

    std::vector<AdamState> opt;
    opt.reserve(model.tensors.size());
    for (const auto& [name, t] : model.tensors) {
        opt.emplace_back(t.shape, cfg.lr, 0.9, 0.999, cfg.adam_epsilon);
    }

    if (!cfg.checkpoint_dir.empty()) {
        std::filesystem::create_directories(cfg.checkpoint_dir);
    }

    RunHistory history;
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(epoch) * 0x9E3779B9ULL);
        std::shuffle(order.begin(), order.end(), rng);

        double epoch_loss = 0.0;
        std::size_t correct = 0;
        const std::size_t n = order.size();
        const auto bs = static_cast<std::size_t>(cfg.batch_size);
        for (std::size_t start = 0; start < n; start += bs) {
            const std::size_t end = std::min(start + bs, n);
            Tape tape;
            auto ctx = make_context(tape, model);
            std::vector<Tape::VarId> losses;
            for (std::size_t i = start; i < end; ++i) {
                const Example& ex = train_set[order[i]];
                auto scores = model_forward(ctx, model, ex.ids, true, rng);
                losses.push_back(tape.cross_entropy(scores, ex.label));
                epoch_loss += tape.value(losses.back()).at(0);
                if (argmax_class(tape.value(scores)) == ex.label) ++correct;
            }
            auto batch_loss =
                tape.scale(tape.add_scalars(losses), 1.0 / static_cast<double>(end - start));
            if (!std::isfinite(tape.value(batch_loss).at(0))) {
                throw std::runtime_error("train: non-finite loss");
            }
            tape.backward(batch_loss);
            for (std::size_t p = 0; p < model.tensors.size(); ++p) {
                const auto& name = model.tensors[p].first;
                if (model.hyper.freeze_embedding && name == "embedding") continue;
                adam_update(model.tensors[p].second, tape.grad(ctx.leaves[p].second), opt[p]);
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = epoch_loss / static_cast<double>(n);
        rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
        EvalNumbers v = eval_loss_acc(model, val_set);
        rec.val_loss = v.loss;
        rec.val_accuracy = v.accuracy;
        if (!cfg.checkpoint_dir.empty()) {
            rec.checkpoint_path =
                cfg.checkpoint_dir + "/epoch_" + std::to_string(epoch) + ".ckpt";
            save_model(model, rec.checkpoint_path);
        }
        history.epochs.push_back(rec);
        if (cfg.verbose) {
            std::ostringstream line;
            line << "epoch " << epoch << " train_loss " << rec.train_loss << " train_acc "
                 << rec.train_accuracy << " val_loss " << rec.val_loss << " val_acc "
                 << rec.val_accuracy;
            std::fprintf(stdout, "%s\n", line.str().c_str());
            std::fflush(stdout);
        }
    }
    return history;
}

int select_checkpoint(const RunHistory& history) {
    if (history.epochs.empty()) throw std::invalid_argument("select_checkpoint: empty history");
    std::size_t best = 0;
    for (std::size_t i = 1; i < history.epochs.size(); ++i) {
        if (history.epochs[i].val_accuracy > history.epochs[best].val_accuracy) best = i;
    }
    return history.epochs[best].epoch;
}

EvalReport evaluate(const ModelParams& model, const Dataset& dataset) {
    if (dataset.empty()) throw std::invalid_argument("evaluate: empty dataset");
    EvalReport report;
    report.total = dataset.size();
    std::size_t correct = 0;
    for (const auto& ex : dataset) {
        const int pred = argmax_class(forward_scores(model, ex.ids));
        report.confusion[static_cast<std::size_t>(ex.label)][static_cast<std::size_t>(pred)]++;
        if (pred == ex.label) ++correct;
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(report.total);
    for (int c = 0; c < kNumEmotions; ++c) {
        std::size_t tp = report.confusion[c][c];
        std::size_t support = 0, predicted = 0;
        for (int j = 0; j < kNumEmotions; ++j) {
            support += report.confusion[c][j];
            predicted += report.confusion[j][c];
        }
        report.precision[c] = predicted ? static_cast<double>(tp) / predicted : 0.0;
        report.recall[c] = support ? static_cast<double>(tp) / support : 0.0;
        const double pr = report.precision[c] + report.recall[c];
        report.f1[c] = pr > 0.0 ? 2.0 * report.precision[c] * report.recall[c] / pr : 0.0;
    }
    return report;
}

std::string format_eval_report(const EvalReport& r) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "accuracy " << r.accuracy << " (" << r.total << " examples)\n";
    out << std::left << std::setw(12) << "class" << std::right << std::setw(10) << "precision"
        << std::setw(10) << "recall" << std::setw(10) << "f1" << '\n';
    for (int c = 0; c < kNumEmotions; ++c) {
        out << std::left << std::setw(12) << kEmotionNames[c] << std::right << std::setw(10)
            << r.precision[c] << std::setw(10) << r.recall[c] << std::setw(10) << r.f1[c]
            << '\n';
    }
    out << "confusion matrix (rows: true, cols: predicted)\n";
    for (int i = 0; i < kNumEmotions; ++i) {
        for (int j = 0; j < kNumEmotions; ++j) out << std::setw(8) << r.confusion[i][j];
        out << '\n';
    }
    return out.str();
}

Vocab vocab_from_corpus(const std::vector<TweetRecord>& corpus, int min_count) {
    std::vector<std::string> tokens;
    for (const auto& rec : corpus) {
        if (!rec.clean_text) continue;
        for (auto& tok : tokenize(*rec.clean_text)) tokens.push_back(std::move(tok));
    }
    return Vocab::build(tokens, min_count);
}

Dataset encode_dataset(const std::vector<TweetRecord>& corpus, const Vocab& vocab,
                       std::size_t max_len) {
    Dataset data;
    for (const auto& rec : corpus) {
        if (!rec.label || !rec.clean_text || rec.clean_text->empty()) continue;
        data.push_back({vocab.encode(*rec.clean_text, max_len), static_cast<int>(*rec.label)});
    }
    return data;
}

std::vector<GridCellResult> run_experiment_grid(const std::vector<GridCellInput>& cells,
                                                const std::vector<TweetRecord>& corpus,
                                                const ModelHyper& base_hyper,
                                                const TrainConfig& cfg, int min_count) {
    std::vector<GridCellResult> results;
    Vocab vocab = vocab_from_corpus(corpus, min_count);
    for (const auto& cell : cells) {
        GridCellResult res;
        res.cell = cell;
        try {
            EmbeddingSet emb = load_vec(cell.vec_path);
            ModelHyper hyper = base_hyper;
            hyper.arch = cell.arch;
            hyper.emb_dim = emb.dim;
            Dataset data = encode_dataset(corpus, vocab, static_cast<std::size_t>(hyper.max_len));
            auto [train_set, val_set] = split_train_val(data, cfg.val_fraction, cfg.seed);
            ModelParams model = ModelParams::init(hyper, vocab, emb, cfg.seed);
            TrainConfig cell_cfg = cfg;
            if (!cfg.checkpoint_dir.empty()) {
                cell_cfg.checkpoint_dir = cfg.checkpoint_dir + "/" +
                                          std::string(arch_name(cell.arch)) + "_" +
                                          cell.embedding_name + "_" + cell.corpus_name;
            }
            RunHistory history = train(model, train_set, val_set, cell_cfg);
            res.best_epoch = select_checkpoint(history);
            res.accuracy =
                history.epochs[static_cast<std::size_t>(res.best_epoch - 1)].val_accuracy;
            res.ok = true;
        } catch (const std::exception& e) {
            res.error = e.what();
        }
        results.push_back(std::move(res));
    }
    return results;
}

void write_grid_tsv(const std::vector<GridCellResult>& results, std::ostream& out) {
    out << "architecture\tembedding\tcorpus\taccuracy\tbest_epoch\n";
    for (const auto& r : results) {
        out << arch_name(r.cell.arch) << '\t' << r.cell.embedding_name << '\t'
            << r.cell.corpus_name << '\t';
        if (r.ok) {
            out << std::fixed << std::setprecision(4) << r.accuracy << '\t' << r.best_epoch;
        } else {
            out << "error\t-";
        }
        out << '\n';
    }
}

std::string format_grid_table(const std::vector<GridCellResult>& results) {
    std::ostringstream out;
    out << std::left << std::setw(14) << "architecture" << std::setw(12) << "embedding"
        << std::setw(20) << "corpus" << std::right << std::setw(10) << "accuracy"
        << std::setw(12) << "best_epoch" << '\n';
    for (const auto& r : results) {
        out << std::left << std::setw(14) << arch_name(r.cell.arch) << std::setw(12)
            << r.cell.embedding_name << std::setw(20) << r.cell.corpus_name << std::right;
        if (r.ok) {
            out << std::setw(10) << std::fixed << std::setprecision(4) << r.accuracy
                << std::setw(12) << r.best_epoch;
        } else {
            out << std::setw(10) << "error" << std::setw(12) << "-";
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace emomix
