#include "emomix/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <variant>
#include <vector>

namespace emomix {

namespace {

using Field = std::variant<std::string*, int*, double*, std::uint64_t*, bool*>;

struct Entry {
    std::string section;
    std::string key;
    Field field;
};

std::vector<Entry> registry(PipelineConfig& c) {
    std::vector<Entry> r;
    auto add = [&](const char* s, const char* k, Field f) { r.push_back({s, k, f}); };
    add("paths", "corpus_in", &c.paths.corpus_in);
    add("paths", "corpus_out", &c.paths.corpus_out);
    add("paths", "diagnostics_out", &c.paths.diagnostics_out);
    add("paths", "hindi_lexicon", &c.paths.hindi_lexicon);
    add("paths", "english_lexicon", &c.paths.english_lexicon);
    add("paths", "hashtag_map", &c.paths.hashtag_map);
    add("paths", "vocab_out", &c.paths.vocab_out);
    add("paths", "vec_out", &c.paths.vec_out);
    add("paths", "checkpoint_dir", &c.paths.checkpoint_dir);
    add("paths", "history_out", &c.paths.history_out);
    add("paths", "report_out", &c.paths.report_out);
    add("paths", "grid_out", &c.paths.grid_out);
    add("paths", "model_in", &c.paths.model_in);
    add("embedding", "size", &c.embedding.size);
    add("embedding", "window", &c.embedding.window);
    add("embedding", "negatives", &c.embedding.negatives);
    add("embedding", "epochs", &c.embedding.epochs);
    add("embedding", "lr_start", &c.embedding.lr_start);
    add("embedding", "lr_floor", &c.embedding.lr_floor);
    add("embedding", "mode", &c.embedding.mode);
    add("embedding", "nmin", &c.embedding.nmin);
    add("embedding", "nmax", &c.embedding.nmax);
    add("embedding", "buckets", &c.embedding.buckets);
    add("embedding", "alpha", &c.embedding.alpha);
    add("cnn", "dropout", &c.cnn.dropout);
    add("cnn", "stride", &c.cnn.stride);
    add("cnn", "kernels", &c.cnn.kernels);
    add("cnn", "ks1", &c.cnn.ks1);
    add("cnn", "ks2", &c.cnn.ks2);
    add("cnn", "ks3", &c.cnn.ks3);
    add("cnn", "ks4", &c.cnn.ks4);
    add("cnn", "hidden1", &c.cnn.hidden1);
    add("cnn", "hidden2", &c.cnn.hidden2);
    add("rnn", "lstm_units", &c.rnn.lstm_units);
    add("rnn", "input_dropout", &c.rnn.input_dropout);
    add("rnn", "recurrent_dropout", &c.rnn.recurrent_dropout);
    add("rnn", "hidden", &c.rnn.hidden);
    add("rnn", "attn_dim", &c.rnn.attn_dim);
    add("training", "epochs", &c.training.epochs);
    add("training", "batch_size", &c.training.batch_size);
    add("training", "lr", &c.training.lr);
    add("training", "adam_epsilon", &c.training.adam_epsilon);
    add("training", "val_fraction", &c.training.val_fraction);
    add("training", "seed", &c.training.seed);
    add("training", "max_len", &c.training.max_len);
    add("training", "min_count", &c.training.min_count);
    add("training", "architecture", &c.training.architecture);
    add("training", "freeze_embedding", &c.training.freeze_embedding);
    return r;
}

void set_field(const Entry& e, const std::string& value) {
    try {
        std::visit(
            [&](auto* p) {
                using T = std::remove_pointer_t<decltype(p)>;
                if constexpr (std::is_same_v<T, std::string>) {
                    *p = value;
                } else if constexpr (std::is_same_v<T, int>) {
                    *p = std::stoi(value);
                } else if constexpr (std::is_same_v<T, double>) {
                    *p = std::stod(value);
                } else if constexpr (std::is_same_v<T, std::uint64_t>) {
                    *p = std::stoull(value);
                } else {
                    *p = (value == "1" || value == "true" || value == "yes");
                }
            },
            e.field);
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad value for " + e.section + "." + e.key + ": " +
                                 value);
    }
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string get_field(const Entry& e) {
    return std::visit(
        [](auto* p) -> std::string {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, std::string>) {
                return *p;
            } else if constexpr (std::is_same_v<T, double>) {
                return format_double(*p);
            } else if constexpr (std::is_same_v<T, bool>) {
                return *p ? "1" : "0";
            } else {
                return std::to_string(*p);
            }
        },
        e.field);
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    PipelineConfig cfg;
    auto entries = registry(cfg);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = t.substr(1, t.size() - 2);
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config: expected key = value at line " +
                                     std::to_string(line_no));
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        bool found = false;
        for (const auto& e : entries) {
            if (e.section == section && e.key == key) {
                set_field(e, value);
                found = true;
                break;
            }
        }
        if (!found) {
            throw std::runtime_error("config: unknown key " + section + "." + key + " at line " +
                                     std::to_string(line_no));
        }
    }
    cfg.validate();
    return cfg;
}

void PipelineConfig::apply(const std::string& dotted_key, const std::string& value) {
    auto dot = dotted_key.find('.');
    if (dot == std::string::npos) {
        throw std::runtime_error("config: override key must be section.key: " + dotted_key);
    }
    const std::string section = dotted_key.substr(0, dot);
    const std::string key = dotted_key.substr(dot + 1);
    auto entries = registry(*this);
    for (const auto& e : entries) {
        if (e.section == section && e.key == key) {
            set_field(e, value);
            return;
        }
    }
    throw std::runtime_error("config: unknown key " + dotted_key);
}

void PipelineConfig::dump(std::ostream& out) const {
    auto entries = registry(const_cast<PipelineConfig&>(*this));
    std::string section;
    for (const auto& e : entries) {
        if (e.section != section) {
            if (!section.empty()) out << '\n';
            section = e.section;
            out << '[' << section << "]\n";
        }
        out << e.key << " = " << get_field(e) << '\n';
    }
}

std::string PipelineConfig::dump_string() const {
    std::ostringstream out;
    dump(out);
    return out.str();
}

void PipelineConfig::validate() const {
    if (cnn.stride != 1) throw std::runtime_error("config: only stride 1 is supported");
    if (embedding.mode != "word" && embedding.mode != "subword") {
        throw std::runtime_error("config: embedding mode must be word or subword");
    }
    if (training.val_fraction <= 0.0 || training.val_fraction >= 1.0) {
        throw std::runtime_error("config: val_fraction must be in (0, 1)");
    }
    if (training.epochs < 1) throw std::runtime_error("config: epochs must be >= 1");
    if (training.min_count < 1) throw std::runtime_error("config: min_count must be >= 1");
    if (embedding.nmin < 1 || embedding.nmin > embedding.nmax) {
        throw std::runtime_error("config: bad n-gram bounds");
    }
}

}  // namespace emomix
