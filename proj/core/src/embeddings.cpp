#include "emomix/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace emomix {

namespace {

// softplus(x) = ln(1 + e^x), stable for large |x|
double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::vector<std::string> ngrams(const std::string& word, int nmin, int nmax) {
    if (word.empty()) throw std::invalid_argument("ngrams: empty word");
    if (nmin < 1 || nmin > nmax) throw std::invalid_argument("ngrams: bad n-gram bounds");
    const std::string bracketed = "<" + word + ">";
    const int len = static_cast<int>(bracketed.size());
    std::vector<std::string> out;
    for (int start = 0; start < len; ++start) {
        for (int n = nmin; n <= nmax && start + n <= len; ++n) {
            if (n == len) continue;  // whole word is appended separately
            out.push_back(bracketed.substr(static_cast<std::size_t>(start),
                                           static_cast<std::size_t>(n)));
        }
    }
    out.push_back(bracketed);
    return out;
}

std::uint32_t fnv1a_hash(const std::string& s) {
    std::uint32_t h = 2166136261u;
    for (unsigned char c : s) {
        h ^= c;
        h *= 16777619u;
    }
    return h;
}

std::int32_t EmbeddingSet::id_of(const std::string& token) const {
    auto it = index.find(token);
    return it == index.end() ? -1 : it->second;
}

std::vector<double> EmbeddingSet::input_row(std::int32_t id) const {
    std::vector<double> row(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) row[static_cast<std::size_t>(j)] = input.at(static_cast<std::size_t>(id), static_cast<std::size_t>(j));
    return row;
}

std::vector<double> EmbeddingSet::vector_for(const std::string& token) const {
    if (mode == EmbeddingMode::subword) return fasttext_vector(token, *this);
    std::int32_t id = id_of(token);
    if (id < 0) return std::vector<double>(static_cast<std::size_t>(dim), 0.0);
    return input_row(id);
}

EmbeddingSet init_embeddings(const Vocab& vocab, const SgnsConfig& cfg) {
    EmbeddingSet e;
    e.mode = cfg.mode;
    e.dim = cfg.dim;
    e.nmin = cfg.nmin;
    e.nmax = cfg.nmax;
    const std::size_t v = vocab.size();
    const auto d = static_cast<std::size_t>(cfg.dim);
    for (std::size_t id = 0; id < v; ++id) {
        e.tokens.push_back(vocab.token_of(static_cast<std::int32_t>(id)));
        if (id >= 2) e.index[e.tokens.back()] = static_cast<std::int32_t>(id);
    }
    std::mt19937_64 rng(cfg.seed);
    const double half = 0.5 / cfg.dim;
    e.input = Tensor::uniform({v, d}, -half, half, rng);
    e.output = Tensor({v, d});
    if (cfg.mode == EmbeddingMode::subword) {
        e.buckets = Tensor::uniform({cfg.num_buckets, d}, -half, half, rng);
        e.word_buckets.resize(v);
        for (std::size_t id = 2; id < v; ++id) {
            for (const auto& g : ngrams(e.tokens[id], cfg.nmin, cfg.nmax)) {
                e.word_buckets[id].push_back(fnv1a_hash(g) % cfg.num_buckets);
            }
        }
    }
    return e;
}

double sgns_step(std::int32_t center, std::int32_t context,
                 const std::vector<std::int32_t>& negatives, EmbeddingSet& emb, double lr) {
    const auto d = static_cast<std::size_t>(emb.dim);
    const auto c = static_cast<std::size_t>(center);

    // constituents of the center representation
    std::vector<double*> parts;
    parts.push_back(&emb.input.data[c * d]);
    if (emb.mode == EmbeddingMode::subword) {
        for (std::uint32_t b : emb.word_buckets.at(c)) {
            parts.push_back(&emb.buckets.data[static_cast<std::size_t>(b) * d]);
        }
    }
    std::vector<double> vw(d, 0.0);
    for (double* p : parts) {
        for (std::size_t j = 0; j < d; ++j) vw[j] += p[j];
    }
    const double inv_n = 1.0 / static_cast<double>(parts.size());
    for (std::size_t j = 0; j < d; ++j) vw[j] *= inv_n;

    double loss = 0.0;
    std::vector<double> dv(d, 0.0);
    auto pair_update = [&](std::int32_t word, double label) {
        double* u = &emb.output.data[static_cast<std::size_t>(word) * d];
        double dot = 0.0;
        for (std::size_t j = 0; j < d; ++j) dot += u[j] * vw[j];
        loss += label > 0.5 ? softplus(-dot) : softplus(dot);
        const double g = sigmoid(dot) - label;
        for (std::size_t j = 0; j < d; ++j) {
            dv[j] += g * u[j];
            u[j] -= lr * g * vw[j];
        }
    };
    pair_update(context, 1.0);
    for (std::int32_t n : negatives) pair_update(n, 0.0);

    if (!std::isfinite(loss)) throw std::runtime_error("sgns_step: non-finite loss");

    for (double* p : parts) {
        for (std::size_t j = 0; j < d; ++j) p[j] -= lr * dv[j] * inv_n;
    }
    return loss;
}

EmbeddingSet train_sgns(const std::vector<std::vector<std::int32_t>>& sentences,
                        const Vocab& vocab, const NegativeTable& table,
                        const SgnsConfig& cfg) {
    std::size_t total_positions = 0;
    for (const auto& s : sentences) total_positions += s.size();
    if (total_positions == 0) throw std::invalid_argument("train_sgns: empty corpus");

    EmbeddingSet emb = init_embeddings(vocab, cfg);
    std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL);
    std::uniform_int_distribution<int> window_dist(1, cfg.window);

    const double total = static_cast<double>(total_positions) *
                         static_cast<double>(std::max(cfg.epochs, 1));
    std::size_t done = 0;
    std::vector<std::int32_t> negatives;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (const auto& sent : sentences) {
            const int len = static_cast<int>(sent.size());
            for (int pos = 0; pos < len; ++pos) {
                ++done;
                const std::int32_t center = sent[static_cast<std::size_t>(pos)];
                if (center < 2) continue;
                const double lr = std::max(
                    cfg.lr_floor, cfg.lr_start * (1.0 - static_cast<double>(done) / total));
                const int b = window_dist(rng);
                for (int off = -b; off <= b; ++off) {
                    if (off == 0) continue;
                    const int cpos = pos + off;
                    if (cpos < 0 || cpos >= len) continue;
                    const std::int32_t context = sent[static_cast<std::size_t>(cpos)];
                    if (context < 2) continue;
                    negatives.clear();
                    for (int k = 0; k < cfg.negatives; ++k) {
                        for (int attempt = 0; attempt < 30; ++attempt) {
                            std::int32_t n = table.sample(rng);
                            if (n != center && n != context) {
                                negatives.push_back(n);
                                break;
                            }
                        }
                    }
                    sgns_step(center, context, negatives, emb, lr);
                }
            }
        }
    }
    return emb;
}

std::vector<double> fasttext_vector(const std::string& word, const EmbeddingSet& emb) {
    if (emb.mode != EmbeddingMode::subword) {
        throw std::invalid_argument("fasttext_vector: subword mode required");
    }
    if (word.empty()) throw std::invalid_argument("fasttext_vector: empty word");
    const auto d = static_cast<std::size_t>(emb.dim);
    std::vector<double> acc(d, 0.0);
    std::size_t n = 0;
    const std::int32_t id = emb.id_of(word);
    if (id >= 0) {
        for (std::size_t j = 0; j < d; ++j) acc[j] += emb.input.at(static_cast<std::size_t>(id), j);
        ++n;
    }
    const std::size_t num_buckets = emb.buckets.rows();
    for (const auto& g : ngrams(word, emb.nmin, emb.nmax)) {
        const std::size_t b = fnv1a_hash(g) % num_buckets;
        for (std::size_t j = 0; j < d; ++j) acc[j] += emb.buckets.at(b, j);
        ++n;
    }
    for (double& x : acc) x /= static_cast<double>(n);
    return acc;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<Neighbor> nearest_neighbors(const std::string& query, const EmbeddingSet& emb,
                                        std::size_t k) {
    if (k < 1) throw std::invalid_argument("nearest_neighbors: k must be >= 1");
    const std::int32_t qid = emb.id_of(query);
    std::vector<double> qv;
    if (emb.mode == EmbeddingMode::word) {
        if (qid < 0) throw std::invalid_argument("nearest_neighbors: query not in vocab");
        qv = emb.input_row(qid);
    } else {
        qv = fasttext_vector(query, emb);
    }
    struct Scored {
        std::int32_t id;
        double cos;
    };
    std::vector<Scored> scored;
    for (std::size_t id = 2; id < emb.tokens.size(); ++id) {
        if (static_cast<std::int32_t>(id) == qid) continue;
        scored.push_back({static_cast<std::int32_t>(id),
                          cosine(qv, emb.input_row(static_cast<std::int32_t>(id)))});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.cos != b.cos) return a.cos > b.cos;
        return a.id < b.id;
    });
    if (scored.size() > k) scored.resize(k);
    std::vector<Neighbor> out;
    for (const auto& s : scored) out.push_back({emb.tokens[static_cast<std::size_t>(s.id)], s.cos});
    return out;
}

namespace {

constexpr char kSubMagic[8] = {'E', 'M', 'X', 'S', 'U', 'B', 'W', '\0'};
constexpr std::uint32_t kSubVersion = 1;

template <typename T>
void write_pod(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("subword sidecar: truncated file");
    return v;
}

}  // namespace

void save_vec(const EmbeddingSet& emb, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write vectors: " + path);
    out << emb.tokens.size() << ' ' << emb.dim << '\n';
    char buf[64];
    for (std::size_t id = 0; id < emb.tokens.size(); ++id) {
        out << emb.tokens[id];
        for (int j = 0; j < emb.dim; ++j) {
            std::snprintf(buf, sizeof(buf), " %.8g",
                          emb.input.at(id, static_cast<std::size_t>(j)));
            out << buf;
        }
        out << '\n';
    }
    if (emb.mode == EmbeddingMode::subword) {
        std::ofstream sub(path + ".sub", std::ios::binary);
        if (!sub) throw std::runtime_error("cannot write subword sidecar: " + path + ".sub");
        sub.write(kSubMagic, sizeof(kSubMagic));
        write_pod(sub, kSubVersion);
        write_pod(sub, std::uint32_t{0});
        write_pod(sub, static_cast<std::uint64_t>(emb.buckets.rows()));
        write_pod(sub, static_cast<std::uint32_t>(emb.dim));
        write_pod(sub, static_cast<std::uint32_t>(emb.nmin));
        write_pod(sub, static_cast<std::uint32_t>(emb.nmax));
        sub.write(reinterpret_cast<const char*>(emb.buckets.data.data()),
                  static_cast<std::streamsize>(emb.buckets.data.size() * sizeof(double)));
    }
}

EmbeddingSet load_vec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vectors: " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty vector file: " + path);
    std::istringstream hs(header);
    std::size_t v = 0;
    int d = 0;
    if (!(hs >> v >> d) || d < 1) throw std::runtime_error("bad vector header: " + header);

    EmbeddingSet emb;
    emb.dim = d;
    emb.input = Tensor({v, static_cast<std::size_t>(d)});
    std::string line;
    std::size_t id = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (id >= v) throw std::runtime_error("vector file has more rows than header claims");
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        emb.tokens.push_back(tok);
        emb.index.emplace(tok, static_cast<std::int32_t>(id));
        for (int j = 0; j < d; ++j) {
            double x;
            if (!(ls >> x)) {
                throw std::runtime_error("vector row has fewer than " + std::to_string(d) +
                                         " components: " + tok);
            }
            emb.input.at(id, static_cast<std::size_t>(j)) = x;
        }
        double extra;
        if (ls >> extra) {
            throw std::runtime_error("vector row has more than " + std::to_string(d) +
                                     " components: " + tok);
        }
        ++id;
    }
    if (id != v) throw std::runtime_error("vector file row count does not match header");
    emb.output = Tensor({v, static_cast<std::size_t>(d)});

    std::ifstream sub(path + ".sub", std::ios::binary);
    if (sub) {
        char magic[8];
        sub.read(magic, sizeof(magic));
        if (!sub || std::memcmp(magic, kSubMagic, sizeof(kSubMagic)) != 0) {
            throw std::runtime_error("subword sidecar: bad magic");
        }
        if (read_pod<std::uint32_t>(sub) != kSubVersion) {
            throw std::runtime_error("subword sidecar: unsupported version");
        }
        read_pod<std::uint32_t>(sub);  // reserved
        const auto b = static_cast<std::size_t>(read_pod<std::uint64_t>(sub));
        const auto sd = static_cast<int>(read_pod<std::uint32_t>(sub));
        if (sd != d) throw std::runtime_error("subword sidecar: dimension mismatch");
        emb.nmin = static_cast<int>(read_pod<std::uint32_t>(sub));
        emb.nmax = static_cast<int>(read_pod<std::uint32_t>(sub));
        emb.buckets = Tensor({b, static_cast<std::size_t>(d)});
        sub.read(reinterpret_cast<char*>(emb.buckets.data.data()),
                 static_cast<std::streamsize>(emb.buckets.data.size() * sizeof(double)));
        if (!sub) throw std::runtime_error("subword sidecar: truncated data");
        emb.mode = EmbeddingMode::subword;
        emb.word_buckets.resize(emb.tokens.size());
        for (std::size_t i = 2; i < emb.tokens.size(); ++i) {
            for (const auto& g : ngrams(emb.tokens[i], emb.nmin, emb.nmax)) {
                emb.word_buckets[i].push_back(fnv1a_hash(g) % b);
            }
        }
    }
    return emb;
}

}  // namespace emomix
