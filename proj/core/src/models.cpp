#include "emomix/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "emomix/checkpoint.hpp"

namespace emomix {

std::string_view arch_name(Architecture a) {
    switch (a) {
        case Architecture::cnn: return "cnn";
        case Architecture::lstm: return "lstm";
        case Architecture::bilstm: return "bilstm";
        case Architecture::attn_bilstm: return "attn_bilstm";
    }
    return "?";
}

std::optional<Architecture> arch_from_name(std::string_view name) {
    if (name == "cnn") return Architecture::cnn;
    if (name == "lstm") return Architecture::lstm;
    if (name == "bilstm") return Architecture::bilstm;
    if (name == "attn_bilstm") return Architecture::attn_bilstm;
    return std::nullopt;
}

Tensor& ModelParams::get(const std::string& name) {
    auto it = name_index.find(name);
    if (it == name_index.end()) throw std::out_of_range("no model tensor named " + name);
    return tensors[it->second].second;
}

const Tensor& ModelParams::get(const std::string& name) const {
    auto it = name_index.find(name);
    if (it == name_index.end()) throw std::out_of_range("no model tensor named " + name);
    return tensors[it->second].second;
}

void ModelParams::add(std::string name, Tensor t) {
    name_index[name] = tensors.size();
    tensors.emplace_back(std::move(name), std::move(t));
}

namespace {

Tensor glorot(std::size_t fan_in, std::size_t fan_out, std::vector<std::size_t> shape,
              std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    return Tensor::uniform(std::move(shape), -limit, limit, rng);
}

Tensor lstm_bias(std::size_t hidden) {
    // forget gate bias starts at 1, gate order [i f o g]
    Tensor b({4 * hidden});
    for (std::size_t i = hidden; i < 2 * hidden; ++i) b.at(i) = 1.0;
    return b;
}

void add_common(ModelParams& p, std::mt19937_64& rng) {
    const auto& h = p.hyper;
    const auto d = static_cast<std::size_t>(h.emb_dim);
    const auto units = static_cast<std::size_t>(h.lstm_units);
    std::size_t dense_in = 0;
    switch (h.arch) {
        case Architecture::cnn: {
            const auto f = static_cast<std::size_t>(h.num_kernels);
            for (int ks : h.kernel_sizes) {
                const auto k = static_cast<std::size_t>(ks);
                const std::string tag = "conv" + std::to_string(ks);
                p.add(tag + ".kernels", glorot(k * d, f, {f, k, d}, rng));
                p.add(tag + ".bias", Tensor({f}));
            }
            const std::size_t cat = f * h.kernel_sizes.size();
            const auto h1 = static_cast<std::size_t>(h.cnn_hidden1);
            const auto h2 = static_cast<std::size_t>(h.cnn_hidden2);
            p.add("dense1.w", glorot(cat, h1, {cat, h1}, rng));
            p.add("dense1.b", Tensor({h1}));
            p.add("dense2.w", glorot(h1, h2, {h1, h2}, rng));
            p.add("dense2.b", Tensor({h2}));
            dense_in = h2;
            break;
        }
        case Architecture::lstm:
        case Architecture::bilstm:
        case Architecture::attn_bilstm: {
            p.add("lstm_fw.wx", glorot(d, units, {d, 4 * units}, rng));
            p.add("lstm_fw.wh", glorot(units, units, {units, 4 * units}, rng));
            p.add("lstm_fw.b", lstm_bias(units));
            std::size_t feat = units;
            if (h.arch != Architecture::lstm) {
                p.add("lstm_bw.wx", glorot(d, units, {d, 4 * units}, rng));
                p.add("lstm_bw.wh", glorot(units, units, {units, 4 * units}, rng));
                p.add("lstm_bw.b", lstm_bias(units));
                feat = 2 * units;
            }
            if (h.arch == Architecture::attn_bilstm) {
                const auto a = static_cast<std::size_t>(h.attn_dim);
                p.add("attn.w", glorot(feat, a, {feat, a}, rng));
                p.add("attn.v", glorot(a, 1, {a}, rng));
                feat = 4 * units;  // context (2H) + {h_fwT, h_bw1} (2H)
            }
            const auto rh = static_cast<std::size_t>(h.rnn_hidden);
            p.add("dense1.w", glorot(feat, rh, {feat, rh}, rng));
            p.add("dense1.b", Tensor({rh}));
            dense_in = rh;
            break;
        }
    }
    p.add("out.w", glorot(dense_in, kNumEmotions, {dense_in, kNumEmotions}, rng));
    p.add("out.b", Tensor({kNumEmotions}));
}

void check_hyper(const ModelHyper& h) {
    if (h.arch == Architecture::cnn) {
        const int max_ks = *std::max_element(h.kernel_sizes.begin(), h.kernel_sizes.end());
        if (h.max_len < max_ks) {
            throw std::invalid_argument("max_len must cover the largest kernel size");
        }
    }
    if (h.max_len < 1) throw std::invalid_argument("max_len must be >= 1");
}

}  // namespace

ModelParams ModelParams::init(const ModelHyper& hyper, const Vocab& vocab,
                              const EmbeddingSet& emb, std::uint64_t seed) {
    check_hyper(hyper);
    if (hyper.emb_dim != emb.dim) {
        throw std::invalid_argument("model embedding dim does not match embedding set");
    }
    ModelParams p;
    p.hyper = hyper;
    std::mt19937_64 rng(seed);
    const auto d = static_cast<std::size_t>(hyper.emb_dim);
    Tensor embedding({vocab.size(), d});
    for (std::size_t id = 2; id < vocab.size(); ++id) {
        auto row = emb.vector_for(vocab.token_of(static_cast<std::int32_t>(id)));
        for (std::size_t j = 0; j < d; ++j) embedding.at(id, j) = row[j];
    }
    p.add("embedding", std::move(embedding));
    add_common(p, rng);
    return p;
}

ModelParams ModelParams::init_random(const ModelHyper& hyper, std::size_t vocab_size,
                                     std::uint64_t seed) {
    check_hyper(hyper);
    ModelParams p;
    p.hyper = hyper;
    std::mt19937_64 rng(seed);
    const auto d = static_cast<std::size_t>(hyper.emb_dim);
    Tensor embedding = Tensor::uniform({vocab_size, d}, -0.1, 0.1, rng);
    for (std::size_t j = 0; j < d; ++j) embedding.at(0, j) = 0.0;  // pad row
    p.add("embedding", std::move(embedding));
    add_common(p, rng);
    return p;
}

Tape::VarId ForwardContext::leaf(const std::string& name) const {
    for (const auto& [n, id] : leaves) {
        if (n == name) return id;
    }
    throw std::out_of_range("no leaf named " + name);
}

ForwardContext make_context(Tape& tape, const ModelParams& params) {
    ForwardContext ctx;
    ctx.tape = &tape;
    for (const auto& [name, t] : params.tensors) {
        ctx.leaves.emplace_back(name, tape.leaf(t));
    }
    return ctx;
}

namespace {

std::size_t content_length(const std::vector<std::int32_t>& ids) {
    std::size_t n = 0;
    for (std::int32_t id : ids) {
        if (id != Vocab::kPadId) ++n;
    }
    return n;
}

struct LstmRun {
    std::vector<Tape::VarId> states;  // per input position
    Tape::VarId final_h;
};

LstmRun run_lstm(Tape& tape, Tape::VarId x_mat, const LstmWeights& w, std::size_t hidden,
                 std::size_t T, bool reversed, bool training, double recurrent_dropout,
                 std::mt19937_64& rng) {
    LstmState s{tape.leaf(Tensor({hidden})), tape.leaf(Tensor({hidden}))};
    Tensor rec_mask;
    if (training && recurrent_dropout > 0.0) {
        rec_mask = dropout_mask({hidden}, recurrent_dropout, rng);  // fixed per sequence
    }
    std::vector<Tape::VarId> states(T);
    for (std::size_t step = 0; step < T; ++step) {
        const std::size_t pos = reversed ? T - 1 - step : step;
        auto x_t = tape.row(x_mat, pos);
        LstmState prev = s;
        if (rec_mask.size() > 0) prev.h = tape.mul_const(prev.h, rec_mask);
        s = lstm_cell(tape, x_t, prev, w, hidden);
        states[pos] = s.h;
    }
    return {std::move(states), s.h};
}

Tape::VarId dense_head(Tape& tape, const ForwardContext& ctx, Tape::VarId features) {
    auto h1 = tape.relu(tape.affine(features, ctx.leaf("dense1.w"), ctx.leaf("dense1.b")));
    return tape.sigmoid(tape.affine(h1, ctx.leaf("out.w"), ctx.leaf("out.b")));
}

}  // namespace

Tape::VarId model_forward(ForwardContext& ctx, const ModelParams& params,
                          const std::vector<std::int32_t>& ids, bool training,
                          std::mt19937_64& rng) {
    Tape& tape = *ctx.tape;
    const auto& h = params.hyper;
    if (ids.size() != static_cast<std::size_t>(h.max_len)) {
        throw std::invalid_argument("model_forward: input length does not match max_len");
    }
    const std::size_t T = ids.size();
    const std::size_t content = content_length(ids);
    auto x = tape.lookup(ctx.leaf("embedding"), ids);

    if (h.arch == Architecture::cnn) {
        std::vector<Tape::VarId> pooled;
        for (int ks : h.kernel_sizes) {
            const auto k = static_cast<std::size_t>(ks);
            const std::string tag = "conv" + std::to_string(ks);
            auto conv = tape.conv1d_valid(x, ctx.leaf(tag + ".kernels"), ctx.leaf(tag + ".bias"));
            auto activated = tape.relu(conv);
            // pad windows are excluded from the pool; keep at least one row
            std::size_t valid = content >= k ? content - k + 1 : 1;
            pooled.push_back(tape.global_max_pool(activated, valid));
        }
        auto cat = tape.concat(pooled);
        if (training && h.cnn_dropout > 0.0) {
            cat = tape.mul_const(cat, dropout_mask(tape.value(cat).shape, h.cnn_dropout, rng));
        }
        auto h1 = tape.relu(tape.affine(cat, ctx.leaf("dense1.w"), ctx.leaf("dense1.b")));
        auto h2 = tape.relu(tape.affine(h1, ctx.leaf("dense2.w"), ctx.leaf("dense2.b")));
        return tape.sigmoid(tape.affine(h2, ctx.leaf("out.w"), ctx.leaf("out.b")));
    }

    const auto units = static_cast<std::size_t>(h.lstm_units);
    if (training && h.input_dropout > 0.0) {
        x = tape.mul_const(x, dropout_mask(tape.value(x).shape, h.input_dropout, rng));
    }
    LstmWeights fw{ctx.leaf("lstm_fw.wx"), ctx.leaf("lstm_fw.wh"), ctx.leaf("lstm_fw.b")};
    auto fw_run = run_lstm(tape, x, fw, units, T, false, training, h.recurrent_dropout, rng);

    if (h.arch == Architecture::lstm) {
        return dense_head(tape, ctx, fw_run.final_h);
    }

    LstmWeights bw{ctx.leaf("lstm_bw.wx"), ctx.leaf("lstm_bw.wh"), ctx.leaf("lstm_bw.b")};
    auto bw_run = run_lstm(tape, x, bw, units, T, true, training, h.recurrent_dropout, rng);
    // bw_run.final_h is the backward state after consuming position 0
    auto ends = tape.concat({fw_run.final_h, bw_run.final_h});

    if (h.arch == Architecture::bilstm) {
        return dense_head(tape, ctx, ends);
    }

    // attention over concatenated per-position states
    std::vector<Tape::VarId> state_rows(T);
    for (std::size_t t = 0; t < T; ++t) {
        state_rows[t] = tape.concat({fw_run.states[t], bw_run.states[t]});
    }
    auto states_mat = tape.stack_rows(state_rows);
    auto attn_w = ctx.leaf("attn.w");
    auto attn_v = ctx.leaf("attn.v");
    auto zero_b = tape.leaf(Tensor({static_cast<std::size_t>(h.attn_dim)}));
    std::vector<Tape::VarId> scores(T);
    for (std::size_t t = 0; t < T; ++t) {
        auto proj = tape.tanh(tape.affine(state_rows[t], attn_w, zero_b));
        scores[t] = tape.sum(tape.mul(proj, attn_v));
    }
    auto score_vec = tape.concat(scores);
    auto alpha = tape.masked_softmax(score_vec, std::max<std::size_t>(content, 1));
    auto context = tape.rows_weighted_sum(states_mat, alpha);
    auto features = tape.concat({context, fw_run.final_h, bw_run.final_h});
    return dense_head(tape, ctx, features);
}

Tensor forward_scores(const ModelParams& params, const std::vector<std::int32_t>& ids) {
    Tape tape;
    auto ctx = make_context(tape, params);
    std::mt19937_64 rng(0);
    auto scores = model_forward(ctx, params, ids, false, rng);
    return tape.value(scores);
}

int argmax_class(const Tensor& scores) {
    int best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores.at(i) > scores.at(static_cast<std::size_t>(best))) {
            best = static_cast<int>(i);
        }
    }
    return best;
}

Prediction predict(const std::string& raw_text, const ModelParams& params, const Vocab& vocab,
                   const std::unordered_set<std::string>& scrape_keywords) {
    const std::string cleaned = clean_text(raw_text, scrape_keywords);
    if (cleaned.empty()) throw EmptyInputError("input is empty after cleaning");
    auto ids = vocab.encode(cleaned, static_cast<std::size_t>(params.hyper.max_len));
    Tensor scores = forward_scores(params, ids);
    return {*emotion_from_code(argmax_class(scores)), std::move(scores)};
}

void save_model(const ModelParams& params, const std::string& path,
                const std::unordered_map<std::string, std::string>& extra_manifest) {
    save_checkpoint(path, params.tensors);
    std::ofstream out(path + ".manifest");
    if (!out) throw std::runtime_error("cannot write manifest: " + path + ".manifest");
    const auto& h = params.hyper;
    out << "architecture " << arch_name(h.arch) << '\n';
    out << "max_len " << h.max_len << '\n';
    out << "emb_dim " << h.emb_dim << '\n';
    out << "lstm_units " << h.lstm_units << '\n';
    out << "num_kernels " << h.num_kernels << '\n';
    out << "kernel_sizes";
    for (std::size_t i = 0; i < h.kernel_sizes.size(); ++i) {
        out << (i ? ',' : ' ') << h.kernel_sizes[i];
    }
    out << '\n';
    out << "cnn_hidden1 " << h.cnn_hidden1 << '\n';
    out << "cnn_hidden2 " << h.cnn_hidden2 << '\n';
    out << "rnn_hidden " << h.rnn_hidden << '\n';
    out << "attn_dim " << h.attn_dim << '\n';
    out << "cnn_dropout " << h.cnn_dropout << '\n';
    out << "input_dropout " << h.input_dropout << '\n';
    out << "recurrent_dropout " << h.recurrent_dropout << '\n';
    out << "freeze_embedding " << (h.freeze_embedding ? 1 : 0) << '\n';
    for (const auto& [k, v] : extra_manifest) out << k << ' ' << v << '\n';
}

std::unordered_map<std::string, std::string> load_manifest(const std::string& path) {
    std::ifstream in(path + ".manifest");
    if (!in) throw std::runtime_error("cannot open manifest: " + path + ".manifest");
    std::unordered_map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        auto sp = line.find(' ');
        if (sp == std::string::npos || sp == 0) continue;
        kv[line.substr(0, sp)] = line.substr(sp + 1);
    }
    return kv;
}

ModelParams load_model(const std::string& path) {
    auto kv = load_manifest(path);
    ModelHyper h;
    auto arch = arch_from_name(kv.at("architecture"));
    if (!arch) throw std::runtime_error("unknown architecture in manifest");
    h.arch = *arch;
    h.max_len = std::stoi(kv.at("max_len"));
    h.emb_dim = std::stoi(kv.at("emb_dim"));
    h.lstm_units = std::stoi(kv.at("lstm_units"));
    h.num_kernels = std::stoi(kv.at("num_kernels"));
    h.kernel_sizes.clear();
    std::istringstream ks(kv.at("kernel_sizes"));
    std::string part;
    while (std::getline(ks, part, ',')) h.kernel_sizes.push_back(std::stoi(part));
    h.cnn_hidden1 = std::stoi(kv.at("cnn_hidden1"));
    h.cnn_hidden2 = std::stoi(kv.at("cnn_hidden2"));
    h.rnn_hidden = std::stoi(kv.at("rnn_hidden"));
    h.attn_dim = std::stoi(kv.at("attn_dim"));
    h.cnn_dropout = std::stod(kv.at("cnn_dropout"));
    h.input_dropout = std::stod(kv.at("input_dropout"));
    h.recurrent_dropout = std::stod(kv.at("recurrent_dropout"));
    h.freeze_embedding = kv.at("freeze_embedding") == "1";

    ModelParams p;
    p.hyper = h;
    for (auto& [name, t] : load_checkpoint(path)) p.add(name, std::move(t));
    return p;
}

}  // namespace emomix
