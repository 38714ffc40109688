#include "emomix/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "emomix/text.hpp"

namespace emomix {

Vocab::Vocab() {
    tokens_ = {"<pad>", "<unk>"};
    counts_ = {0, 0};
}

Vocab Vocab::build(const std::vector<std::string>& tokens, int min_count) {
    std::unordered_map<std::string, std::int64_t> counts;
    for (const auto& tok : tokens) ++counts[tok];
    return build_from_counts(std::move(counts), min_count);
}

Vocab Vocab::build_from_counts(std::unordered_map<std::string, std::int64_t> counts,
                               int min_count) {
    if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
    std::vector<std::pair<std::string, std::int64_t>> kept;
    for (auto& [tok, n] : counts) {
        if (n >= min_count) kept.emplace_back(tok, n);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    Vocab v;
    for (auto& [tok, n] : kept) {
        v.index_[tok] = static_cast<std::int32_t>(v.tokens_.size());
        v.tokens_.push_back(tok);
        v.counts_.push_back(n);
    }
    return v;
}

std::int32_t Vocab::id_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnkId : it->second;
}

bool Vocab::contains(const std::string& token) const { return index_.count(token) > 0; }

const std::string& Vocab::token_of(std::int32_t id) const {
    return tokens_.at(static_cast<std::size_t>(id));
}

std::int64_t Vocab::count_of(std::int32_t id) const {
    return counts_.at(static_cast<std::size_t>(id));
}

std::vector<std::int32_t> Vocab::encode(const std::string& cleaned_text,
                                        std::size_t max_len) const {
    if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
    std::vector<std::int32_t> ids(max_len, kPadId);
    std::size_t i = 0;
    for (const auto& tok : tokenize(cleaned_text)) {
        if (i >= max_len) break;
        ids[i++] = id_of(tok);
    }
    return ids;
}

void Vocab::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write vocab: " + path);
    for (std::size_t id = 0; id < tokens_.size(); ++id) {
        out << tokens_[id] << '\t' << id << '\t' << counts_[id] << '\n';
    }
}

Vocab Vocab::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vocab: " + path);
    Vocab v;
    v.tokens_.clear();
    v.counts_.clear();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab1 = line.find('\t');
        auto tab2 = line.find('\t', tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos) {
            throw std::runtime_error("bad vocab line: " + line);
        }
        std::string tok = line.substr(0, tab1);
        std::int32_t id = std::stoi(line.substr(tab1 + 1, tab2 - tab1 - 1));
        std::int64_t count = std::stoll(line.substr(tab2 + 1));
        if (id != static_cast<std::int32_t>(v.tokens_.size())) {
            throw std::runtime_error("vocab ids not dense at line: " + line);
        }
        v.tokens_.push_back(tok);
        v.counts_.push_back(count);
        if (id >= 2) v.index_[tok] = id;
    }
    if (v.tokens_.size() < 2) throw std::runtime_error("vocab missing reserved ids");
    return v;
}

NegativeTable::NegativeTable(const Vocab& vocab, double alpha) {
    if (vocab.num_real_tokens() == 0) {
        throw std::invalid_argument("negative table needs a non-empty vocab");
    }
    const std::size_t v = vocab.size();
    probs_.assign(v, 0.0);
    double total = 0.0;
    for (std::size_t id = 2; id < v; ++id) {
        total += std::pow(static_cast<double>(vocab.count_of(static_cast<std::int32_t>(id))), alpha);
    }
    cumulative_.reserve(v - 2);
    double acc = 0.0;
    for (std::size_t id = 2; id < v; ++id) {
        double p = std::pow(static_cast<double>(vocab.count_of(static_cast<std::int32_t>(id))), alpha) / total;
        probs_[id] = p;
        acc += p;
        cumulative_.push_back(acc);
    }
    cumulative_.back() = 1.0;
}

std::int32_t NegativeTable::sample(std::mt19937_64& rng) const {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::int32_t>(2 + (it - cumulative_.begin()));
}

double NegativeTable::probability(std::int32_t id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= probs_.size()) return 0.0;
    return probs_[static_cast<std::size_t>(id)];
}

}  // namespace emomix
