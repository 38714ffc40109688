#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace emomix {

// Token inventory with dense ids. Id 0 is padding, id 1 is unknown.
class Vocab {
  public:
    static constexpr std::int32_t kPadId = 0;
    static constexpr std::int32_t kUnkId = 1;

    Vocab();

    // Builds ids ordered by descending count, ties broken lexicographically.
    // Tokens below min_count are excluded.
    static Vocab build(const std::vector<std::string>& tokens, int min_count = 10);
    static Vocab build_from_counts(std::unordered_map<std::string, std::int64_t> counts,
                                   int min_count);

    std::int32_t id_of(const std::string& token) const;  // kUnkId when absent
    bool contains(const std::string& token) const;
    const std::string& token_of(std::int32_t id) const;
    std::int64_t count_of(std::int32_t id) const;
    std::size_t size() const { return tokens_.size(); }  // includes pad/unk
    std::size_t num_real_tokens() const { return tokens_.size() - 2; }

    std::vector<std::int32_t> encode(const std::string& cleaned_text, std::size_t max_len) const;

    void save(const std::string& path) const;  // token<TAB>id<TAB>count
    static Vocab load(const std::string& path);

  private:
    std::vector<std::string> tokens_;     // by id
    std::vector<std::int64_t> counts_;    // by id
    std::unordered_map<std::string, std::int32_t> index_;
};

// Draws negative samples with P(w) proportional to count(w)^alpha over
// non-reserved ids.
class NegativeTable {
  public:
    NegativeTable(const Vocab& vocab, double alpha = 0.75);

    std::int32_t sample(std::mt19937_64& rng) const;
    double probability(std::int32_t id) const;

  private:
    std::vector<double> cumulative_;  // over ids 2..V-1
    std::vector<double> probs_;
};

}  // namespace emomix
