#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "emomix/emotion.hpp"

namespace emomix {

struct TweetRecord {
    std::string id;
    std::string raw_text;
    std::vector<std::string> hashtags;  // lowercased, '#' stripped
    std::optional<Emotion> label;
    std::optional<std::string> clean_text;
};

// Hashtag -> emotion mapping plus the scrape keywords deleted during cleaning.
struct HashtagMap {
    std::unordered_map<std::string, Emotion> tags;
    std::unordered_set<std::string> scrape_keywords;

    static HashtagMap load(const std::string& path);
    static HashtagMap builtin_default();
};

using WordSet = std::unordered_set<std::string>;

WordSet load_word_list(const std::string& path);

// '#'-prefixed alphanumeric runs of the raw text, lowercased, '#' removed.
std::vector<std::string> extract_hashtags(const std::string& raw_text);

struct ParseDiagnostic {
    std::size_t line_no;  // 1-based
    std::string message;
};

struct ParseResult {
    std::vector<TweetRecord> records;
    std::vector<ParseDiagnostic> diagnostics;
};

// Reads JSON Lines records: {"id": ..., "text": ..., "label"?: ...}.
ParseResult parse_corpus(std::istream& in);
ParseResult parse_corpus_file(const std::string& path);

enum class LabelStatus { labeled, unlabeled, ambiguous };

struct LabelResult {
    LabelStatus status;
    std::optional<Emotion> emotion;  // set iff status == labeled
};

LabelResult label_from_hashtags(const TweetRecord& record, const HashtagMap& map);

enum class FilterVerdict { keep, drop_devanagari, drop_pure_english, drop_pure_hindi };

FilterVerdict filter_language(const TweetRecord& record, const WordSet& hindi_lexicon,
                              const WordSet& english_lexicon);

std::string clean_text(const std::string& text, const std::unordered_set<std::string>& keywords);

// Deletes tokens whose corpus-wide count (taken before any deletion) is
// below min_count. Throws std::invalid_argument for min_count < 1.
void drop_rare_words(std::vector<TweetRecord>& corpus, int min_count = 10);

std::map<Emotion, std::size_t> class_counts(const std::vector<TweetRecord>& corpus);

void write_corpus_jsonl(const std::vector<TweetRecord>& corpus, std::ostream& out);

}  // namespace emomix
