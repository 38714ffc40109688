#include "emomix/corpus.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "emomix/text.hpp"
#include "json.hpp"

namespace emomix {

HashtagMap HashtagMap::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open hashtag map: " + path);
    HashtagMap map;
    std::string line;
    enum { tags_section, keywords_section } section = tags_section;
    while (std::getline(in, line)) {
        auto toks = tokenize(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (toks[0] == "[hashtags]") {
            section = tags_section;
            continue;
        }
        if (toks[0] == "[keywords]") {
            section = keywords_section;
            continue;
        }
        if (section == tags_section) {
            if (toks.size() != 2) throw std::runtime_error("bad hashtag map line: " + line);
            auto emo = emotion_from_name(toks[1]);
            if (!emo) throw std::runtime_error("unknown emotion in hashtag map: " + toks[1]);
            map.tags[to_lower(toks[0])] = *emo;
        } else {
            map.scrape_keywords.insert(to_lower(toks[0]));
        }
    }
    for (int i = 0; i < kNumEmotions; ++i) {
        bool found = false;
        for (const auto& [tag, emo] : map.tags) {
            if (emo == static_cast<Emotion>(i)) found = true;
        }
        if (!found) {
            throw std::runtime_error(std::string("hashtag map has no tag for emotion ") +
                                     std::string(kEmotionNames[i]));
        }
    }
    return map;
}

HashtagMap HashtagMap::builtin_default() {
    HashtagMap map;
    auto add = [&](const char* tag, Emotion e) { map.tags[tag] = e; };
    add("happy", Emotion::happiness);
    add("happiness", Emotion::happiness);
    add("yayy", Emotion::happiness);
    add("joy", Emotion::happiness);
    add("blessed", Emotion::happiness);
    add("sad", Emotion::sadness);
    add("sadness", Emotion::sadness);
    add("depressed", Emotion::sadness);
    add("heartbroken", Emotion::sadness);
    add("angry", Emotion::anger);
    add("anger", Emotion::anger);
    add("rage", Emotion::anger);
    add("furious", Emotion::anger);
    add("fear", Emotion::fear);
    add("scared", Emotion::fear);
    add("afraid", Emotion::fear);
    add("terrified", Emotion::fear);
    add("disgust", Emotion::disgust);
    add("disgusting", Emotion::disgust);
    add("gross", Emotion::disgust);
    add("yuck", Emotion::disgust);
    add("wow", Emotion::surprise);
    add("surprise", Emotion::surprise);
    add("surprised", Emotion::surprise);
    add("shocked", Emotion::surprise);
    for (const auto& [tag, emo] : map.tags) map.scrape_keywords.insert(tag);
    return map;
}

WordSet load_word_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open word list: " + path);
    WordSet words;
    std::string line;
    while (std::getline(in, line)) {
        for (auto& tok : tokenize(line)) {
            if (tok[0] == '#') continue;
            words.insert(to_lower(tok));
        }
    }
    return words;
}

std::vector<std::string> extract_hashtags(const std::string& raw_text) {
    std::vector<std::string> tags;
    for (std::size_t i = 0; i < raw_text.size(); ++i) {
        if (raw_text[i] != '#') continue;
        std::string tag;
        std::size_t j = i + 1;
        while (j < raw_text.size()) {
            unsigned char c = static_cast<unsigned char>(raw_text[j]);
            if (std::isalnum(c) || c == '_') {
                tag.push_back(static_cast<char>(std::tolower(c)));
                ++j;
            } else {
                break;
            }
        }
        if (!tag.empty()) tags.push_back(tag);
        i = j - 1;
    }
    return tags;
}

ParseResult parse_corpus(std::istream& in) {
    ParseResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("id") ||
            !j.contains("text") || !j["id"].is_string() || !j["text"].is_string()) {
            result.diagnostics.push_back({line_no, "malformed record"});
            continue;
        }
        TweetRecord rec;
        rec.id = j["id"].get<std::string>();
        rec.raw_text = j["text"].get<std::string>();
        rec.hashtags = extract_hashtags(rec.raw_text);
        if (j.contains("label")) {
            if (!j["label"].is_string()) {
                result.diagnostics.push_back({line_no, "malformed label"});
                continue;
            }
            auto emo = emotion_from_name(j["label"].get<std::string>());
            if (!emo) {
                result.diagnostics.push_back({line_no, "unknown emotion label"});
                continue;
            }
            rec.label = emo;
        }
        if (j.contains("clean_text") && j["clean_text"].is_string()) {
            rec.clean_text = j["clean_text"].get<std::string>();
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

ParseResult parse_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus: " + path);
    return parse_corpus(in);
}

LabelResult label_from_hashtags(const TweetRecord& record, const HashtagMap& map) {
    std::optional<Emotion> found;
    for (const auto& tag : record.hashtags) {
        auto it = map.tags.find(tag);
        if (it == map.tags.end()) continue;
        if (found && *found != it->second) return {LabelStatus::ambiguous, std::nullopt};
        found = it->second;
    }
    if (!found) return {LabelStatus::unlabeled, std::nullopt};
    return {LabelStatus::labeled, found};
}

namespace {

std::string strip_symbols(const std::string& tok) {
    std::string out;
    for (char c : tok) {
        unsigned char u = static_cast<unsigned char>(c);
        if (u < 0x80 && (std::ispunct(u))) continue;
        out.push_back(c);
    }
    return out;
}

}  // namespace

FilterVerdict filter_language(const TweetRecord& record, const WordSet& hindi_lexicon,
                              const WordSet& english_lexicon) {
    if (contains_devanagari(record.raw_text)) return FilterVerdict::drop_devanagari;
    bool hindi_hit = false, english_hit = false;
    for (const auto& tok : tokenize(to_lower(record.raw_text))) {
        std::string word = strip_symbols(tok);
        if (word.empty()) continue;
        if (hindi_lexicon.count(word)) hindi_hit = true;
        if (english_lexicon.count(word)) english_hit = true;
        if (hindi_hit && english_hit) break;
    }
    if (!hindi_hit) return FilterVerdict::drop_pure_english;
    if (!english_hit) return FilterVerdict::drop_pure_hindi;
    return FilterVerdict::keep;
}

std::string clean_text(const std::string& text, const std::unordered_set<std::string>& keywords) {
    std::vector<std::string> kept;
    for (const auto& tok : tokenize(to_lower(text))) {
        if (is_mention_token(tok) || is_url_token(tok)) continue;
        std::string word = strip_symbols(tok);
        if (word.empty()) continue;
        if (keywords.count(word)) continue;
        kept.push_back(word);
    }
    return join_tokens(kept);
}

void drop_rare_words(std::vector<TweetRecord>& corpus, int min_count) {
    if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
    std::unordered_map<std::string, int> counts;
    for (const auto& rec : corpus) {
        if (!rec.clean_text) continue;
        for (const auto& tok : tokenize(*rec.clean_text)) ++counts[tok];
    }
    for (auto& rec : corpus) {
        if (!rec.clean_text) continue;
        std::vector<std::string> kept;
        for (auto& tok : tokenize(*rec.clean_text)) {
            if (counts[tok] >= min_count) kept.push_back(std::move(tok));
        }
        rec.clean_text = join_tokens(kept);
    }
}

std::map<Emotion, std::size_t> class_counts(const std::vector<TweetRecord>& corpus) {
    std::map<Emotion, std::size_t> counts;
    for (int i = 0; i < kNumEmotions; ++i) counts[static_cast<Emotion>(i)] = 0;
    for (const auto& rec : corpus) {
        if (rec.label) ++counts[*rec.label];
    }
    return counts;
}

void write_corpus_jsonl(const std::vector<TweetRecord>& corpus, std::ostream& out) {
    for (const auto& rec : corpus) {
        nlohmann::json j;
        j["id"] = rec.id;
        j["text"] = rec.raw_text;
        if (rec.label) j["label"] = std::string(emotion_name(*rec.label));
        if (rec.clean_text) j["clean_text"] = *rec.clean_text;
        out << j.dump() << '\n';
    }
}

}  // namespace emomix
