#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace emomix {

// Decodes UTF-8 into codepoints; invalid bytes decode as U+FFFD and advance
// one byte so iteration always terminates.
std::vector<char32_t> utf8_codepoints(std::string_view s);

bool contains_devanagari(std::string_view s);

// ASCII-only lowercasing; multibyte sequences pass through untouched.
std::string to_lower(std::string_view s);

// Whitespace tokenization.
std::vector<std::string> tokenize(std::string_view s);

std::string join_tokens(const std::vector<std::string>& tokens);

bool is_url_token(std::string_view tok);
bool is_mention_token(std::string_view tok);

}  // namespace emomix
