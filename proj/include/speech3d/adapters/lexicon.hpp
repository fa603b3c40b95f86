#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace speech3d::adapters::lexicon {

// Word classes of the mock language model.
enum class WordKind { noun, color, size, shape };

struct Word {
  std::string text;
  WordKind kind;
};

// 50 words: 33 nouns, 9 colors, 4 sizes, 4 shapes, in a fixed order.
const std::vector<Word>& words();

std::optional<WordKind> kind_of(std::string_view word);

// Near-synonym table used by the mock embedder (word -> canonical noun).
// A synonym also counts as a noun for extraction.
const std::map<std::string, std::string>& synonyms();

// Static complement table of the mock recommender.
const std::map<std::string, std::vector<std::string>>& complements();

// Suggested when the context has no complement entry.
const std::vector<std::string>& starter_set();

// Words carrying no meaning for extraction or embedding ("a", "create", ...).
bool is_stopword(std::string_view word);

// Lowercased alphabetic tokens, everything else treated as a separator.
// Non-ASCII bytes are kept inside tokens.
std::vector<std::string> tokenize(std::string_view text);

// Maps a token to a lexicon noun or synonym: exact match, then a trailing
// "s" / "es" plural. Empty when the token is not a noun.
std::string noun_form(const std::string& token);

}  // namespace speech3d::adapters::lexicon
