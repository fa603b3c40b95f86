#include "speech3d/adapters/lexicon.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace speech3d::adapters::lexicon {

const std::vector<Word>& words() {
  static const std::vector<Word> table = [] {
    std::vector<Word> w;
    for (const char* n : {"apple", "banana", "pear", "grapes", "plate", "knife", "fork", "spoon",
                          "cup", "bowl", "glass", "bottle", "vase", "flower", "chair", "table",
                          "lamp", "book", "clock", "ball", "hat", "shoe", "car", "tree", "cake",
                          "bread", "cheese", "orange", "lemon", "strawberry", "teapot", "candle",
                          "pizza"})
      w.push_back({n, WordKind::noun});
    for (const char* c :
         {"red", "green", "blue", "yellow", "white", "black", "purple", "brown", "pink"})
      w.push_back({c, WordKind::color});
    for (const char* s : {"small", "large", "big", "tiny"}) w.push_back({s, WordKind::size});
    for (const char* s : {"round", "square", "tall", "flat"}) w.push_back({s, WordKind::shape});
    return w;
  }();
  return table;
}

std::optional<WordKind> kind_of(std::string_view word) {
  for (const auto& w : words())
    if (w.text == word) return w.kind;
  if (synonyms().count(std::string(word))) return WordKind::noun;
  return std::nullopt;
}

const std::map<std::string, std::string>& synonyms() {
  static const std::map<std::string, std::string> table = {
      {"mug", "cup"},
      {"dish", "plate"},
      {"grape", "grapes"},
  };
  return table;
}

const std::map<std::string, std::vector<std::string>>& complements() {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"apple", {"plate", "banana", "knife"}},
      {"banana", {"apple", "bowl", "grapes"}},
      {"pear", {"apple", "knife", "plate"}},
      {"grapes", {"cheese", "bowl", "glass"}},
      {"plate", {"fork", "knife", "cup"}},
      {"cup", {"teapot", "spoon", "cake"}},
      {"table", {"chair", "lamp", "vase"}},
      {"chair", {"table", "lamp", "book"}},
      {"book", {"lamp", "clock", "cup"}},
  };
  return table;
}

const std::vector<std::string>& starter_set() {
  static const std::vector<std::string> set = {"apple", "cup", "book", "lamp"};
  return set;
}

bool is_stopword(std::string_view word) {
  static constexpr std::array<std::string_view, 34> stop = {
      "a",    "an",   "the",  "create", "make",  "matrix", "please",   "me",    "some",
      "and",  "with", "of",   "to",     "for",   "put",    "add",      "show",  "i",
      "want", "would", "like", "can",   "you",   "generate", "build",  "give",  "place",
      "on",   "in",   "next", "another", "new",  "one",    "hello"};
  return std::find(stop.begin(), stop.end(), word) != stop.end();
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalpha(c) || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string noun_form(const std::string& token) {
  auto is_noun = [](const std::string& w) { return kind_of(w) == WordKind::noun; };
  if (is_noun(token)) return token;
  if (token.size() > 3 && token.ends_with("ies")) {
    std::string s = token.substr(0, token.size() - 3) + "y";
    if (is_noun(s)) return s;
  }
  if (token.size() > 2 && token.ends_with("es")) {
    std::string s = token.substr(0, token.size() - 2);
    if (is_noun(s)) return s;
  }
  if (token.size() > 1 && token.ends_with('s')) {
    std::string s = token.substr(0, token.size() - 1);
    if (is_noun(s)) return s;
  }
  return {};
}

}  // namespace speech3d::adapters::lexicon
