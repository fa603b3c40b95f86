#include "speech3d/pipeline/languages.hpp"

#include <algorithm>

namespace speech3d::pipeline {

LanguageRegistry LanguageRegistry::standard() {
  return LanguageRegistry({
      {"ar", "Arabic", true},      {"bn", "Bengali", true},    {"ca", "Catalan", true},
      {"cs", "Czech", true},       {"cy", "Welsh", true},      {"da", "Danish", true},
      {"de", "German", true},      {"el", "Greek", true},      {"en", "English", true},
      {"es", "Spanish", true},     {"et", "Estonian", true},   {"fa", "Persian", true},
      {"fi", "Finnish", true},     {"fr", "French", true},     {"hi", "Hindi", true},
      {"hu", "Hungarian", true},   {"id", "Indonesian", true}, {"it", "Italian", true},
      {"ja", "Japanese", true},    {"ko", "Korean", true},     {"mt", "Maltese", true},
      {"nl", "Dutch", true},       {"pl", "Polish", true},     {"pt", "Portuguese", true},
      {"ro", "Romanian", true},    {"ru", "Russian", true},    {"sk", "Slovak", true},
      {"sv", "Swedish", true},     {"sw", "Swahili", true},    {"te", "Telugu", true},
      {"th", "Thai", true},        {"tl", "Tagalog", true},    {"tr", "Turkish", true},
      {"uk", "Ukrainian", true},   {"ur", "Urdu", true},       {"uz", "Uzbek", true},
      {"vi", "Vietnamese", true},  {"zh", "Chinese", true},
  });
}

LanguageRegistry::LanguageRegistry(std::vector<LanguageEntry> entries) : entries_(std::move(entries)) {}

bool LanguageRegistry::contains(const std::string& tag) const { return find(tag).has_value(); }

std::optional<LanguageEntry> LanguageRegistry::find(const std::string& tag) const {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const LanguageEntry& e) { return e.tag == tag; });
  if (it == entries_.end()) return std::nullopt;
  return *it;
}

}  // namespace speech3d::pipeline
