#pragma once

#include <optional>
#include <string>
#include <vector>

namespace speech3d::pipeline {

struct LanguageEntry {
  std::string tag;
  std::string display_name;
  bool supports_s2tt = true;
};

class LanguageRegistry {
 public:
  // Languages with speech translation in both directions; includes "en".
  static LanguageRegistry standard();

  explicit LanguageRegistry(std::vector<LanguageEntry> entries);

  const std::vector<LanguageEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& tag) const;
  std::optional<LanguageEntry> find(const std::string& tag) const;

 private:
  std::vector<LanguageEntry> entries_;
};

}  // namespace speech3d::pipeline
