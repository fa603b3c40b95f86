#include "speech3d/pipeline/status.hpp"

#include <algorithm>

namespace speech3d::pipeline {

const char* to_string(StatusState s) {
  switch (s) {
    case StatusState::Welcome: return "Welcome";
    case StatusState::Listening: return "Listening";
    case StatusState::Thinking: return "Thinking";
    case StatusState::Offers: return "Offers";
    case StatusState::Baking: return "Baking";
    case StatusState::Presenting: return "Presenting";
  }
  return "?";
}

std::optional<StatusState> status_from_string(const std::string& s) {
  for (auto st : kAllStates)
    if (s == to_string(st)) return st;
  return std::nullopt;
}

const std::vector<std::pair<StatusState, StatusState>>& transitions() {
  using S = StatusState;
  static const std::vector<std::pair<S, S>> edges = {
      {S::Welcome, S::Listening},  {S::Presenting, S::Listening}, {S::Listening, S::Thinking},
      {S::Thinking, S::Offers},    {S::Offers, S::Baking},        {S::Baking, S::Presenting},
      {S::Thinking, S::Welcome},   {S::Thinking, S::Presenting},  {S::Offers, S::Listening},
      {S::Baking, S::Offers},
  };
  return edges;
}

bool is_legal(StatusState from, StatusState to) {
  const auto& e = transitions();
  return std::find(e.begin(), e.end(), std::make_pair(from, to)) != e.end();
}

bool is_legal_path(const std::vector<StatusState>& path) {
  if (path.empty()) return true;
  if (path.front() != StatusState::Welcome) return false;
  for (std::size_t i = 1; i < path.size(); ++i)
    if (!is_legal(path[i - 1], path[i])) return false;
  return true;
}

}  // namespace speech3d::pipeline
