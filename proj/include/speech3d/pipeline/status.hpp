#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace speech3d::pipeline {

enum class StatusState { Welcome, Listening, Thinking, Offers, Baking, Presenting };

inline constexpr std::array<StatusState, 6> kAllStates = {
    StatusState::Welcome, StatusState::Listening, StatusState::Thinking,
    StatusState::Offers,  StatusState::Baking,    StatusState::Presenting};

const char* to_string(StatusState s);
std::optional<StatusState> status_from_string(const std::string& s);

// Allowed (from, to) pairs. Thinking returns to the state the command came
// from when it fails, Offers accepts a fresh command, and a failed generation
// goes back from Baking to Offers.
const std::vector<std::pair<StatusState, StatusState>>& transitions();

bool is_legal(StatusState from, StatusState to);

// True when the sequence starts at Welcome and every step is an edge.
bool is_legal_path(const std::vector<StatusState>& path);

}  // namespace speech3d::pipeline
