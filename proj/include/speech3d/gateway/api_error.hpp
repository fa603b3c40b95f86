#pragma once

#include <exception>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace speech3d::gateway {

struct ApiError {
  std::string code;
  std::string message;
  int http_status = 500;

  nlohmann::json to_json() const { return {{"code", code}, {"message", message}, {"status", http_status}}; }
};

// Status for a library error code; 500 for codes not in the table.
int http_status_for(const std::string& code);

// The full code -> status table, for docs and tests.
const std::vector<std::pair<std::string, int>>& error_table();

// speech3d::Error keeps its code; anything else becomes "internal".
ApiError to_api_error(const std::exception& e);

}  // namespace speech3d::gateway
