#include "speech3d/gateway/api_error.hpp"

#include "speech3d/errors.hpp"

namespace speech3d::gateway {

const std::vector<std::pair<std::string, int>>& error_table() {
  static const std::vector<std::pair<std::string, int>> table = {
      {"bad_request", 400},
      {"parse_error", 400},
      {"index_error", 400},
      {"empty_mesh", 400},
      {"invalid_mesh", 400},
      {"invalid_argument", 400},
      {"bad_audio", 400},
      {"unsupported_language", 400},
      {"non_positive_scale", 400},
      {"not_found", 404},
      {"unknown_session", 404},
      {"unknown_asset", 404},
      {"invalid_choice", 409},
      {"invalid_state", 409},
      {"illegal_transition", 409},
      {"payload_too_large", 413},
      {"audio_too_long", 413},
      {"no_objects", 422},
      {"unknown_fixture", 422},
      {"internal", 500},
      {"dimension_mismatch", 500},
      {"persistence_error", 500},
      {"corrupt_index", 500},
      {"config_error", 500},
      {"backend_error", 502},
      {"unparseable_reply", 502},
      {"generation_failed", 502},
      {"backend_timeout", 504},
  };
  return table;
}

int http_status_for(const std::string& code) {
  for (const auto& [c, status] : error_table())
    if (c == code) return status;
  return 500;
}

ApiError to_api_error(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return {err->code(), err->what(), http_status_for(err->code())};
  return {"internal", e.what(), 500};
}

}  // namespace speech3d::gateway
