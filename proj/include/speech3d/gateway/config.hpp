#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "speech3d/adapters/http.hpp"
#include "speech3d/pipeline/pipeline.hpp"
#include "speech3d/vectorstore/store.hpp"

namespace speech3d::gateway {

// Raw key/value pairs, file first, environment on top.
using Settings = std::map<std::string, std::string>;

// Parses "key = value" lines. '#' starts a comment line. Throws ConfigError
// on a line without '=' or an empty key.
Settings parse_settings(const std::string& text);

// Reads and parses a file. Throws ConfigError when it cannot be read.
Settings read_settings(const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

// For every known key, MATRIX_<KEY> (upper case) in the environment replaces the
// file value. Per-backend keys are included.
void apply_env(Settings& settings, const EnvLookup& env);

// Every key the config understands.
const std::vector<std::string>& known_keys();

struct GatewayConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir;
  std::size_t max_upload_bytes = 1 << 20;
  std::size_t http_threads = 32;
  adapters::BackendsConfig backends;
  vectorstore::StoreConfig store;
  pipeline::PipelineConfig pipeline;

  // Throws ConfigError on unknown keys or unparsable values.
  static GatewayConfig from_settings(const Settings& settings);

  // Throws ConfigError. Serving needs a data_dir; offline tools do not.
  void validate(bool require_data_dir) const;

  std::string listen_addr() const { return host + ":" + std::to_string(port); }
};

// File (when given) plus environment, then from_settings.
GatewayConfig load_config(const std::optional<std::filesystem::path>& path,
                          const EnvLookup& env = process_env());

}  // namespace speech3d::gateway
