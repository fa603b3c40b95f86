#include "speech3d/gateway/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "speech3d/errors.hpp"

namespace speech3d::gateway {

namespace {

constexpr std::string_view kBackendNames[] = {adapters::kTranscribe, adapters::kTts,      adapters::kExtract,
                                               adapters::kRecommend,  adapters::kGenerate, adapters::kEmbed};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> build_keys() {
  std::vector<std::string> keys = {
      "listen_addr",       "data_dir",          "max_upload_bytes",   "http_threads",
      "backend_mode",      "backend_url",       "backend_timeout_ms", "backend_retries",
      "max_in_flight",     "embed_dimension",   "hit_threshold",      "dedup_threshold",
      "simplify_target",   "simplify_passes",   "max_offers",         "recommendations",
      "mock_gen_delay_ms", "gen_timeout_ms",    "sampler_steps",      "persist_store"};
  for (auto name : kBackendNames)
    for (const char* field : {"_mode", "_url", "_timeout_ms", "_retries"})
      keys.push_back("backend_" + std::string(name) + field);
  return keys;
}

template <typename T>
T number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) throw ConfigError(key + ": not a number: '" + value + "'");
  return out;
}

bool boolean(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ConfigError(key + ": expected true/false, got '" + value + "'");
}

adapters::BackendMode mode(const std::string& key, const std::string& value) {
  if (value == "live") return adapters::BackendMode::live;
  if (value == "mock") return adapters::BackendMode::mock;
  throw ConfigError(key + ": expected live or mock, got '" + value + "'");
}

void parse_listen(GatewayConfig& cfg, const std::string& value) {
  const auto colon = value.rfind(':');
  if (colon == std::string::npos) throw ConfigError("listen_addr: expected host:port, got '" + value + "'");
  cfg.host = value.substr(0, colon);
  if (cfg.host.empty()) cfg.host = "0.0.0.0";
  const int port = number<int>("listen_addr", value.substr(colon + 1));
  if (port < 0 || port > 65535) throw ConfigError("listen_addr: port out of range");
  cfg.port = port;
}

}  // namespace

Settings parse_settings(const std::string& text) {
  Settings out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(n) + ": expected key = value");
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(n) + ": empty key");
    out[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

Settings read_settings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_settings(ss.str());
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = build_keys();
  return keys;
}

void apply_env(Settings& settings, const EnvLookup& env) {
  for (const auto& key : known_keys()) {
    std::string name = "MATRIX_" + key;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
    if (auto v = env(name)) settings[key] = *v;
  }
}

GatewayConfig GatewayConfig::from_settings(const Settings& s) {
  const auto& keys = known_keys();
  for (const auto& [k, v] : s)
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError("unknown config key '" + k + "'");

  auto get = [&](const std::string& k) -> const std::string* {
    auto it = s.find(k);
    return it == s.end() ? nullptr : &it->second;
  };

  GatewayConfig cfg;
  if (auto v = get("listen_addr")) parse_listen(cfg, *v);
  if (auto v = get("data_dir")) cfg.data_dir = *v;
  if (auto v = get("max_upload_bytes")) cfg.max_upload_bytes = number<std::size_t>("max_upload_bytes", *v);
  if (auto v = get("http_threads")) cfg.http_threads = number<std::size_t>("http_threads", *v);

  auto& fb = cfg.backends.fallback;
  if (auto v = get("backend_mode")) fb.mode = mode("backend_mode", *v);
  if (auto v = get("backend_url")) fb.base_url = *v;
  if (auto v = get("backend_timeout_ms")) fb.timeout = std::chrono::milliseconds(number<long>("backend_timeout_ms", *v));
  if (auto v = get("backend_retries")) fb.retries = number<int>("backend_retries", *v);
  for (auto name : kBackendNames) {
    const std::string p = "backend_" + std::string(name);
    if (!get(p + "_mode") && !get(p + "_url") && !get(p + "_timeout_ms") && !get(p + "_retries")) continue;
    adapters::BackendEndpoint ep = fb;
    // A dedicated URL implies a live backend unless a mode says otherwise.
    if (auto v = get(p + "_url")) {
      ep.base_url = *v;
      ep.mode = adapters::BackendMode::live;
    }
    if (auto v = get(p + "_mode")) ep.mode = mode(p + "_mode", *v);
    if (auto v = get(p + "_timeout_ms")) ep.timeout = std::chrono::milliseconds(number<long>(p + "_timeout_ms", *v));
    if (auto v = get(p + "_retries")) ep.retries = number<int>(p + "_retries", *v);
    cfg.backends.endpoints[std::string(name)] = ep;
  }
  if (auto v = get("max_in_flight")) cfg.backends.max_in_flight = number<std::size_t>("max_in_flight", *v);
  if (auto v = get("embed_dimension")) cfg.backends.embed_dimension = number<std::size_t>("embed_dimension", *v);
  if (auto v = get("mock_gen_delay_ms"))
    cfg.backends.mock_generator.delay = std::chrono::milliseconds(number<long>("mock_gen_delay_ms", *v));
  if (auto v = get("gen_timeout_ms"))
    cfg.backends.mock_generator.timeout = std::chrono::milliseconds(number<long>("gen_timeout_ms", *v));
  cfg.backends.mock_generator.max_in_flight = cfg.backends.max_in_flight;

  cfg.store.dimension = cfg.backends.embed_dimension;
  cfg.store.data_dir = cfg.data_dir;
  if (auto v = get("hit_threshold")) cfg.store.hit_threshold = number<double>("hit_threshold", *v);
  if (auto v = get("dedup_threshold")) cfg.store.dedup_threshold = number<double>("dedup_threshold", *v);

  auto& pc = cfg.pipeline;
  if (auto v = get("simplify_target")) pc.simplify.target_vertices = number<std::size_t>("simplify_target", *v);
  if (auto v = get("simplify_passes")) pc.simplify.batch_passes = number<std::size_t>("simplify_passes", *v);
  if (auto v = get("max_offers")) pc.max_offers = number<std::size_t>("max_offers", *v);
  if (auto v = get("recommendations")) pc.recommendations = number<std::size_t>("recommendations", *v);
  if (auto v = get("sampler_steps")) pc.generation.sampling_steps = number<int>("sampler_steps", *v);
  if (auto v = get("persist_store")) pc.persist_store = boolean("persist_store", *v);
  return cfg;
}

void GatewayConfig::validate(bool require_data_dir) const {
  if (require_data_dir && data_dir.empty()) throw ConfigError("data_dir is required");
  if (max_upload_bytes == 0) throw ConfigError("max_upload_bytes must be positive");
  if (http_threads == 0) throw ConfigError("http_threads must be positive");
  if (backends.max_in_flight == 0) throw ConfigError("max_in_flight must be positive");
  try {
    backends.fallback.validate();
    for (const auto& [name, ep] : backends.endpoints) ep.validate();
    store.validate();
    pipeline.simplify.validate();
    pipeline.generation.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (pipeline.max_offers == 0) throw ConfigError("max_offers must be positive");
}

GatewayConfig load_config(const std::optional<std::filesystem::path>& path, const EnvLookup& env) {
  Settings s = path ? read_settings(*path) : Settings{};
  apply_env(s, env);
  return GatewayConfig::from_settings(s);
}

}  // namespace speech3d::gateway
