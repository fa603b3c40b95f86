#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "speech3d/adapters/http.hpp"
#include "speech3d/gateway/config.hpp"
#include "speech3d/pipeline/pipeline.hpp"

namespace speech3d::gateway {

// What /v1/healthz reports for one backend. Live ones are probed with GET
// <base_url>/healthz.
struct HealthTarget {
  std::string name;
  adapters::BackendMode mode = adapters::BackendMode::mock;
  std::string base_url;
};

std::vector<HealthTarget> health_targets(const adapters::BackendsConfig& cfg);

struct ServerOptions {
  std::size_t max_upload_bytes = 1 << 20;
  std::size_t threads = 32;
  std::vector<HealthTarget> health;
  std::chrono::milliseconds stream_poll{200};
  std::chrono::milliseconds health_timeout{1000};
};

// {"op": {"type": "move", "delta": [x, y, z]}}
// {"op": {"type": "scale", "factor": f}} or "factors": [x, y, z]
// {"op": {"type": "rotate", "axis": [x, y, z], "angle_rad": a}} or "angle_deg"
// Throws InvalidArgument.
pipeline::TransformOp parse_transform_op(const nlohmann::json& body);

// Store and pipeline built from a config. The store is loaded from data_dir
// when it holds one.
struct App {
  std::shared_ptr<vectorstore::VectorStore> store;
  std::shared_ptr<pipeline::Pipeline> pipeline;
  ServerOptions server;
};

App make_app(const GatewayConfig& cfg);

// HTTP surface over one pipeline. Routes:
//   POST /v1/sessions                          {language}
//   GET  /v1/languages
//   POST /v1/sessions/{id}/command             JSON {text} | {audio_b64}, multipart "audio", or audio/wav body
//   POST /v1/sessions/{id}/select              {offer_ref}
//   GET  /v1/sessions/{id}
//   GET  /v1/sessions/{id}/events?after=N&follow=0|1   NDJSON
//   POST /v1/sessions/{id}/assets/{aid}/transform     {op}
//   GET  /v1/assets/{id}.obj
//   GET  /v1/audio/{ref}.wav
//   GET  /v1/metrics
//   GET  /v1/healthz
class Server {
 public:
  Server(std::shared_ptr<pipeline::Pipeline> pipeline, ServerOptions options = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Port 0 picks a free port. Returns the bound port. Throws ConfigError.
  int bind(const std::string& host, int port);
  // Blocks until stop(). Requires bind().
  void run();
  // bind() plus run() on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();

  int port() const;
  std::string base_url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace speech3d::gateway
