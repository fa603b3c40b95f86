#include "speech3d/gateway/server.hpp"

#include <httplib.h>

#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "speech3d/errors.hpp"
#include "speech3d/gateway/api_error.hpp"
#include "speech3d/util/base64.hpp"

namespace speech3d::gateway {

using nlohmann::json;
using pipeline::Pipeline;

std::vector<HealthTarget> health_targets(const adapters::BackendsConfig& cfg) {
  std::vector<HealthTarget> out;
  for (auto name : {adapters::kTranscribe, adapters::kTts, adapters::kExtract, adapters::kRecommend,
                    adapters::kGenerate, adapters::kEmbed}) {
    auto it = cfg.endpoints.find(std::string(name));
    const auto& ep = it == cfg.endpoints.end() ? cfg.fallback : it->second;
    out.push_back({std::string(name), ep.mode, ep.base_url});
  }
  return out;
}

namespace {

geometry::Vec3 vec3(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_array() || it->size() != 3)
    throw InvalidArgument(std::string("'") + key + "' must be an array of three numbers");
  for (const auto& v : *it)
    if (!v.is_number()) throw InvalidArgument(std::string("'") + key + "' must be an array of three numbers");
  return {(*it)[0].get<double>(), (*it)[1].get<double>(), (*it)[2].get<double>()};
}

double num(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) throw InvalidArgument(std::string("'") + key + "' must be a number");
  return it->get<double>();
}

}  // namespace

pipeline::TransformOp parse_transform_op(const json& body) {
  if (!body.is_object() || !body.contains("op") || !body["op"].is_object())
    throw InvalidArgument("body needs an 'op' object");
  const json& op = body["op"];
  const std::string type = op.value("type", std::string());
  if (type == "move") return pipeline::MoveOp{vec3(op, "delta")};
  if (type == "scale") {
    if (op.contains("factors")) return pipeline::ScaleOp{vec3(op, "factors")};
    const double f = num(op, "factor");
    return pipeline::ScaleOp{{f, f, f}};
  }
  if (type == "rotate") {
    const double angle = op.contains("angle_deg") ? num(op, "angle_deg") * std::numbers::pi / 180.0 : num(op, "angle_rad");
    return pipeline::RotateOp{vec3(op, "axis"), angle};
  }
  throw InvalidArgument("op type must be move, scale or rotate");
}

App make_app(const GatewayConfig& cfg) {
  App app;
  auto backends = adapters::make_backends(cfg.backends);
  app.store = cfg.store.data_dir.empty() ? std::make_shared<vectorstore::VectorStore>(cfg.store)
                                         : std::shared_ptr<vectorstore::VectorStore>(vectorstore::VectorStore::load(cfg.store));
  app.pipeline = std::make_shared<Pipeline>(cfg.pipeline, std::move(backends), app.store);
  app.server.max_upload_bytes = cfg.max_upload_bytes;
  app.server.threads = cfg.http_threads;
  app.server.health = health_targets(cfg.backends);
  return app;
}

struct Server::Impl {
  std::shared_ptr<Pipeline> pipe;
  ServerOptions opts;
  httplib::Server http;
  std::thread thread;
  int port = -1;
  std::string host;
  std::shared_ptr<std::atomic<bool>> stopping = std::make_shared<std::atomic<bool>>(false);

  void install();
};

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const ApiError& e, json extra = json::object()) {
  json body = e.to_json();
  for (auto& [k, v] : extra.items()) body[k] = v;
  send_json(res, e.http_status, body);
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw ApiError{"bad_request", "body must be a JSON object", 400};
  return body;
}

// Runs a handler, turning exceptions into error bodies.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const ApiError& e) {
    send_error(res, e);
  } catch (const std::exception& e) {
    send_error(res, to_api_error(e));
  }
}

pipeline::CommandInput command_input(const httplib::Request& req) {
  if (req.is_multipart_form_data()) {
    if (req.has_file("audio")) return pipeline::CommandInput::from_wav(req.get_file_value("audio").content);
    if (req.has_file("text")) return pipeline::CommandInput::from_text(req.get_file_value("text").content);
    throw ApiError{"bad_request", "multipart body needs an 'audio' or 'text' part", 400};
  }
  const std::string type = req.get_header_value("Content-Type");
  if (type.starts_with("audio/") || type.starts_with("application/octet-stream"))
    return pipeline::CommandInput::from_wav(req.body);
  json body = parse_body(req);
  if (body.contains("text") && body["text"].is_string()) return pipeline::CommandInput::from_text(body["text"].get<std::string>());
  if (body.contains("audio_b64") && body["audio_b64"].is_string()) {
    try {
      return pipeline::CommandInput::from_wav(util::base64_decode(body["audio_b64"].get<std::string>()));
    } catch (const std::exception&) {
      throw ApiError{"bad_request", "audio_b64 is not valid base64", 400};
    }
  }
  throw ApiError{"bad_request", "body needs 'text' or 'audio_b64'", 400};
}

json session_json(const pipeline::Session& s, std::uint64_t last_seq) {
  json placements = json::object();
  for (const auto& [id, p] : s.placements) placements[id] = pipeline::to_json(p);
  return {{"session_id", s.id},
          {"language", s.language},
          {"status", pipeline::to_string(s.status)},
          {"offers", s.pending_offers ? pipeline::to_json(*s.pending_offers) : json(nullptr)},
          {"placed_assets", s.placed_assets},
          {"placements", placements},
          {"welcome_audio_ref", s.welcome_audio_ref},
          {"last_event_seq", last_seq}};
}

std::string audio_url(const std::string& ref) { return ref.empty() ? "" : "/v1/audio/" + ref + ".wav"; }

std::uint64_t query_u64(const httplib::Request& req, const char* key, std::uint64_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string v = req.get_param_value(key);
  try {
    std::size_t used = 0;
    const auto n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ApiError{"bad_request", std::string("query parameter '") + key + "' must be a non-negative integer", 400};
  }
}

}  // namespace

void Server::Impl::install() {
  http.set_payload_max_length(opts.max_upload_bytes);
  const std::size_t threads = opts.threads;
  http.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };

  http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
    if (res.status == 404) send_error(res, {"not_found", "no such route", 404});
    else if (res.status == 413) send_error(res, {"payload_too_large", "request body is too large", 413});
    else send_error(res, {"bad_request", "request could not be handled", res.status});
    return httplib::Server::HandlerResponse::Handled;
  });
  http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send_error(res, to_api_error(e));
    } catch (...) {
      send_error(res, {"internal", "unknown error", 500});
    }
  });

  auto pipe = this->pipe;

  http.Post("/v1/sessions", [pipe](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json body = parse_body(req);
      if (!body.contains("language") || !body["language"].is_string())
        throw ApiError{"bad_request", "body needs a 'language' string", 400};
      auto created = pipe->create_session(body["language"].get<std::string>());
      send_json(res, 201,
                {{"session_id", created.session_id},
                 {"welcome_audio_ref", created.welcome_audio_ref},
                 {"welcome_audio_url", audio_url(created.welcome_audio_ref)}});
    });
  });

  http.Get("/v1/languages", [pipe](const httplib::Request&, httplib::Response& res) {
    json entries = json::array();
    for (const auto& e : pipe->languages().entries()) entries.push_back({{"tag", e.tag}, {"name", e.display_name}});
    send_json(res, 200, {{"entries", entries}, {"count", entries.size()}});
  });

  http.Get(R"(/v1/sessions/([A-Za-z0-9_-]+))", [pipe](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      auto snap = pipe->session(id);
      send_json(res, 200, session_json(snap, pipe->events(id).last_seq()));
    });
  });

  http.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/command)", [pipe](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    try {
      auto menu = pipe->submit_command(id, command_input(req));
      send_json(res, 200, {{"session_id", id}, {"status", "Offers"}, {"offers", pipeline::to_json(menu)}});
    } catch (const ApiError& e) {
      send_error(res, e);
    } catch (const NoObjectsFound& e) {
      std::string ref;
      try {
        ref = pipe->session(id).last_notice_audio_ref;
      } catch (const std::exception&) {
      }
      send_error(res, to_api_error(e), {{"notice_audio_ref", ref}, {"notice_audio_url", audio_url(ref)}});
    } catch (const std::exception& e) {
      send_error(res, to_api_error(e));
    }
  });

  http.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/select)", [pipe](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      json body = parse_body(req);
      if (!body.contains("offer_ref") || !body["offer_ref"].is_string())
        throw ApiError{"bad_request", "body needs an 'offer_ref' string", 400};
      auto d = pipe->select_offer(id, body["offer_ref"].get<std::string>());
      send_json(res, 200,
                {{"asset_id", d.asset_id},
                 {"label", d.label},
                 {"mesh_url", "/v1/assets/" + d.asset_id + ".obj"},
                 {"from_repository", d.from_repository},
                 {"stats",
                  {{"vertices", d.stats.vertex_count},
                   {"faces", d.stats.face_count},
                   {"bytes", d.stats.serialized_size},
                   {"bbox_diagonal", d.stats.bbox_diagonal}}},
                 {"confirmation_audio_ref", d.confirmation_audio_ref},
                 {"confirmation_audio_url", audio_url(d.confirmation_audio_ref)},
                 {"metrics", pipeline::to_json(d.metrics)}});
    });
  });

  http.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/assets/([A-Za-z0-9_-]+)/transform)",
            [pipe](const httplib::Request& req, httplib::Response& res) {
              guarded(res, [&] {
                const std::string id = req.matches[1];
                const std::string aid = req.matches[2];
                auto op = parse_transform_op(parse_body(req));
                auto p = pipe->transform_asset(id, aid, op);
                send_json(res, 200, {{"asset_id", aid}, {"placement", pipeline::to_json(p)}});
              });
            });

  auto stopping = this->stopping;
  const auto poll = opts.stream_poll;
  http.Get(R"(/v1/sessions/([A-Za-z0-9_-]+)/events)", [pipe, stopping, poll](const httplib::Request& req,
                                                                             httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      const auto after = query_u64(req, "after", 0);
      const bool follow = query_u64(req, "follow", 1) != 0;
      pipeline::EventBus& bus = pipe->events(id);
      res.status = 200;
      if (!follow) {
        std::string out;
        for (const auto& e : bus.history(after)) out += e.to_json().dump() + "\n";
        res.set_content(out, "application/x-ndjson");
        return;
      }
      auto sub = bus.subscribe(after, pipe->config().subscriber_buffer);
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "application/x-ndjson",
          [sub, stopping, poll](std::size_t, httplib::DataSink& sink) {
            if (stopping->load() || sub->closed()) {
              sink.done();
              return true;
            }
            if (!sink.is_writable()) return false;
            if (auto e = sub->next(poll)) {
              const std::string line = e->to_json().dump() + "\n";
              if (!sink.write(line.data(), line.size())) return false;
            }
            return true;
          },
          [pipe, id, sub](bool) {
            try {
              pipe->events(id).unsubscribe(sub);
            } catch (const std::exception&) {
            }
          });
    });
  });

  http.Get(R"(/v1/assets/([A-Za-z0-9_-]+)\.obj)", [pipe](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      res.status = 200;
      res.set_content(pipe->asset_obj(req.matches[1]), "model/obj");
    });
  });

  http.Get(R"(/v1/audio/([A-Za-z0-9_-]+)\.wav)", [pipe](const httplib::Request& req, httplib::Response& res) {
    auto clip = pipe->audio(req.matches[1]);
    if (!clip) return send_error(res, {"not_found", "unknown audio reference", 404});
    res.status = 200;
    res.set_content(*clip, "audio/wav");
  });

  http.Get("/v1/metrics", [pipe](const httplib::Request&, httplib::Response& res) {
    json records = json::array();
    for (const auto& r : pipe->all_metrics()) records.push_back(pipeline::to_json(r));
    send_json(res, 200, {{"summary", pipeline::to_json(pipe->metrics_summary())}, {"records", records}});
  });

  auto targets = opts.health;
  const auto health_timeout = opts.health_timeout;
  http.Get("/v1/healthz", [targets, health_timeout](const httplib::Request&, httplib::Response& res) {
    json backends = json::array();
    bool all_mock = true, all_ok = true;
    for (const auto& t : targets) {
      bool reachable = true;
      if (t.mode == adapters::BackendMode::live) {
        all_mock = false;
        httplib::Client cli(t.base_url);
        cli.set_connection_timeout(health_timeout);
        cli.set_read_timeout(health_timeout);
        auto r = cli.Get("/healthz");
        reachable = r && r->status == 200;
      }
      all_ok = all_ok && reachable;
      backends.push_back({{"name", t.name},
                          {"mode", adapters::to_string(t.mode)},
                          {"base_url", t.base_url},
                          {"reachable", reachable}});
    }
    send_json(res, 200, {{"status", all_ok ? "ok" : "degraded"}, {"all_mock", all_mock}, {"backends", backends}});
  });
}

Server::Server(std::shared_ptr<Pipeline> pipeline, ServerOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->pipe = std::move(pipeline);
  impl_->opts = std::move(options);
  impl_->install();
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  impl_->host = host;
  if (port == 0) {
    impl_->port = impl_->http.bind_to_any_port(host);
  } else {
    impl_->port = impl_->http.bind_to_port(host, port) ? port : -1;
  }
  if (impl_->port <= 0) throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
  return impl_->port;
}

void Server::run() { impl_->http.listen_after_bind(); }

int Server::start(const std::string& host, int port) {
  const int p = bind(host, port);
  impl_->thread = std::thread([this] { run(); });
  impl_->http.wait_until_ready();
  return p;
}

void Server::stop() {
  if (!impl_) return;
  impl_->stopping->store(true);
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int Server::port() const { return impl_->port; }

std::string Server::base_url() const {
  const std::string h = impl_->host.empty() || impl_->host == "0.0.0.0" ? "127.0.0.1" : impl_->host;
  return "http://" + h + ":" + std::to_string(impl_->port);
}

}  // namespace speech3d::gateway
