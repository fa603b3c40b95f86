#include "speech3d/adapters/stub_server.hpp"

#include <httplib.h>

#include "speech3d/adapters/http.hpp"
#include "speech3d/errors.hpp"
#include "speech3d/geometry/obj.hpp"
#include "speech3d/util/base64.hpp"

namespace speech3d::adapters {

using nlohmann::json;

BackendStubServer::BackendStubServer(std::size_t embed_dimension, MockGeneratorConfig gen)
    : mocks_(make_mock_backends(embed_dimension, gen)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

BackendStubServer::~BackendStubServer() { stop(); }

int BackendStubServer::start(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    if (!server_->bind_to_port(host, port)) port_ = -1;
    else port_ = port;
  }
  if (port_ <= 0) throw ConfigError("cannot bind backend stub to " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

bool BackendStubServer::listen(const std::string& host, int port) {
  port_ = port;
  return server_->listen(host, port);
}

void BackendStubServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string BackendStubServer::base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

void BackendStubServer::inject(const std::string& route, Fault fault) {
  std::lock_guard lock(mutex_);
  faults_[route].push_back({std::move(fault), std::nullopt});
}

void BackendStubServer::inject_body(const std::string& route, std::string raw_json_body) {
  std::lock_guard lock(mutex_);
  faults_[route].push_back({Fault{}, std::move(raw_json_body)});
}

void BackendStubServer::clear_faults() {
  std::lock_guard lock(mutex_);
  faults_.clear();
}

std::vector<std::pair<std::string, json>> BackendStubServer::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::size_t BackendStubServer::request_count(const std::string& route) const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [r, body] : requests_) n += r == route;
  return n;
}

std::optional<BackendStubServer::Canned> BackendStubServer::next_fault(const std::string& route) {
  std::lock_guard lock(mutex_);
  auto it = faults_.find(route);
  if (it == faults_.end() || it->second.empty()) return std::nullopt;
  Canned c = std::move(it->second.front());
  it->second.pop_front();
  return c;
}

namespace {

json objects_json(const std::vector<ExtractedObject>& objects) {
  json arr = json::array();
  for (const auto& o : objects) arr.push_back(object_to_json(o));
  return {{"objects", arr}};
}

std::string str(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string()) throw InvalidArgument(std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

}  // namespace

void BackendStubServer::install_routes() {
  using Handler = std::function<json(const json&)>;
  auto route = [this](const std::string& name, Handler handler) {
    server_->Post("/" + name, [this, name, handler](const httplib::Request& req, httplib::Response& res) {
      json body = json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object()) {
        res.status = 400;
        res.set_content(R"({"error":"bad_request"})", "application/json");
        return;
      }
      {
        std::lock_guard lock(mutex_);
        requests_.emplace_back(name, body);
      }
      if (auto canned = next_fault(name)) {
        if (canned->fault.delay.count() > 0) std::this_thread::sleep_for(canned->fault.delay);
        if (canned->body) {
          res.status = 200;
          res.set_content(*canned->body, "application/json");
          return;
        }
        if (!canned->fault.pass_through) {
          res.status = canned->fault.status;
          res.set_content(canned->fault.body, "text/plain");
          return;
        }
      }
      try {
        res.status = 200;
        res.set_content(handler(body).dump(), "application/json");
      } catch (const Error& e) {
        res.status = 422;
        res.set_content(json{{"error", e.code()}, {"message", e.what()}}.dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(json{{"error", "bad_request"}, {"message", e.what()}}.dump(), "application/json");
      }
    });
  };

  route("transcribe", [this](const json& b) {
    const std::string wav = util::base64_decode(str(b, "audio_b64"));
    const std::string hint = b.value("src_hint", std::string());
    auto r = mocks_.stt->transcribe(wav, hint);
    return json{{"text_en", r.text_english}, {"lang", r.detected_language}, {"translated", r.was_translated}};
  });
  route("tts", [this](const json& b) {
    return json{{"audio_b64", util::base64_encode(mocks_.tts->synthesize(str(b, "text"), b.value("lang", std::string("en"))))}};
  });
  route("extract", [this](const json& b) { return objects_json(mocks_.extractor->extract(str(b, "text"))); });
  route("recommend", [this](const json& b) {
    std::vector<ExtractedObject> context;
    for (const auto& j : b.value("context", json::array())) context.push_back(object_from_json(j));
    std::vector<std::string> history = b.value("history", std::vector<std::string>{});
    const auto max_n = b.value("max_n", std::size_t{6});
    return objects_json(mocks_.recommender->recommend(context, history, max_n));
  });
  route("generate", [this](const json& b) {
    GenerationParams p;
    p.sampling_steps = b.value("steps", p.sampling_steps);
    p.sigma_min = b.value("sigma_min", p.sigma_min);
    p.sigma_max = b.value("sigma_max", p.sigma_max);
    p.s_churn = b.value("s_churn", p.s_churn);
    auto model = mocks_.generator->generate(str(b, "prompt"), p);
    return json{{"obj_b64", util::base64_encode(geometry::write_obj(model.mesh))},
                {"duration_ms", model.duration.count()}};
  });
  route("embed", [this](const json& b) {
    auto v = mocks_.embedder->embed(str(b, "text"));
    return json{{"vector", v}};
  });
  server_->Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"ok":true})", "application/json");
  });
}

}  // namespace speech3d::adapters
