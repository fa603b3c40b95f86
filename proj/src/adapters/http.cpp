#include "speech3d/adapters/http.hpp"

#include <algorithm>
#include <thread>

#include <httplib.h>

#include "speech3d/errors.hpp"
#include "speech3d/geometry/obj.hpp"
#include "speech3d/util/base64.hpp"
#include "speech3d/util/semaphore.hpp"

namespace speech3d::adapters {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

const char* const kExtractPromptTemplate =
    "List every physical object the user asks to create in the command below. "
    "Reply with JSON only, exactly {\"objects\": [{\"name\": <singular noun>, \"attrs\": "
    "{<size|shape|color|other>: <text>}}]}. Use an empty list when there is no object.\n"
    "Command: ";

const char* const kRecommendPromptTemplate =
    "Suggest objects that could sit next to the context objects in the same scene. "
    "Do not repeat a context object. Reply with JSON only, exactly {\"objects\": "
    "[{\"name\": <singular noun>, \"attrs\": {}}]}, at most max_n entries.";

struct JsonTransport::Pool {
  explicit Pool(std::size_t cap) : slots(cap) {}
  util::Semaphore slots;
  std::mutex mutex;
  std::vector<std::unique_ptr<httplib::Client>> idle;
};

JsonTransport::JsonTransport(std::string backend, BackendEndpoint endpoint, std::size_t max_in_flight)
    : backend_(std::move(backend)), endpoint_(std::move(endpoint)),
      pool_(std::make_unique<Pool>(max_in_flight)) {
  endpoint_.validate();
  if (endpoint_.base_url.empty()) throw InvalidArgument(backend_ + ": base_url is empty");
}

JsonTransport::~JsonTransport() = default;

std::size_t JsonTransport::peak_in_flight() const { return pool_->slots.peak(); }

json JsonTransport::post(const std::string& path, const json& body) {
  util::SemaphoreGuard slot(pool_->slots);

  std::unique_ptr<httplib::Client> client;
  {
    std::lock_guard lock(pool_->mutex);
    if (!pool_->idle.empty()) {
      client = std::move(pool_->idle.back());
      pool_->idle.pop_back();
    }
  }
  if (!client) client = std::make_unique<httplib::Client>(endpoint_.base_url);
  struct Return {
    Pool& pool;
    std::unique_ptr<httplib::Client>& c;
    ~Return() {
      if (!c) return;
      std::lock_guard lock(pool.mutex);
      pool.idle.push_back(std::move(c));
    }
  } give_back{*pool_, client};

  const int attempts = 1 + endpoint_.retries;
  const auto deadline = Clock::now() + endpoint_.timeout * std::max(1, endpoint_.retries);
  const std::string payload = body.dump();

  bool timed_out = false;
  int last_status = 0;
  std::string last_body;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (remaining.count() <= 0) {
      timed_out = true;
      break;
    }
    const auto budget = std::min(endpoint_.timeout, remaining);
    client->set_connection_timeout(budget);
    client->set_read_timeout(budget);
    client->set_write_timeout(budget);

    auto res = client->Post(path, payload, "application/json");
    if (!res) {
      const auto err = res.error();
      timed_out = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout;
      last_status = 0;
      last_body = httplib::to_string(err);
      // a broken connection is not reused
      client = std::make_unique<httplib::Client>(endpoint_.base_url);
      if (!timed_out) std::this_thread::sleep_for(std::min(std::chrono::milliseconds(20), budget));
      continue;
    }
    timed_out = false;
    last_status = res->status;
    last_body = res->body;
    if (res->status >= 200 && res->status < 300) {
      json reply = json::parse(res->body, nullptr, false);
      if (reply.is_discarded()) throw UnparseableReply(backend_ + ": reply is not JSON");
      return reply;
    }
    if (res->status < 500) throw BackendError(backend_, res->status, res->body);
  }
  if (timed_out) throw BackendTimeout(backend_);
  throw BackendError(backend_, last_status, last_body);
}

// ---- schema ----------------------------------------------------------------

json object_to_json(const ExtractedObject& o) {
  json attrs = json::object();
  for (const auto& [k, v] : o.attributes) attrs[k] = v;
  return {{"name", o.name}, {"attrs", attrs}};
}

ExtractedObject object_from_json(const json& j) {
  if (!j.is_object()) throw UnparseableReply("object entry is not a JSON object");
  auto name = j.find("name");
  if (name == j.end() || !name->is_string() || name->get<std::string>().empty())
    throw UnparseableReply("object entry needs a non-empty string 'name'");
  ExtractedObject o;
  o.name = name->get<std::string>();
  if (auto attrs = j.find("attrs"); attrs != j.end() && !attrs->is_null()) {
    if (!attrs->is_object()) throw UnparseableReply("'attrs' must be an object");
    for (const auto& [k, v] : attrs->items()) {
      if (!v.is_string()) throw UnparseableReply("attribute '" + k + "' is not a string");
      o.attributes[k] = v.get<std::string>();
    }
  }
  return o;
}

std::vector<ExtractedObject> objects_from_reply(const json& reply) {
  if (!reply.is_object()) throw UnparseableReply("reply is not a JSON object");
  auto objects = reply.find("objects");
  if (objects == reply.end() || !objects->is_array())
    throw UnparseableReply("reply lacks an 'objects' array");
  std::vector<ExtractedObject> out;
  for (const auto& j : *objects) out.push_back(object_from_json(j));
  return out;
}

namespace {

const json& field(const json& reply, const char* key, json::value_t type, const std::string& backend) {
  if (!reply.is_object()) throw UnparseableReply(backend + ": reply is not a JSON object");
  auto it = reply.find(key);
  bool ok = it != reply.end();
  if (ok) {
    if (type == json::value_t::number_float)
      ok = it->is_number();
    else
      ok = it->type() == type;
  }
  if (!ok) throw UnparseableReply(backend + ": reply field '" + key + "' missing or mistyped");
  return *it;
}

// One request plus one repair request when the reply breaks the schema.
std::vector<ExtractedObject> post_with_repair(JsonTransport& t, const std::string& path, json body) {
  try {
    return objects_from_reply(t.post(path, body));
  } catch (const UnparseableReply& first) {
    body["repair"] = std::string("previous reply was invalid: ") + first.what() +
                     ". Reply with JSON matching the schema only.";
    json again = t.post(path, body);
    return objects_from_reply(again);
  }
}

}  // namespace

// ---- adapters --------------------------------------------------------------

HttpSpeechToText::HttpSpeechToText(std::shared_ptr<CallLog> log, std::shared_ptr<JsonTransport> t)
    : SpeechToText(std::move(log)), t_(std::move(t)) {}

TranscriptResult HttpSpeechToText::do_transcribe(std::string_view wav, std::string_view hint) {
  wav_duration_seconds(wav);  // format check before anything leaves the process
  json reply = t_->post("/transcribe", {{"audio_b64", util::base64_encode(wav)},
                                        {"src_hint", std::string(hint)}});
  TranscriptResult r;
  r.text_english = field(reply, "text_en", json::value_t::string, "transcribe").get<std::string>();
  r.detected_language = field(reply, "lang", json::value_t::string, "transcribe").get<std::string>();
  return r;
}

HttpTextToSpeech::HttpTextToSpeech(std::shared_ptr<CallLog> log, std::shared_ptr<JsonTransport> t)
    : TextToSpeech(std::move(log)), t_(std::move(t)) {}

std::string HttpTextToSpeech::do_synthesize(std::string_view text, std::string_view lang) {
  json reply = t_->post("/tts", {{"text", std::string(text)}, {"lang", std::string(lang)}});
  const auto& b64 = field(reply, "audio_b64", json::value_t::string, "tts");
  try {
    return util::base64_decode(b64.get<std::string>());
  } catch (const InvalidArgument& e) {
    throw UnparseableReply(std::string("tts: ") + e.what());
  }
}

HttpObjectExtractor::HttpObjectExtractor(std::shared_ptr<CallLog> log, std::shared_ptr<JsonTransport> t)
    : ObjectExtractor(std::move(log)), t_(std::move(t)) {}

std::vector<ExtractedObject> HttpObjectExtractor::do_extract(std::string_view text) {
  json body = {{"text", std::string(text)},
               {"prompt", std::string(kExtractPromptTemplate) + std::string(text)}};
  return post_with_repair(*t_, "/extract", std::move(body));
}

HttpRecommender::HttpRecommender(std::shared_ptr<CallLog> log, std::shared_ptr<JsonTransport> t)
    : Recommender(std::move(log)), t_(std::move(t)) {}

std::vector<ExtractedObject> HttpRecommender::do_recommend(const std::vector<ExtractedObject>& context,
                                                           const std::vector<std::string>& history,
                                                           std::size_t max_n) {
  json ctx = json::array();
  for (const auto& o : context) ctx.push_back(object_to_json(o));
  json body = {{"context", ctx},
               {"history", history},
               {"max_n", max_n},
               {"prompt", kRecommendPromptTemplate}};
  return post_with_repair(*t_, "/recommend", std::move(body));
}

HttpModelGenerator::HttpModelGenerator(std::shared_ptr<CallLog> log, std::shared_ptr<JsonTransport> t)
    : ModelGenerator(std::move(log)), t_(std::move(t)) {}

GeneratedModel HttpModelGenerator::do_generate(std::string_view prompt, const GenerationParams& p) {
  json reply = t_->post("/generate", {{"prompt", std::string(prompt)},
                                      {"steps", p.sampling_steps},
                                      {"sigma_min", p.sigma_min},
                                      {"sigma_max", p.sigma_max},
                                      {"s_churn", p.s_churn}});
  const auto& b64 = field(reply, "obj_b64", json::value_t::string, "generate");
  const auto& ms = field(reply, "duration_ms", json::value_t::number_float, "generate");
  std::string obj;
  try {
    obj = util::base64_decode(b64.get<std::string>());
  } catch (const InvalidArgument& e) {
    throw UnparseableReply(std::string("generate: ") + e.what());
  }
  GeneratedModel out;
  out.mesh = geometry::parse_obj(obj);
  out.duration = std::chrono::milliseconds(static_cast<std::int64_t>(ms.get<double>()));
  return out;
}

HttpEmbedder::HttpEmbedder(std::shared_ptr<CallLog> log, std::shared_ptr<JsonTransport> t,
                           std::size_t dimension)
    : Embedder(std::move(log), dimension), t_(std::move(t)) {}

vectorstore::Embedding HttpEmbedder::do_embed(std::string_view label) {
  json reply = t_->post("/embed", {{"text", std::string(label)}});
  const auto& arr = field(reply, "vector", json::value_t::array, "embed");
  vectorstore::Embedding v;
  v.reserve(arr.size());
  for (const auto& x : arr) {
    if (!x.is_number()) throw UnparseableReply("embed: vector entry is not a number");
    v.push_back(x.get<float>());
  }
  return v;
}

// ---- factory ---------------------------------------------------------------

Backends make_backends(const BackendsConfig& cfg) {
  Backends b = make_mock_backends(cfg.embed_dimension, cfg.mock_generator);
  b.modes.clear();
  auto endpoint_for = [&](std::string_view name) {
    auto it = cfg.endpoints.find(std::string(name));
    return it == cfg.endpoints.end() ? cfg.fallback : it->second;
  };
  auto transport = [&](std::string_view name, const BackendEndpoint& ep) {
    return std::make_shared<JsonTransport>(std::string(name), ep, cfg.max_in_flight);
  };
  for (auto name : {kTranscribe, kTts, kExtract, kRecommend, kGenerate, kEmbed}) {
    const BackendEndpoint ep = endpoint_for(name);
    ep.validate();
    b.modes.emplace_back(std::string(name), ep.mode);
    if (ep.mode != BackendMode::live) continue;
    auto t = transport(name, ep);
    if (name == kTranscribe) b.stt = std::make_shared<HttpSpeechToText>(b.log, t);
    if (name == kTts) b.tts = std::make_shared<HttpTextToSpeech>(b.log, t);
    if (name == kExtract) b.extractor = std::make_shared<HttpObjectExtractor>(b.log, t);
    if (name == kRecommend) b.recommender = std::make_shared<HttpRecommender>(b.log, t);
    if (name == kGenerate) b.generator = std::make_shared<HttpModelGenerator>(b.log, t);
    if (name == kEmbed) b.embedder = std::make_shared<HttpEmbedder>(b.log, t, cfg.embed_dimension);
  }
  return b;
}

}  // namespace speech3d::adapters
