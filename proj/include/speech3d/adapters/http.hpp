#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "speech3d/adapters/backends.hpp"
#include "speech3d/adapters/mock.hpp"

namespace speech3d::adapters {

// JSON-over-HTTP client for one backend. Up to `max_in_flight` requests run at
// once; the rest wait. A request is tried 1 + retries times in total, within an
// overall budget of max(1, retries) * timeout. 5xx replies, timeouts and
// connection failures are retried; 4xx replies fail at once.
class JsonTransport {
 public:
  JsonTransport(std::string backend, BackendEndpoint endpoint, std::size_t max_in_flight = 4);
  ~JsonTransport();

  // Throws BackendTimeout, BackendError (status 0 for transport failures),
  // UnparseableReply when the reply body is not JSON.
  nlohmann::json post(const std::string& path, const nlohmann::json& body);

  const BackendEndpoint& endpoint() const { return endpoint_; }
  std::size_t peak_in_flight() const;

 private:
  struct Pool;
  std::string backend_;
  BackendEndpoint endpoint_;
  std::unique_ptr<Pool> pool_;
};

// Wire schema helpers, shared with the stub server.
nlohmann::json object_to_json(const ExtractedObject& o);
// Throws UnparseableReply when `j` is not {"name": string, "attrs": {string: string}}.
ExtractedObject object_from_json(const nlohmann::json& j);
// Throws UnparseableReply unless `reply` is {"objects": [object...]}.
std::vector<ExtractedObject> objects_from_reply(const nlohmann::json& reply);

// Fixed instruction sent with every extraction request.
extern const char* const kExtractPromptTemplate;
extern const char* const kRecommendPromptTemplate;

class HttpSpeechToText final : public SpeechToText {
 public:
  HttpSpeechToText(std::shared_ptr<CallLog> log, std::shared_ptr<JsonTransport> t);

 protected:
  TranscriptResult do_transcribe(std::string_view wav, std::string_view hint) override;

 private:
  std::shared_ptr<JsonTransport> t_;
};

class HttpTextToSpeech final : public TextToSpeech {
 public:
  HttpTextToSpeech(std::shared_ptr<CallLog> log, std::shared_ptr<JsonTransport> t);

 protected:
  std::string do_synthesize(std::string_view text, std::string_view lang) override;

 private:
  std::shared_ptr<JsonTransport> t_;
};

// Schema violations get one repair request carrying the parse error.
class HttpObjectExtractor final : public ObjectExtractor {
 public:
  HttpObjectExtractor(std::shared_ptr<CallLog> log, std::shared_ptr<JsonTransport> t);

 protected:
  std::vector<ExtractedObject> do_extract(std::string_view text) override;

 private:
  std::shared_ptr<JsonTransport> t_;
};

class HttpRecommender final : public Recommender {
 public:
  HttpRecommender(std::shared_ptr<CallLog> log, std::shared_ptr<JsonTransport> t);

 protected:
  std::vector<ExtractedObject> do_recommend(const std::vector<ExtractedObject>& context,
                                            const std::vector<std::string>& history,
                                            std::size_t max_n) override;

 private:
  std::shared_ptr<JsonTransport> t_;
};

class HttpModelGenerator final : public ModelGenerator {
 public:
  HttpModelGenerator(std::shared_ptr<CallLog> log, std::shared_ptr<JsonTransport> t);

 protected:
  GeneratedModel do_generate(std::string_view prompt, const GenerationParams& params) override;

 private:
  std::shared_ptr<JsonTransport> t_;
};

class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(std::shared_ptr<CallLog> log, std::shared_ptr<JsonTransport> t, std::size_t dimension);

 protected:
  vectorstore::Embedding do_embed(std::string_view label) override;

 private:
  std::shared_ptr<JsonTransport> t_;
};

struct BackendsConfig {
  // Keyed by backend name (transcribe, tts, extract, recommend, generate, embed).
  // Missing names use `fallback`.
  std::map<std::string, BackendEndpoint> endpoints;
  BackendEndpoint fallback;
  std::size_t embed_dimension = 384;
  std::size_t max_in_flight = 4;
  MockGeneratorConfig mock_generator;
};

// Builds each backend in its configured mode (live -> HTTP client, mock -> mock).
Backends make_backends(const BackendsConfig& cfg);

}  // namespace speech3d::adapters
