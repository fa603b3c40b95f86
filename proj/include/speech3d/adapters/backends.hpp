#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "speech3d/adapters/types.hpp"
#include "speech3d/vectorstore/store.hpp"

namespace speech3d::adapters {

// Stable backend names, used in call logs, env vars and endpoint paths.
inline constexpr std::string_view kTranscribe = "transcribe";
inline constexpr std::string_view kTts = "tts";
inline constexpr std::string_view kExtract = "extract";
inline constexpr std::string_view kRecommend = "recommend";
inline constexpr std::string_view kGenerate = "generate";
inline constexpr std::string_view kEmbed = "embed";

struct CallRecord {
  std::string backend;
  bool ok = true;
  std::chrono::steady_clock::duration elapsed{};
};

// Thread-safe record of every adapter invocation.
class CallLog {
 public:
  void record(CallRecord r);
  std::vector<CallRecord> snapshot() const;
  std::size_t count(std::string_view backend) const;
  std::size_t total() const;
  void clear();

 private:
  mutable std::mutex mutex_;
  std::vector<CallRecord> calls_;
};

// Every adapter checks its preconditions, logs the call and then delegates to
// the do_* implementation (mock or live).
class AdapterBase {
 public:
  explicit AdapterBase(std::shared_ptr<CallLog> log) : log_(std::move(log)) {}
  virtual ~AdapterBase() = default;
  AdapterBase(const AdapterBase&) = delete;
  AdapterBase& operator=(const AdapterBase&) = delete;

 protected:
  template <class F>
  auto logged(std::string_view backend, F&& call) {
    const auto start = std::chrono::steady_clock::now();
    try {
      auto result = call();
      if (log_) log_->record({std::string(backend), true, std::chrono::steady_clock::now() - start});
      return result;
    } catch (...) {
      if (log_) log_->record({std::string(backend), false, std::chrono::steady_clock::now() - start});
      throw;
    }
  }

 private:
  std::shared_ptr<CallLog> log_;
};

class SpeechToText : public AdapterBase {
 public:
  using AdapterBase::AdapterBase;
  // `wav` is a 16 kHz mono 16-bit clip. Throws BadAudio, BackendError,
  // BackendTimeout, UnknownFixture (mock).
  TranscriptResult transcribe(std::string_view wav, std::string_view source_language_hint);

 protected:
  virtual TranscriptResult do_transcribe(std::string_view wav, std::string_view hint) = 0;
};

class TextToSpeech : public AdapterBase {
 public:
  using AdapterBase::AdapterBase;
  // Returns WAV bytes. Throws InvalidArgument for empty text.
  std::string synthesize(std::string_view text, std::string_view target_language);

 protected:
  virtual std::string do_synthesize(std::string_view text, std::string_view lang) = 0;
};

class ObjectExtractor : public AdapterBase {
 public:
  using AdapterBase::AdapterBase;
  // Every returned object is normalized. Throws InvalidArgument for empty text.
  std::vector<ExtractedObject> extract(std::string_view command_text);

 protected:
  virtual std::vector<ExtractedObject> do_extract(std::string_view text) = 0;
};

class Recommender : public AdapterBase {
 public:
  using AdapterBase::AdapterBase;
  // At most max_n suggestions, none naming a context object.
  std::vector<ExtractedObject> recommend(const std::vector<ExtractedObject>& context,
                                         const std::vector<std::string>& history, std::size_t max_n);

 protected:
  virtual std::vector<ExtractedObject> do_recommend(const std::vector<ExtractedObject>& context,
                                                    const std::vector<std::string>& history,
                                                    std::size_t max_n) = 0;
};

class ModelGenerator : public AdapterBase {
 public:
  using AdapterBase::AdapterBase;
  GeneratedModel generate(std::string_view prompt, const GenerationParams& params);

 protected:
  virtual GeneratedModel do_generate(std::string_view prompt, const GenerationParams& params) = 0;
};

class Embedder : public AdapterBase {
 public:
  Embedder(std::shared_ptr<CallLog> log, std::size_t dimension)
      : AdapterBase(std::move(log)), dimension_(dimension) {}
  std::size_t dimension() const { return dimension_; }
  // Throws DimensionMismatch when the backend returns the wrong width.
  vectorstore::Embedding embed(std::string_view label);

 protected:
  virtual vectorstore::Embedding do_embed(std::string_view label) = 0;

 private:
  std::size_t dimension_;
};

struct Backends {
  std::shared_ptr<SpeechToText> stt;
  std::shared_ptr<TextToSpeech> tts;
  std::shared_ptr<ObjectExtractor> extractor;
  std::shared_ptr<Recommender> recommender;
  std::shared_ptr<ModelGenerator> generator;
  std::shared_ptr<Embedder> embedder;
  std::shared_ptr<CallLog> log;
  // Mode per backend name, for health reports.
  std::vector<std::pair<std::string, BackendMode>> modes;
};

}  // namespace speech3d::adapters
