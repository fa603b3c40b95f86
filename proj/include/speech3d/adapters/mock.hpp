#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "speech3d/adapters/backends.hpp"
#include "speech3d/adapters/wav.hpp"
#include "speech3d/util/semaphore.hpp"

namespace speech3d::adapters {

// ---- speech fixtures -------------------------------------------------------

struct Fixture {
  std::string name;         // e.g. "red-apple-en"
  std::string native_text;  // what the speaker said
  std::string language;
  std::string english;      // paired translation
};

const std::vector<Fixture>& fixtures();

// Deterministic clip for a fixture name (also works for names outside the
// table, which the mock recognizer then rejects).
PcmClip fixture_clip(const std::string& name);
std::string fixture_wav(const std::string& name);

// FNV-1a over the little-endian sample bytes.
std::uint64_t clip_fingerprint(const PcmClip& clip);

class MockSpeechToText final : public SpeechToText {
 public:
  explicit MockSpeechToText(std::shared_ptr<CallLog> log);

 protected:
  TranscriptResult do_transcribe(std::string_view wav, std::string_view hint) override;

 private:
  std::vector<std::pair<std::uint64_t, const Fixture*>> by_print_;
};

// ---- text to speech --------------------------------------------------------

inline constexpr int kBeepMillisPerChar = 10;

// 440 Hz beep lasting 10 ms per UTF-8 code point of `text`.
std::string beep_wav(std::string_view text);

class MockTextToSpeech final : public TextToSpeech {
 public:
  using TextToSpeech::TextToSpeech;
  // (text, lang) of every request, oldest first.
  std::vector<std::pair<std::string, std::string>> requests() const;

 protected:
  std::string do_synthesize(std::string_view text, std::string_view lang) override;

 private:
  mutable std::mutex mutex_;
  std::vector<std::pair<std::string, std::string>> requests_;
};

// ---- language model --------------------------------------------------------

// Rule-based extraction over the lexicon: attribute words attach to the next
// noun; plurals are singularized.
std::vector<ExtractedObject> lexicon_extract(std::string_view text);

// Complement table lookup; history labels sink to the end of the list.
std::vector<ExtractedObject> complement_recommend(const std::vector<ExtractedObject>& context,
                                                  const std::vector<std::string>& history,
                                                  std::size_t max_n);

class MockObjectExtractor final : public ObjectExtractor {
 public:
  using ObjectExtractor::ObjectExtractor;

 protected:
  std::vector<ExtractedObject> do_extract(std::string_view text) override;
};

class MockRecommender final : public Recommender {
 public:
  using Recommender::Recommender;

 protected:
  std::vector<ExtractedObject> do_recommend(const std::vector<ExtractedObject>& context,
                                            const std::vector<std::string>& history,
                                            std::size_t max_n) override;
};

// ---- text to 3D ------------------------------------------------------------

struct MockGeneratorConfig {
  std::chrono::milliseconds delay{0};
  std::chrono::milliseconds timeout{60'000};
  std::size_t max_in_flight = 4;
};

// Prompt-hashed UV sphere, 13,122 to 14,708 vertices.
geometry::TriMesh procedural_model(std::string_view prompt);

class MockModelGenerator final : public ModelGenerator {
 public:
  MockModelGenerator(std::shared_ptr<CallLog> log, MockGeneratorConfig cfg = {});
  const MockGeneratorConfig& config() const { return cfg_; }
  std::size_t peak_in_flight() const { return slots_.peak(); }

 protected:
  GeneratedModel do_generate(std::string_view prompt, const GenerationParams& params) override;

 private:
  MockGeneratorConfig cfg_;
  util::Semaphore slots_;
};

// ---- embedder --------------------------------------------------------------

// Lexicon words get mutually orthogonal directions (when the dimension allows).
// A label embeds as the normalized sum of its token vectors: nouns weight 1,
// attributes 0.45, stopwords 0, unknown tokens a hash-seeded direction of
// weight 1. A synonym embeds as its canonical noun plus 0.2 of its own
// direction. Identical labels always give identical vectors.
class MockEmbedder final : public Embedder {
 public:
  MockEmbedder(std::shared_ptr<CallLog> log, std::size_t dimension = 384);

 protected:
  vectorstore::Embedding do_embed(std::string_view label) override;

 private:
  std::vector<double> direction(const std::string& token) const;

  std::vector<std::pair<std::string, std::vector<double>>> basis_;
};

inline constexpr double kAttributeWeight = 0.45;
inline constexpr double kSynonymOwnWeight = 0.2;

// All six backends as mocks sharing one call log.
Backends make_mock_backends(std::size_t embed_dimension = 384, MockGeneratorConfig gen = {});

}  // namespace speech3d::adapters
