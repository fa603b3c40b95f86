#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "speech3d/adapters/backends.hpp"
#include "speech3d/geometry/measure.hpp"
#include "speech3d/geometry/simplify.hpp"
#include "speech3d/pipeline/events.hpp"
#include "speech3d/pipeline/languages.hpp"
#include "speech3d/pipeline/session.hpp"
#include "speech3d/vectorstore/store.hpp"

namespace speech3d::pipeline {

struct PipelineConfig {
  geometry::SimplifyConfig simplify;
  adapters::GenerationParams generation;
  std::size_t max_offers = 6;        // per menu list
  std::size_t recommendations = 3;   // asked from the recommender
  bool persist_store = true;         // persist after each generated asset when the store has a data_dir
  std::size_t subscriber_buffer = 256;
  std::string welcome_text = "Welcome. Say Matrix and tell me what to create.";
  std::string no_objects_text = "Sorry, I did not find an object in that command.";
  std::string backend_error_text = "Sorry, something went wrong. Please try again.";
  // "{label}" is replaced by the delivered object's label.
  std::string confirmation_text = "Your {label} is ready.";
};

// Either typed text or a 16 kHz mono WAV clip.
struct CommandInput {
  std::optional<std::string> text;
  std::optional<std::string> wav;

  static CommandInput from_text(std::string t) { return {std::move(t), std::nullopt}; }
  static CommandInput from_wav(std::string w) { return {std::nullopt, std::move(w)}; }
};

struct SessionCreated {
  std::string session_id;
  std::string welcome_audio_ref;
};

struct AssetDelivery {
  std::string asset_id;
  std::string label;
  std::string mesh_ref;
  bool from_repository = false;
  geometry::MeshStats stats;
  std::string confirmation_audio_ref;
  MetricsRecord metrics;
};

// Per-session orchestration from command to delivered asset. Each session
// handles one command at a time (later ones wait); sessions run in parallel.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, adapters::Backends backends,
           std::shared_ptr<vectorstore::VectorStore> store,
           LanguageRegistry languages = LanguageRegistry::standard());
  ~Pipeline();

  const PipelineConfig& config() const { return config_; }
  const LanguageRegistry& languages() const { return languages_; }
  const adapters::Backends& backends() const { return backends_; }
  vectorstore::VectorStore& store() { return *store_; }

  // Throws UnsupportedLanguage.
  SessionCreated create_session(const std::string& language);

  // Throws UnknownSession, InvalidState, AudioTooLong, BadAudio,
  // NoObjectsFound, backend errors.
  OfferMenu submit_command(const std::string& session_id, const CommandInput& input);

  // Throws UnknownSession, InvalidState, InvalidChoice, GenerationFailed.
  AssetDelivery select_offer(const std::string& session_id, const std::string& offer_ref);

  // Moves the session along one edge. Throws IllegalTransition.
  void advance_status(const std::string& session_id, StatusState next);

  // Throws UnknownSession, UnknownAsset, NonPositiveScale.
  Placement transform_asset(const std::string& session_id, const std::string& asset_id,
                            const TransformOp& op);

  Session session(const std::string& session_id) const;
  std::vector<std::string> session_ids() const;
  EventBus& events(const std::string& session_id);

  MetricsSummary metrics_summary() const;
  MetricsSummary session_metrics_summary(const std::string& session_id) const;
  std::vector<MetricsRecord> all_metrics() const;

  // Synthesized clips by reference. Empty when unknown.
  std::optional<std::string> audio(const std::string& ref) const;

  // OBJ bytes of a stored asset. Throws UnknownAsset.
  std::string asset_obj(const std::string& asset_id) const;

 private:
  struct Slot;
  std::shared_ptr<Slot> slot(const std::string& id) const;
  void move_to(Slot& s, StatusState next);
  std::string speak(const std::string& text, const std::string& language);

  PipelineConfig config_;
  adapters::Backends backends_;
  std::shared_ptr<vectorstore::VectorStore> store_;
  LanguageRegistry languages_;

  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::uint64_t next_session_ = 1;

  mutable std::mutex audio_mutex_;
  std::map<std::pair<std::string, std::string>, std::string> audio_by_text_;
  std::map<std::string, std::string> audio_;
};

}  // namespace speech3d::pipeline
