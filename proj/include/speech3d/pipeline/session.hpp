#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "speech3d/adapters/types.hpp"
#include "speech3d/geometry/vec3.hpp"
#include "speech3d/pipeline/status.hpp"
#include "speech3d/vectorstore/store.hpp"

namespace speech3d::pipeline {

// A requested or recommended object, embedded for dedup and search.
struct OfferItem {
  adapters::ExtractedObject object;
  std::string label;
  vectorstore::Embedding embedding;
};

// Each list holds at most max_offers entries. Across all three lists no two
// entries reach the dedup threshold.
struct OfferMenu {
  std::vector<OfferItem> requested;
  std::vector<OfferItem> recommended;
  std::vector<vectorstore::SearchHit> repository;

  bool empty() const { return requested.empty() && recommended.empty() && repository.empty(); }
  std::size_t size() const { return requested.size() + recommended.size() + repository.size(); }
};

// Offer references look like "requested:0", "recommended:2", "repository:1".
struct OfferRef {
  enum class List { requested, recommended, repository } list;
  std::size_t index = 0;

  std::string to_string() const;
  // Throws InvalidChoice on malformed text.
  static OfferRef parse(const std::string& text);
};

struct Quaternion {
  double w = 1, x = 0, y = 0, z = 0;
};

struct Placement {
  geometry::Vec3 position{0, 0, 0};
  geometry::Vec3 scale{1, 1, 1};
  Quaternion orientation;
};

struct MoveOp {
  geometry::Vec3 delta;
};
// Per-axis factors; a uniform resize uses the same factor three times.
struct ScaleOp {
  geometry::Vec3 factors{1, 1, 1};
};
struct RotateOp {
  geometry::Vec3 axis{0, 0, 1};
  double angle_radians = 0;
};
using TransformOp = std::variant<MoveOp, ScaleOp, RotateOp>;

// Throws NonPositiveScale, InvalidArgument (zero rotation axis).
Placement transformed(const Placement& p, const TransformOp& op);
TransformOp inverse(const TransformOp& op);

enum class TaskKind { generate, retrieve, customize };
const char* to_string(TaskKind k);

struct MetricsRecord {
  TaskKind task_kind = TaskKind::generate;
  std::string asset_id;
  std::string label;
  double completion_time = 0;  // seconds, command receipt -> task done
  bool success = true;         // delivered without a system error on the way
  int error_count = 0;         // system errors (backend failures) during the task
  int user_retries = 0;        // commands that found no object
  double responsiveness = 0;   // seconds, selection receipt -> asset ready
  std::size_t mesh_file_size = 0;
  std::map<std::string, double> stage_timings;  // seconds

  double stage_total() const;
  double overhead() const { return completion_time - stage_total(); }
};

struct MetricsSummary {
  std::size_t tasks = 0;
  double mean_completion_time = 0;
  double success_rate = 0;  // percent
  double error_rate = 0;    // errors per task
  double mean_responsiveness = 0;
  double mean_mesh_size_bytes = 0;  // over tasks that delivered a mesh
  double mean_overhead = 0;
  double max_overhead = 0;
  std::size_t generation_calls = 0;  // tasks served by the generation path
};

MetricsSummary summarize(const std::vector<MetricsRecord>& records);

struct StatusChange {
  StatusState status;
  std::int64_t at_ms = 0;
};

// Read-only copy of a session.
struct Session {
  std::string id;
  std::string language;
  StatusState status = StatusState::Welcome;
  std::optional<OfferMenu> pending_offers;
  std::vector<std::string> placed_assets;
  std::map<std::string, Placement> placements;
  std::vector<MetricsRecord> metrics;
  std::vector<StatusChange> transitions;
  std::int64_t created_at = 0;
  std::string welcome_audio_ref;
  std::string last_notice_audio_ref;
};

// JSON views used by the gateway and event stream.
nlohmann::json to_json(const OfferMenu& menu);
nlohmann::json to_json(const Placement& p);
nlohmann::json to_json(const MetricsRecord& r);
nlohmann::json to_json(const MetricsSummary& s);
nlohmann::json to_json(const adapters::ExtractedObject& o);

}  // namespace speech3d::pipeline
