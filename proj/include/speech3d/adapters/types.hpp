#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "speech3d/geometry/mesh.hpp"

namespace speech3d::adapters {

struct TranscriptResult {
  std::string text_english;
  std::string detected_language;
  bool was_translated = false;  // == (detected_language != "en")
};

// Attribute keys are limited to size, shape, color and other.
struct ExtractedObject {
  std::string name;  // singular noun, lowercase
  std::map<std::string, std::string> attributes;

  friend bool operator==(const ExtractedObject&, const ExtractedObject&) = default;
};

bool is_attribute_key(const std::string& key);

// "large round red apple": size, shape, color, other, then the name.
std::string label_of(const ExtractedObject& object);

// Lowercases and trims the name, drops empty attribute values and folds
// unknown attribute keys into "other". Throws InvalidArgument for an empty name.
ExtractedObject normalized(ExtractedObject object);

// Sampler settings forwarded to the text-to-3D backend.
struct GenerationParams {
  int sampling_steps = 64;
  double sigma_min = 1e-3;
  double sigma_max = 160.0;
  double s_churn = 0.0;

  void validate() const;
};

enum class BackendMode { live, mock };

const char* to_string(BackendMode mode);
BackendMode backend_mode_from_string(const std::string& s);

struct BackendEndpoint {
  std::string base_url;
  std::chrono::milliseconds timeout{10'000};
  int retries = 1;  // at most 3
  BackendMode mode = BackendMode::mock;

  void validate() const;
};

struct GeneratedModel {
  geometry::TriMesh mesh;
  std::chrono::milliseconds duration{0};
};

}  // namespace speech3d::adapters
