#include "speech3d/adapters/types.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include "speech3d/errors.hpp"

namespace speech3d::adapters {

namespace {

constexpr std::array<const char*, 4> kAttributeOrder = {"size", "shape", "color", "other"};

std::string trim_lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  // collapse inner whitespace runs
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

bool is_attribute_key(const std::string& key) {
  return std::find_if(kAttributeOrder.begin(), kAttributeOrder.end(),
                      [&](const char* k) { return key == k; }) != kAttributeOrder.end();
}

std::string label_of(const ExtractedObject& object) {
  std::string label;
  for (const char* key : kAttributeOrder) {
    auto it = object.attributes.find(key);
    if (it == object.attributes.end() || it->second.empty()) continue;
    label += it->second;
    label += ' ';
  }
  return label + object.name;
}

ExtractedObject normalized(ExtractedObject object) {
  ExtractedObject out;
  out.name = trim_lower(std::move(object.name));
  if (out.name.empty()) throw InvalidArgument("extracted object has an empty name");
  for (auto& [key, value] : object.attributes) {
    std::string k = trim_lower(key);
    std::string v = trim_lower(value);
    if (v.empty()) continue;
    if (!is_attribute_key(k)) k = "other";
    auto [it, inserted] = out.attributes.emplace(k, v);
    if (!inserted && it->second != v) it->second += " " + v;
  }
  return out;
}

void GenerationParams::validate() const {
  if (sampling_steps < 1) throw InvalidArgument("sampling_steps must be >= 1");
  if (!std::isfinite(sigma_min) || !std::isfinite(sigma_max) || !(sigma_min < sigma_max))
    throw InvalidArgument("sigma_min must be < sigma_max");
  if (!std::isfinite(s_churn) || s_churn < 0) throw InvalidArgument("s_churn must be >= 0");
}

const char* to_string(BackendMode mode) { return mode == BackendMode::live ? "live" : "mock"; }

BackendMode backend_mode_from_string(const std::string& s) {
  if (s == "live") return BackendMode::live;
  if (s == "mock") return BackendMode::mock;
  throw InvalidArgument("backend mode must be 'live' or 'mock', got '" + s + "'");
}

void BackendEndpoint::validate() const {
  if (timeout.count() <= 0) throw InvalidArgument("backend timeout must be > 0");
  if (retries < 0 || retries > 3) throw InvalidArgument("backend retries must be in [0, 3]");
  if (mode == BackendMode::live && base_url.empty())
    throw InvalidArgument("live backend needs a base_url");
}

}  // namespace speech3d::adapters
