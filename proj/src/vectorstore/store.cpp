#include "speech3d/vectorstore/store.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "speech3d/errors.hpp"

namespace speech3d::vectorstore {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(AssetSource s) {
  return s == AssetSource::generated ? "generated" : "imported";
}

AssetSource source_from_string(const std::string& s) {
  if (s == "generated") return AssetSource::generated;
  if (s == "imported") return AssetSource::imported;
  throw InvalidArgument("unknown asset source '" + s + "'");
}

void StoreConfig::validate() const {
  if (dimension == 0) throw InvalidArgument("embedding dimension must be positive");
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(hit_threshold) || !in_unit(dedup_threshold)) {
    throw InvalidArgument("thresholds must lie in [0, 1]");
  }
  if (dedup_threshold < hit_threshold) {
    throw InvalidArgument("dedup_threshold must be >= hit_threshold");
  }
}

namespace {

double norm_of(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(s);
}

double dot_of(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return s;
}

double cosine_with_norms(std::span<const float> a, double na, std::span<const float> b, double nb) {
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot_of(a, b) / (na * nb);
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}

// Writes `bytes` to `path` through a sibling temp file and rename.
void atomic_write(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw PersistenceError("cannot open " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw PersistenceError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw PersistenceError("rename " + tmp.string() + ": " + ec.message());
}

bool safe_ref(const std::string& ref) {
  if (ref.empty()) return false;
  const fs::path p(ref);
  if (p.is_absolute()) return false;
  return std::none_of(p.begin(), p.end(), [](const fs::path& part) { return part == ".."; });
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw DimensionMismatch(a.size(), b.size());
  return cosine_with_norms(a, norm_of(a), b, norm_of(b));
}

VectorStore::VectorStore(StoreConfig config) : config_(std::move(config)) { config_.validate(); }

std::unique_ptr<VectorStore> VectorStore::load(StoreConfig config) {
  auto store = std::make_unique<VectorStore>(std::move(config));
  if (!store->config_.data_dir.empty() && fs::exists(store->config_.data_dir / "index.jsonl")) {
    store->load_from_disk();
  }
  return store;
}

void VectorStore::check_dimension(std::size_t n) const {
  if (n != config_.dimension) throw DimensionMismatch(config_.dimension, n);
}

std::string VectorStore::upsert(AssetRecord record) {
  check_dimension(record.embedding.size());
  if (record.id.empty()) throw InvalidArgument("record id must not be empty");
  for (float v : record.embedding) {
    if (!std::isfinite(v)) throw InvalidArgument("embedding values must be finite");
  }
  const double n = norm_of(record.embedding);
  std::unique_lock lock(mutex_);
  const std::string id = record.id;
  if (auto it = by_id_.find(id); it != by_id_.end()) {
    records_[it->second] = std::move(record);
    norms_[it->second] = n;
  } else {
    by_id_.emplace(id, records_.size());
    records_.push_back(std::move(record));
    norms_.push_back(n);
  }
  return id;
}

std::string VectorStore::upsert_with_blob(AssetRecord record, std::string obj) {
  record.mesh_ref = "blobs/" + record.id + ".obj";
  put_blob(record.mesh_ref, std::move(obj));
  return upsert(std::move(record));
}

void VectorStore::put_blob(const std::string& mesh_ref, std::string bytes) {
  if (!safe_ref(mesh_ref)) throw InvalidArgument("invalid mesh_ref '" + mesh_ref + "'");
  std::unique_lock lock(mutex_);
  blobs_[mesh_ref] = std::move(bytes);
  dirty_blobs_.insert(mesh_ref);
}

std::string VectorStore::read_blob(const std::string& mesh_ref) const {
  {
    std::shared_lock lock(mutex_);
    if (auto it = blobs_.find(mesh_ref); it != blobs_.end()) return it->second;
  }
  if (config_.data_dir.empty() || !safe_ref(mesh_ref)) {
    throw NotFound("blob '" + mesh_ref + "' not found");
  }
  return read_file(config_.data_dir / mesh_ref);
}

std::optional<AssetRecord> VectorStore::get(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return records_[it->second];
}

std::vector<AssetRecord> VectorStore::records() const {
  std::shared_lock lock(mutex_);
  return records_;
}

std::size_t VectorStore::size() const {
  std::shared_lock lock(mutex_);
  return records_.size();
}

std::string VectorStore::allocate_id(const std::string& prefix) {
  std::unique_lock lock(mutex_);
  for (;;) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "-%06llu", static_cast<unsigned long long>(next_id_++));
    std::string id = prefix + buf;
    if (!by_id_.contains(id)) return id;
  }
}

std::vector<SearchHit> VectorStore::search(std::span<const float> query, std::size_t k) const {
  check_dimension(query.size());
  if (k == 0) throw InvalidArgument("k must be >= 1");
  const double qn = norm_of(query);
  std::shared_lock lock(mutex_);
  std::vector<std::pair<double, std::size_t>> scored(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    scored[i] = {cosine_with_norms(query, qn, records_[i].embedding, norms_[i]), i};
  }
  const std::size_t n = std::min(k, scored.size());
  auto better = [this](const auto& l, const auto& r) {
    if (l.first != r.first) return l.first > r.first;
    return records_[l.second].id < records_[r.second].id;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    better);
  std::vector<SearchHit> hits;
  hits.reserve(n);
  for (std::size_t i = 0; i < n; ++i) hits.push_back({records_[scored[i].second], scored[i].first});
  return hits;
}

std::optional<SearchHit> VectorStore::match_or_miss(std::span<const float> query) const {
  auto hits = search(query, 1);
  if (hits.empty() || hits.front().similarity < config_.hit_threshold) return std::nullopt;
  return std::move(hits.front());
}

std::vector<Candidate> VectorStore::dedup_candidates(const std::vector<Candidate>& candidates) const {
  for (const auto& c : candidates) check_dimension(c.embedding.size());
  std::shared_lock lock(mutex_);
  std::vector<Candidate> kept;
  std::vector<double> kept_norms;
  for (const auto& c : candidates) {
    const double cn = norm_of(c.embedding);
    bool duplicate = false;
    for (std::size_t i = 0; i < kept.size() && !duplicate; ++i) {
      duplicate = cosine_with_norms(c.embedding, cn, kept[i].embedding, kept_norms[i]) >=
                  config_.dedup_threshold;
    }
    for (std::size_t i = 0; i < records_.size() && !duplicate; ++i) {
      duplicate = cosine_with_norms(c.embedding, cn, records_[i].embedding, norms_[i]) >=
                  config_.dedup_threshold;
    }
    if (!duplicate) {
      kept.push_back(c);
      kept_norms.push_back(cn);
    }
  }
  return kept;
}

void VectorStore::persist() const {
  if (config_.data_dir.empty()) throw PersistenceError("store has no data_dir");
  std::lock_guard persist_lock(persist_mutex_);
  std::string index;
  std::string vectors;
  std::map<std::string, std::string> pending;
  {
    std::shared_lock lock(mutex_);
    vectors.reserve(records_.size() * config_.dimension * 4);
    for (const auto& r : records_) {
      const bool in_memory = blobs_.contains(r.mesh_ref);
      if (!safe_ref(r.mesh_ref) ||
          (!in_memory && !fs::exists(config_.data_dir / r.mesh_ref))) {
        throw PersistenceError("record '" + r.id + "' has no blob at '" + r.mesh_ref + "'");
      }
      json line = {{"id", r.id},
                   {"label", r.label},
                   {"language", r.language},
                   {"mesh_ref", r.mesh_ref},
                   {"created_at", r.created_at},
                   {"source", to_string(r.source)}};
      index += line.dump();
      index += '\n';
      for (float v : r.embedding) {
        std::uint32_t bits = to_little_endian(std::bit_cast<std::uint32_t>(v));
        char raw[4];
        std::memcpy(raw, &bits, 4);
        vectors.append(raw, 4);
      }
    }
    for (const auto& ref : dirty_blobs_) pending.emplace(ref, blobs_.at(ref));
  }

  std::error_code ec;
  fs::create_directories(config_.data_dir / "blobs", ec);
  if (ec) throw PersistenceError("cannot create " + config_.data_dir.string() + ": " + ec.message());
  for (const auto& [ref, bytes] : pending) {
    const fs::path target = config_.data_dir / ref;
    fs::create_directories(target.parent_path(), ec);
    atomic_write(target, bytes);
  }
  atomic_write(config_.data_dir / "vectors.bin", vectors);
  atomic_write(config_.data_dir / "index.jsonl", index);

  std::unique_lock lock(mutex_);
  for (const auto& [ref, bytes] : pending) {
    if (blobs_.at(ref) == bytes) dirty_blobs_.erase(ref);
  }
}

void VectorStore::load_from_disk() {
  const fs::path dir = config_.data_dir;
  std::string index;
  std::string vectors;
  try {
    index = read_file(dir / "index.jsonl");
    vectors = read_file(dir / "vectors.bin");
  } catch (const NotFound& e) {
    throw CorruptIndex(0, e.what());
  }

  std::vector<AssetRecord> loaded;
  std::size_t pos = 0;
  while (pos < index.size()) {
    auto end = index.find('\n', pos);
    if (end == std::string::npos) end = index.size();
    const std::string line = index.substr(pos, end - pos);
    pos = end + 1;
    const std::size_t row = loaded.size();
    if (line.empty()) throw CorruptIndex(row, "empty index line");
    AssetRecord r;
    try {
      const json j = json::parse(line);
      r.id = j.at("id").get<std::string>();
      r.label = j.at("label").get<std::string>();
      r.language = j.value("language", "");
      r.mesh_ref = j.at("mesh_ref").get<std::string>();
      r.created_at = j.value("created_at", std::int64_t{0});
      r.source = source_from_string(j.value("source", "generated"));
    } catch (const std::exception& e) {
      throw CorruptIndex(row, std::string("malformed index line: ") + e.what());
    }
    loaded.push_back(std::move(r));
  }

  const std::size_t row_bytes = config_.dimension * 4;
  if (vectors.size() % row_bytes != 0) {
    throw CorruptIndex(vectors.size() / row_bytes, "vectors.bin holds a partial row");
  }
  const std::size_t rows = vectors.size() / row_bytes;
  if (rows != loaded.size()) {
    throw CorruptIndex(std::min(rows, loaded.size()),
                       "index has " + std::to_string(loaded.size()) + " lines but vectors.bin has " +
                           std::to_string(rows) + " rows");
  }
  for (std::size_t i = 0; i < rows; ++i) {
    auto& emb = loaded[i].embedding;
    emb.resize(config_.dimension);
    for (std::size_t d = 0; d < config_.dimension; ++d) {
      std::uint32_t bits;
      std::memcpy(&bits, vectors.data() + i * row_bytes + d * 4, 4);
      emb[d] = std::bit_cast<float>(to_little_endian(bits));
      if (!std::isfinite(emb[d])) throw CorruptIndex(i, "non-finite vector value");
    }
  }

  std::unique_lock lock(mutex_);
  records_.clear();
  norms_.clear();
  by_id_.clear();
  for (auto& r : loaded) {
    if (by_id_.contains(r.id)) throw CorruptIndex(records_.size(), "duplicate id '" + r.id + "'");
    by_id_.emplace(r.id, records_.size());
    norms_.push_back(norm_of(r.embedding));
    records_.push_back(std::move(r));
  }
  next_id_ = records_.size() + 1;
}

}  // namespace speech3d::vectorstore
