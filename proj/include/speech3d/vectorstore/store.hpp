#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace speech3d::vectorstore {

using Embedding = std::vector<float>;

enum class AssetSource { generated, imported };

const char* to_string(AssetSource s);
AssetSource source_from_string(const std::string& s);

struct AssetRecord {
  std::string id;
  std::string label;     // object name plus attributes, e.g. "red apple"
  std::string language;  // tag of the originating command
  Embedding embedding;
  std::string mesh_ref;  // path of the OBJ blob relative to the data dir
  std::int64_t created_at = 0;  // unix milliseconds
  AssetSource source = AssetSource::generated;
};

struct SearchHit {
  AssetRecord record;
  double similarity = 0.0;
};

struct StoreConfig {
  std::size_t dimension = 384;
  double hit_threshold = 0.85;
  double dedup_threshold = 0.95;
  std::filesystem::path data_dir;  // empty: in-memory only

  // Throws InvalidArgument unless dimension > 0, both thresholds are in
  // [0, 1] and dedup_threshold >= hit_threshold.
  void validate() const;
};

struct Candidate {
  std::string label;
  Embedding embedding;
};

// (q.v) / (|q| |v|), accumulated in double; 0 when either norm is zero.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

// Embedding store with exhaustive cosine search.
//
// On disk (data_dir):
//   index.jsonl  one JSON object per record, `\n` separated, row order
//   vectors.bin  row-major little-endian float32, row i <-> line i
//   blobs/       OBJ files referenced by mesh_ref
//
// Thread safety: any number of concurrent readers, writers serialized.
class VectorStore {
 public:
  explicit VectorStore(StoreConfig config);

  // Opens data_dir, loading it when index.jsonl exists. Throws CorruptIndex.
  static std::unique_ptr<VectorStore> load(StoreConfig config);

  const StoreConfig& config() const { return config_; }

  // Inserts or replaces by id. Throws DimensionMismatch, InvalidArgument.
  std::string upsert(AssetRecord record);

  // Stores `obj` as blobs/<id>.obj and upserts the record pointing at it.
  std::string upsert_with_blob(AssetRecord record, std::string obj);

  void put_blob(const std::string& mesh_ref, std::string bytes);
  // Throws NotFound.
  std::string read_blob(const std::string& mesh_ref) const;

  std::optional<AssetRecord> get(const std::string& id) const;
  std::vector<AssetRecord> records() const;
  std::size_t size() const;

  // Unique id of the form <prefix>-NNNNNN, never handed out twice.
  std::string allocate_id(const std::string& prefix = "asset");

  // Top-k by cosine similarity, descending; ties by id ascending.
  std::vector<SearchHit> search(std::span<const float> query, std::size_t k) const;

  // The top hit when its similarity >= hit_threshold.
  std::optional<SearchHit> match_or_miss(std::span<const float> query) const;

  // Greedy pass in input order: drops a candidate whose similarity to a kept
  // candidate or to any stored record is >= dedup_threshold.
  std::vector<Candidate> dedup_candidates(const std::vector<Candidate>& candidates) const;

  // Writes the data dir via temp files and renames. Throws PersistenceError.
  void persist() const;

 private:
  void check_dimension(std::size_t n) const;
  void load_from_disk();

  StoreConfig config_;
  mutable std::shared_mutex mutex_;
  mutable std::mutex persist_mutex_;
  std::vector<AssetRecord> records_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::map<std::string, std::string> blobs_;  // blobs put since construction
  mutable std::set<std::string> dirty_blobs_;  // not yet written to data_dir
  std::uint64_t next_id_ = 1;
};

}  // namespace speech3d::vectorstore
