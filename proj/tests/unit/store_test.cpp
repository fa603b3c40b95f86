#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "speech3d/errors.hpp"
#include "speech3d/vectorstore/store.hpp"
#include "temp_dir.hpp"

using namespace speech3d;
using namespace speech3d::vectorstore;

namespace {

Embedding random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g;
  std::vector<double> v(dim);
  double n = 0;
  for (auto& x : v) {
    x = g(rng);
    n += x * x;
  }
  Embedding e(dim);
  for (std::size_t i = 0; i < dim; ++i) e[i] = static_cast<float>(v[i] / std::sqrt(n));
  return e;
}

Embedding axis(std::size_t dim, std::size_t i, float scale = 1.0f) {
  Embedding e(dim, 0.0f);
  e[i] = scale;
  return e;
}

AssetRecord make_record(std::string id, std::string label, Embedding e) {
  AssetRecord r;
  r.id = std::move(id);
  r.label = std::move(label);
  r.language = "en";
  r.embedding = std::move(e);
  r.created_at = 1700000000000;
  return r;
}

// Independent exhaustive-scan oracle: naive cosine, full sort.
double oracle_cosine(const Embedding& a, const Embedding& b) {
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return static_cast<double>(dot / (std::sqrt(na) * std::sqrt(nb)));
}

std::vector<std::string> oracle_top_k(const std::vector<AssetRecord>& records, const Embedding& q,
                                      std::size_t k) {
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& r : records) scored.push_back({oracle_cosine(q, r.embedding), r.id});
  std::sort(scored.begin(), scored.end(), [](const auto& l, const auto& r) {
    if (l.first != r.first) return l.first > r.first;
    return l.second < r.second;
  });
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) ids.push_back(scored[i].second);
  return ids;
}

std::vector<std::string> ids_of(const std::vector<SearchHit>& hits) {
  std::vector<std::string> ids;
  for (const auto& h : hits) ids.push_back(h.record.id);
  return ids;
}

}  // namespace

TEST(StoreConfig, DefaultsAndValidation) {
  StoreConfig c;
  EXPECT_EQ(c.dimension, 384u);
  EXPECT_EQ(c.hit_threshold, 0.85);
  EXPECT_EQ(c.dedup_threshold, 0.95);
  EXPECT_THROW((StoreConfig{.hit_threshold = 0.9, .dedup_threshold = 0.8}.validate()), InvalidArgument);
  EXPECT_THROW((StoreConfig{.dimension = 0}.validate()), InvalidArgument);
}

TEST(Upsert, InsertAndOverwrite) {
  VectorStore store({.dimension = 4});
  store.upsert(make_record("a1", "red apple", axis(4, 0)));
  EXPECT_EQ(store.size(), 1u);
  store.upsert(make_record("a1", "green apple", axis(4, 1)));
  EXPECT_EQ(store.size(), 1u);
  EXPECT_EQ(store.get("a1")->label, "green apple");
  EXPECT_EQ(store.search(axis(4, 1), 1).front().record.id, "a1");
}

TEST(Upsert, DimensionMismatch) {
  VectorStore store({});
  EXPECT_THROW(store.upsert(make_record("a1", "apple", Embedding(383, 0.1f))), DimensionMismatch);
  Embedding bad(384, 0.0f);
  bad[3] = std::nanf("");
  EXPECT_THROW(store.upsert(make_record("a1", "apple", bad)), InvalidArgument);
}

TEST(Search, SelfAndOrthogonal) {
  VectorStore store({.dimension = 8});
  store.upsert(make_record("x", "x", axis(8, 2)));
  auto hits = store.search(axis(8, 2, 3.0f), 5);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_NEAR(hits[0].similarity, 1.0, 1e-9);
  EXPECT_NEAR(store.search(axis(8, 5), 1)[0].similarity, 0.0, 1e-9);
  EXPECT_EQ(store.search(Embedding(8, 0.0f), 1)[0].similarity, 0.0);
  EXPECT_THROW(store.search(axis(8, 2), 0), InvalidArgument);
  EXPECT_THROW(store.search(axis(9, 2), 1), DimensionMismatch);
}

TEST(Search, TiesBrokenById) {
  VectorStore store({.dimension = 3});
  store.upsert(make_record("b", "b", axis(3, 0)));
  store.upsert(make_record("a", "a", axis(3, 0, 2.0f)));
  store.upsert(make_record("c", "c", axis(3, 0)));
  EXPECT_EQ(ids_of(store.search(axis(3, 0), 3)), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Search, MatchesExhaustiveOracleOnRandomStores) {
  std::mt19937_64 rng(99);
  for (std::size_t n : {1u, 10u, 257u, 1000u}) {
    VectorStore store({.dimension = 32});
    std::vector<AssetRecord> records;
    for (std::size_t i = 0; i < n; ++i) {
      records.push_back(make_record("r" + std::to_string(i), "l", random_unit(rng, 32)));
      store.upsert(records.back());
    }
    for (int q = 0; q < 20; ++q) {
      const Embedding query = random_unit(rng, 32);
      for (std::size_t k : {1u, 5u, 10u, 2000u}) {
        ASSERT_EQ(ids_of(store.search(query, k)), oracle_top_k(records, query, k));
      }
    }
  }
}

TEST(Cosine, SymmetricAndScaleInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> scale(0.01f, 100.0f);
  for (int i = 0; i < 200; ++i) {
    const Embedding a = random_unit(rng, 64);
    const Embedding b = random_unit(rng, 64);
    EXPECT_NEAR(cosine_similarity(a, b), cosine_similarity(b, a), 1e-12);
    Embedding scaled = b;
    const float c = scale(rng);
    for (auto& x : scaled) x *= c;
    EXPECT_NEAR(cosine_similarity(a, scaled), cosine_similarity(a, b), 1e-6);
  }
}

TEST(MatchOrMiss, HitAndMiss) {
  VectorStore store({.dimension = 16});
  EXPECT_FALSE(store.match_or_miss(axis(16, 0)).has_value());
  store.upsert(make_record("apple", "red apple", axis(16, 0)));
  auto hit = store.match_or_miss(axis(16, 0));
  ASSERT_TRUE(hit.has_value());
  EXPECT_NEAR(hit->similarity, 1.0, 1e-9);

  // Spherical interpolation to cosine 0.80 between axis 0 and axis 1.
  const double theta = std::acos(0.80);
  Embedding q(16, 0.0f);
  q[0] = static_cast<float>(std::cos(theta));
  q[1] = static_cast<float>(std::sin(theta));
  ASSERT_NEAR(oracle_cosine(q, axis(16, 0)), 0.80, 1e-6);
  EXPECT_FALSE(store.match_or_miss(q).has_value());
}

TEST(MatchOrMiss, AgreesWithTopSearchResult) {
  std::mt19937_64 rng(8);
  VectorStore store({.dimension = 8});
  for (int i = 0; i < 50; ++i) store.upsert(make_record("r" + std::to_string(i), "l", random_unit(rng, 8)));
  for (int i = 0; i < 500; ++i) {
    const Embedding q = random_unit(rng, 8);
    const bool hit = store.match_or_miss(q).has_value();
    EXPECT_EQ(hit, store.search(q, 1)[0].similarity >= store.config().hit_threshold);
  }
}

TEST(Dedup, Examples) {
  VectorStore store({.dimension = 8});
  EXPECT_TRUE(store.dedup_candidates({}).empty());
  EXPECT_EQ(store.dedup_candidates({{"a", axis(8, 0)}, {"b", axis(8, 0)}}).size(), 1u);

  // Pairwise cosines (v1,v2)=0.99, (v1,v3)=0.50, (v2,v3)=0.50.
  const double s = std::sqrt(1.0 - 0.99 * 0.99);
  const double y = (0.5 - 0.99 * 0.5) / s;
  const double z = std::sqrt(1.0 - 0.25 - y * y);
  Embedding v1 = axis(8, 0);
  Embedding v2(8, 0.0f);
  v2[0] = 0.99f;
  v2[1] = static_cast<float>(s);
  Embedding v3(8, 0.0f);
  v3[0] = 0.5f;
  v3[1] = static_cast<float>(y);
  v3[2] = static_cast<float>(z);
  ASSERT_NEAR(oracle_cosine(v1, v2), 0.99, 1e-6);
  ASSERT_NEAR(oracle_cosine(v1, v3), 0.50, 1e-6);
  ASSERT_NEAR(oracle_cosine(v2, v3), 0.50, 1e-6);
  const auto kept = store.dedup_candidates({{"one", v1}, {"two", v2}, {"three", v3}});
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].label, "one");
  EXPECT_EQ(kept[1].label, "three");
}

TEST(Dedup, DropsCandidatesAlreadyStored) {
  VectorStore store({.dimension = 8});
  store.upsert(make_record("p", "plate", axis(8, 3)));
  const auto kept = store.dedup_candidates({{"plate", axis(8, 3)}, {"cup", axis(8, 4)}});
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].label, "cup");
}

TEST(Dedup, Idempotent) {
  std::mt19937_64 rng(12);
  VectorStore store({.dimension = 4, .hit_threshold = 0.5, .dedup_threshold = 0.6});
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Candidate> xs;
    for (int i = 0; i < 12; ++i) xs.push_back({std::to_string(i), random_unit(rng, 4)});
    const auto once = store.dedup_candidates(xs);
    const auto twice = store.dedup_candidates(once);
    ASSERT_EQ(once.size(), twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(once[i].label, twice[i].label);
  }
}

TEST(AllocateId, NeverRepeats) {
  VectorStore store({.dimension = 2});
  store.upsert(make_record("asset-000002", "x", axis(2, 0)));
  const auto a = store.allocate_id();
  const auto b = store.allocate_id();
  EXPECT_EQ(a, "asset-000001");
  EXPECT_EQ(b, "asset-000003");
}

TEST(Persist, RoundTripPreservesSearch) {
  speech3d::testing::TempDir dir;
  std::mt19937_64 rng(5);
  StoreConfig cfg{.dimension = 16, .data_dir = dir.path()};
  VectorStore store(cfg);
  for (int i = 0; i < 3; ++i) {
    store.upsert_with_blob(make_record("r" + std::to_string(i), "label " + std::to_string(i),
                                       random_unit(rng, 16)),
                           "v 0 0 0\n");
  }
  store.persist();
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "index.jsonl"));
  EXPECT_EQ(std::filesystem::file_size(dir.path() / "vectors.bin"), 3u * 16u * 4u);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "blobs" / "r1.obj"));

  auto loaded = VectorStore::load(cfg);
  ASSERT_EQ(loaded->size(), 3u);
  for (int q = 0; q < 10; ++q) {
    const Embedding query = random_unit(rng, 16);
    const auto a = store.search(query, 3);
    const auto b = loaded->search(query, 3);
    ASSERT_EQ(ids_of(a), ids_of(b));
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_NEAR(a[i].similarity, b[i].similarity, 1e-6);
      EXPECT_EQ(a[i].record.label, b[i].record.label);
    }
  }
  EXPECT_EQ(loaded->read_blob("blobs/r2.obj"), "v 0 0 0\n");
  EXPECT_EQ(loaded->get("r0")->source, AssetSource::generated);
  EXPECT_EQ(loaded->get("r0")->created_at, 1700000000000);
}

TEST(Persist, VectorsFileIsLittleEndianFloat32) {
  speech3d::testing::TempDir dir;
  StoreConfig cfg{.dimension = 2, .data_dir = dir.path()};
  VectorStore store(cfg);
  Embedding e{1.0f, -2.5f};
  store.upsert_with_blob(make_record("a", "a", e), "x");
  store.persist();
  std::ifstream in(dir.path() / "vectors.bin", std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
  // 1.0f = 0x3f800000, -2.5f = 0xc0200000
  EXPECT_EQ(bytes, (std::vector<unsigned char>{0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x20, 0xc0}));
}

TEST(Persist, TruncatedVectorsIsCorrupt) {
  speech3d::testing::TempDir dir;
  StoreConfig cfg{.dimension = 4, .data_dir = dir.path()};
  {
    VectorStore store(cfg);
    for (int i = 0; i < 3; ++i) store.upsert_with_blob(make_record(std::to_string(i), "l", axis(4, 1)), "x");
    store.persist();
  }
  std::filesystem::resize_file(dir.path() / "vectors.bin", 2 * 4 * 4);
  try {
    VectorStore::load(cfg);
    FAIL() << "expected CorruptIndex";
  } catch (const CorruptIndex& e) {
    EXPECT_EQ(e.index(), 2u);
  }
}

TEST(Persist, MalformedLineIsCorrupt) {
  speech3d::testing::TempDir dir;
  StoreConfig cfg{.dimension = 4, .data_dir = dir.path()};
  {
    VectorStore store(cfg);
    for (int i = 0; i < 2; ++i) store.upsert_with_blob(make_record(std::to_string(i), "l", axis(4, 1)), "x");
    store.persist();
  }
  std::ofstream(dir.path() / "index.jsonl") << "{\"id\":\"0\",\"label\":\"l\",\"mesh_ref\":\"blobs/0.obj\"}\nnot json\n";
  try {
    VectorStore::load(cfg);
    FAIL() << "expected CorruptIndex";
  } catch (const CorruptIndex& e) {
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(Persist, MissingBlobRejected) {
  speech3d::testing::TempDir dir;
  VectorStore store({.dimension = 4, .data_dir = dir.path()});
  store.upsert(make_record("a", "a", axis(4, 0)));
  EXPECT_THROW(store.persist(), PersistenceError);
  VectorStore memory_only({.dimension = 4});
  EXPECT_THROW(memory_only.persist(), PersistenceError);
}

TEST(Persist, TenThousandRecordsLoadQuickly) {
  speech3d::testing::TempDir dir;
  StoreConfig cfg{.data_dir = dir.path()};
  std::mt19937_64 rng(1);
  {
    VectorStore store(cfg);
    for (int i = 0; i < 10000; ++i) {
      store.upsert_with_blob(make_record(store.allocate_id(), "object " + std::to_string(i),
                                         random_unit(rng, 384)),
                             "v 0 0 0\n");
    }
    store.persist();
  }
  const auto start = std::chrono::steady_clock::now();
  auto loaded = VectorStore::load(cfg);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_EQ(loaded->size(), 10000u);
  EXPECT_LT(seconds, 1.0);
}
