#include "speech3d/adapters/mock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "speech3d/adapters/lexicon.hpp"
#include "speech3d/errors.hpp"
#include "speech3d/geometry/shapes.hpp"
#include "speech3d/util/hash.hpp"

namespace speech3d::adapters {

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double gaussian(std::mt19937_64& rng) {
  // Box-Muller; keeps the sequence identical across standard libraries.
  double u1 = unit_uniform(rng);
  double u2 = unit_uniform(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> hashed_direction(std::string_view key, std::size_t dim) {
  std::mt19937_64 rng(util::fnv1a64(key));
  std::vector<double> v(dim);
  double n2 = 0;
  for (auto& x : v) {
    x = gaussian(rng);
    n2 += x * x;
  }
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& x : v) x *= inv;
  return v;
}

// Rounds to float and then nudges components, largest first, so the
// double-accumulated norm of the float vector is 1 to ~1e-12.
vectorstore::Embedding to_unit_float(const std::vector<double>& v) {
  double n2 = 0;
  for (double x : v) n2 += x * x;
  const double inv = 1.0 / std::sqrt(n2);
  vectorstore::Embedding out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] * inv);

  std::vector<std::size_t> order(v.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(out[a]) > std::fabs(out[b]);
  });
  double sum = 0;
  for (float x : out) sum += static_cast<double>(x) * x;
  for (std::size_t j : order) {
    const double r = 1.0 - sum;
    if (std::fabs(r) < 1e-13) break;
    const double x = out[j];
    const double target = x * x + r;
    if (target <= 0 || x == 0) continue;
    const float nx = static_cast<float>(std::copysign(std::sqrt(target), x));
    sum += static_cast<double>(nx) * nx - x * x;
    out[j] = nx;
  }
  return out;
}

}  // namespace

// ---- speech fixtures -------------------------------------------------------

const std::vector<Fixture>& fixtures() {
  static const std::vector<Fixture> table = {
      {"red-apple-en", "create a red apple", "en", "create a red apple"},
      {"manzana-es", "crea una manzana roja", "es", "create a red apple"},
      {"banana-en", "Matrix, create a banana", "en", "Matrix, create a banana"},
      {"red-apple-matrix-en", "Matrix, create a red apple", "en", "Matrix, create a red apple"},
      {"pear-en", "Matrix, create a pear", "en", "Matrix, create a pear"},
      {"grapes-en", "Matrix, create grapes", "en", "Matrix, create grapes"},
      {"white-plate-en", "Matrix, create a white plate", "en", "Matrix, create a white plate"},
      {"sib-fa", "\xd8\xb3\xdb\x8c\xd8\xa8 \xd8\xa8\xd8\xb3\xd8\xa7\xd8\xb2", "fa",
       "create an apple"},
      {"pomme-fr", "cr\xc3\xa9\x65 une pomme verte", "fr", "create a green apple"},
      {"nothing-en", "hello there", "en", "hello there"},
  };
  return table;
}

PcmClip fixture_clip(const std::string& name) {
  std::mt19937_64 rng(util::fnv1a64(name));
  const double seconds = 1.0 + static_cast<double>(rng() % 2000) / 1000.0;
  PcmClip clip;
  const auto n = static_cast<std::size_t>(std::llround(seconds * kSampleRate));
  clip.samples.resize(n);
  double freq = 0;
  double phase = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 1600 == 0) freq = 200.0 + static_cast<double>(rng() % 800);
    phase += 2.0 * std::numbers::pi * freq / kSampleRate;
    clip.samples[i] = static_cast<std::int16_t>(std::lround(8000.0 * std::sin(phase)));
  }
  return clip;
}

std::string fixture_wav(const std::string& name) { return encode_wav(fixture_clip(name)); }

std::uint64_t clip_fingerprint(const PcmClip& clip) {
  std::string bytes;
  bytes.reserve(clip.samples.size() * 2);
  for (std::int16_t s : clip.samples) {
    auto u = static_cast<std::uint16_t>(s);
    bytes.push_back(static_cast<char>(u & 0xff));
    bytes.push_back(static_cast<char>(u >> 8));
  }
  return util::fnv1a64(bytes);
}

MockSpeechToText::MockSpeechToText(std::shared_ptr<CallLog> log) : SpeechToText(std::move(log)) {
  for (const auto& f : fixtures()) by_print_.emplace_back(clip_fingerprint(fixture_clip(f.name)), &f);
}

TranscriptResult MockSpeechToText::do_transcribe(std::string_view wav, std::string_view) {
  const PcmClip clip = decode_wav(wav);
  const auto print = clip_fingerprint(clip);
  for (const auto& [p, f] : by_print_)
    if (p == print) return {f->english, f->language, f->language != "en"};
  throw UnknownFixture("no fixture matches the clip fingerprint");
}

// ---- text to speech --------------------------------------------------------

std::string beep_wav(std::string_view text) {
  std::size_t code_points = 0;
  for (unsigned char c : text)
    if ((c & 0xC0) != 0x80) ++code_points;
  PcmClip clip;
  const std::size_t per_char = kSampleRate * kBeepMillisPerChar / 1000;
  clip.samples.resize(code_points * per_char);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    const double t = static_cast<double>(i) / kSampleRate;
    clip.samples[i] =
        static_cast<std::int16_t>(std::lround(9830.0 * std::sin(2.0 * std::numbers::pi * 440.0 * t)));
  }
  return encode_wav(clip);
}

std::vector<std::pair<std::string, std::string>> MockTextToSpeech::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::string MockTextToSpeech::do_synthesize(std::string_view text, std::string_view lang) {
  {
    std::lock_guard lock(mutex_);
    requests_.emplace_back(std::string(text), std::string(lang));
  }
  return beep_wav(text);
}

// ---- language model --------------------------------------------------------

std::vector<ExtractedObject> lexicon_extract(std::string_view text) {
  using lexicon::WordKind;
  std::vector<ExtractedObject> out;
  std::map<std::string, std::string> pending;
  for (const auto& token : lexicon::tokenize(text)) {
    if (lexicon::is_stopword(token)) continue;
    if (auto noun = lexicon::noun_form(token); !noun.empty()) {
      out.push_back({noun, std::move(pending)});
      pending.clear();
      continue;
    }
    auto kind = lexicon::kind_of(token);
    if (!kind) continue;
    const char* key = *kind == WordKind::color ? "color" : *kind == WordKind::size ? "size" : "shape";
    auto [it, inserted] = pending.emplace(key, token);
    if (!inserted) it->second += " " + token;
  }
  return out;
}

std::vector<ExtractedObject> complement_recommend(const std::vector<ExtractedObject>& context,
                                                  const std::vector<std::string>& history,
                                                  std::size_t max_n) {
  std::vector<std::string> names;
  auto in_context = [&](const std::string& n) {
    return std::any_of(context.begin(), context.end(),
                       [&](const ExtractedObject& c) { return c.name == n; });
  };
  auto add = [&](const std::string& n) {
    if (!in_context(n) && std::find(names.begin(), names.end(), n) == names.end())
      names.push_back(n);
  };
  for (const auto& c : context) {
    auto it = lexicon::complements().find(c.name);
    if (it == lexicon::complements().end()) continue;
    for (const auto& n : it->second) add(n);
  }
  if (names.empty())
    for (const auto& n : lexicon::starter_set()) add(n);

  // Things the user already made go last.
  auto seen = [&](const std::string& n) {
    return std::any_of(history.begin(), history.end(), [&](const std::string& label) {
      for (const auto& o : lexicon_extract(label))
        if (o.name == n) return true;
      return false;
    });
  };
  std::stable_partition(names.begin(), names.end(), [&](const std::string& n) { return !seen(n); });

  std::vector<ExtractedObject> out;
  for (const auto& n : names) {
    if (out.size() == max_n) break;
    out.push_back({n, {}});
  }
  return out;
}

std::vector<ExtractedObject> MockObjectExtractor::do_extract(std::string_view text) {
  return lexicon_extract(text);
}

std::vector<ExtractedObject> MockRecommender::do_recommend(
    const std::vector<ExtractedObject>& context, const std::vector<std::string>& history,
    std::size_t max_n) {
  return complement_recommend(context, history, max_n);
}

// ---- text to 3D ------------------------------------------------------------

geometry::TriMesh procedural_model(std::string_view prompt) {
  static constexpr const char* kPalette[] = {"red",    "green", "blue",  "yellow",
                                             "orange", "white", "brown", "purple"};
  const std::uint64_t h = util::fnv1a64(prompt);
  geometry::SphereShape shape;
  shape.slices = 160 + h % 12;
  shape.stacks = 83 + (h >> 8) % 5;
  shape.radius = 0.5 + static_cast<double>((h >> 16) % 1000) / 1000.0;
  shape.bulge = static_cast<double>((h >> 28) % 250) / 1000.0;
  shape.lobes = static_cast<int>((h >> 40) % 6);
  auto mesh = geometry::uv_sphere(shape);
  mesh.name = std::string(prompt) + " [" + kPalette[(h >> 48) % 8] + "]";
  return mesh;
}

MockModelGenerator::MockModelGenerator(std::shared_ptr<CallLog> log, MockGeneratorConfig cfg)
    : ModelGenerator(std::move(log)), cfg_(cfg), slots_(cfg.max_in_flight) {}

GeneratedModel MockModelGenerator::do_generate(std::string_view prompt, const GenerationParams&) {
  util::SemaphoreGuard slot(slots_);
  const auto start = std::chrono::steady_clock::now();
  if (cfg_.delay > cfg_.timeout) {
    std::this_thread::sleep_for(cfg_.timeout);
    throw BackendTimeout(std::string(kGenerate));
  }
  if (cfg_.delay.count() > 0) std::this_thread::sleep_for(cfg_.delay);
  GeneratedModel out;
  out.mesh = procedural_model(prompt);
  out.duration = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);
  return out;
}

// ---- embedder --------------------------------------------------------------

MockEmbedder::MockEmbedder(std::shared_ptr<CallLog> log, std::size_t dimension)
    : Embedder(std::move(log), dimension) {
  if (dimension == 0) throw InvalidArgument("embedding dimension must be > 0");
  std::vector<std::string> vocab;
  for (const auto& w : lexicon::words()) vocab.push_back(w.text);
  for (const auto& [syn, canonical] : lexicon::synonyms()) vocab.push_back(syn);

  for (const auto& word : vocab) {
    auto v = hashed_direction("lexicon:" + word, dimension);
    if (basis_.size() < dimension) {
      // Gram-Schmidt against the earlier words, twice for stability.
      for (int round = 0; round < 2; ++round)
        for (const auto& [other, b] : basis_) {
          double d = 0;
          for (std::size_t i = 0; i < dimension; ++i) d += v[i] * b[i];
          for (std::size_t i = 0; i < dimension; ++i) v[i] -= d * b[i];
        }
      double n2 = 0;
      for (double x : v) n2 += x * x;
      const double inv = 1.0 / std::sqrt(n2);
      for (auto& x : v) x *= inv;
    }
    basis_.emplace_back(word, std::move(v));
  }
}

std::vector<double> MockEmbedder::direction(const std::string& token) const {
  for (const auto& [w, v] : basis_)
    if (w == token) return v;
  return hashed_direction("token:" + token, dimension());
}

vectorstore::Embedding MockEmbedder::do_embed(std::string_view label) {
  using lexicon::WordKind;
  std::vector<double> sum(dimension(), 0.0);
  auto add = [&](const std::vector<double>& v, double w) {
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += w * v[i];
  };
  bool any = false;
  for (const auto& token : lexicon::tokenize(label)) {
    if (lexicon::is_stopword(token)) continue;
    any = true;
    if (auto noun = lexicon::noun_form(token); !noun.empty()) {
      auto syn = lexicon::synonyms().find(noun);
      if (syn != lexicon::synonyms().end()) {
        add(direction(syn->second), 1.0);
        add(direction(noun), kSynonymOwnWeight);
      } else {
        add(direction(noun), 1.0);
      }
    } else if (lexicon::kind_of(token)) {
      add(direction(token), kAttributeWeight);
    } else {
      add(direction(token), 1.0);
    }
  }
  if (!any) {
    std::string key;
    for (char c : label) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    add(hashed_direction("label:" + key, dimension()), 1.0);
  }
  return to_unit_float(sum);
}

Backends make_mock_backends(std::size_t embed_dimension, MockGeneratorConfig gen) {
  Backends b;
  b.log = std::make_shared<CallLog>();
  b.stt = std::make_shared<MockSpeechToText>(b.log);
  b.tts = std::make_shared<MockTextToSpeech>(b.log);
  b.extractor = std::make_shared<MockObjectExtractor>(b.log);
  b.recommender = std::make_shared<MockRecommender>(b.log);
  b.generator = std::make_shared<MockModelGenerator>(b.log, gen);
  b.embedder = std::make_shared<MockEmbedder>(b.log, embed_dimension);
  for (auto name : {kTranscribe, kTts, kExtract, kRecommend, kGenerate, kEmbed})
    b.modes.emplace_back(std::string(name), BackendMode::mock);
  return b;
}

}  // namespace speech3d::adapters
