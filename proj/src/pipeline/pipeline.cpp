#include "speech3d/pipeline/pipeline.hpp"

#include <algorithm>
#include <cstdio>

#include "speech3d/adapters/wav.hpp"
#include "speech3d/errors.hpp"
#include "speech3d/geometry/obj.hpp"
#include "speech3d/util/hash.hpp"

namespace speech3d::pipeline {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

namespace {

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

// Adds the elapsed time of `fn` to stages[name].
template <class F>
auto timed(std::map<std::string, double>& stages, const std::string& name, F&& fn) {
  const auto t0 = Clock::now();
  struct Add {
    std::map<std::string, double>& stages;
    const std::string& name;
    Clock::time_point t0;
    ~Add() { stages[name] += seconds_between(t0, Clock::now()); }
  } add{stages, name, t0};
  return fn();
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

struct Pipeline::Slot {
  std::mutex work;
  mutable std::mutex state;
  Session s;
  EventBus bus;

  // Bookkeeping for the task in progress; guarded by `work`.
  OfferMenu menu;
  Clock::time_point command_receipt{};
  Clock::time_point offers_ready{};
  std::map<std::string, double> command_stages;
  int pending_errors = 0;
  int pending_user_retries = 0;
  std::vector<std::string> placed_labels;
};

Pipeline::Pipeline(PipelineConfig config, adapters::Backends backends,
                   std::shared_ptr<vectorstore::VectorStore> store, LanguageRegistry languages)
    : config_(std::move(config)), backends_(std::move(backends)), store_(std::move(store)),
      languages_(std::move(languages)) {
  config_.simplify.validate();
  config_.generation.validate();
  if (config_.max_offers == 0) throw InvalidArgument("max_offers must be >= 1");
  if (config_.recommendations == 0) throw InvalidArgument("recommendations must be >= 1");
  if (!store_) throw InvalidArgument("pipeline needs a vector store");
  if (!backends_.stt || !backends_.tts || !backends_.extractor || !backends_.recommender ||
      !backends_.generator || !backends_.embedder)
    throw InvalidArgument("pipeline needs all six backends");
  if (backends_.embedder->dimension() != store_->config().dimension)
    throw DimensionMismatch(store_->config().dimension, backends_.embedder->dimension());
}

Pipeline::~Pipeline() {
  std::unique_lock lock(sessions_mutex_);
  for (auto& [id, s] : sessions_) s->bus.close_all();
}

std::shared_ptr<Pipeline::Slot> Pipeline::slot(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownSession(id);
  return it->second;
}

std::vector<std::string> Pipeline::session_ids() const {
  std::shared_lock lock(sessions_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  return ids;
}

void Pipeline::move_to(Slot& sl, StatusState next) {
  std::lock_guard lock(sl.state);
  const StatusState from = sl.s.status;
  if (!is_legal(from, next))
    throw IllegalTransition(std::string("cannot go from ") + to_string(from) + " to " + to_string(next));
  sl.s.status = next;
  if (next == StatusState::Offers)
    sl.s.pending_offers = sl.menu;
  else
    sl.s.pending_offers.reset();
  const auto now = unix_millis();
  sl.s.transitions.push_back({next, now});
  sl.bus.publish("status", {{"status", to_string(next)}, {"from", to_string(from)}});
}

std::string Pipeline::speak(const std::string& text, const std::string& language) {
  const auto key = std::make_pair(text, language);
  {
    std::lock_guard lock(audio_mutex_);
    if (auto it = audio_by_text_.find(key); it != audio_by_text_.end()) return it->second;
  }
  std::string wav = backends_.tts->synthesize(text, language);
  char ref[32];
  std::snprintf(ref, sizeof ref, "tts-%016llx",
                static_cast<unsigned long long>(util::fnv1a64(language + '\n' + text)));
  std::lock_guard lock(audio_mutex_);
  audio_by_text_.emplace(key, ref);
  audio_.emplace(ref, std::move(wav));
  return ref;
}

std::optional<std::string> Pipeline::audio(const std::string& ref) const {
  std::lock_guard lock(audio_mutex_);
  auto it = audio_.find(ref);
  if (it == audio_.end()) return std::nullopt;
  return it->second;
}

// ---- sessions --------------------------------------------------------------

SessionCreated Pipeline::create_session(const std::string& language) {
  if (!languages_.contains(language)) throw UnsupportedLanguage(language);
  const std::string welcome = speak(config_.welcome_text, language);

  auto sl = std::make_shared<Slot>();
  {
    std::unique_lock lock(sessions_mutex_);
    char id[32];
    std::snprintf(id, sizeof id, "s-%06llu", static_cast<unsigned long long>(next_session_++));
    sl->s.id = id;
    sessions_.emplace(sl->s.id, sl);
  }
  sl->s.language = language;
  sl->s.status = StatusState::Welcome;
  sl->s.created_at = unix_millis();
  sl->s.welcome_audio_ref = welcome;
  sl->s.transitions.push_back({StatusState::Welcome, sl->s.created_at});
  sl->bus.publish("status", {{"status", "Welcome"}, {"from", nullptr}, {"welcome_audio_ref", welcome}});
  return {sl->s.id, welcome};
}

Session Pipeline::session(const std::string& session_id) const {
  auto sl = slot(session_id);
  std::lock_guard lock(sl->state);
  return sl->s;
}

EventBus& Pipeline::events(const std::string& session_id) { return slot(session_id)->bus; }

void Pipeline::advance_status(const std::string& session_id, StatusState next) {
  auto sl = slot(session_id);
  std::lock_guard work(sl->work);
  move_to(*sl, next);
}

// ---- command ---------------------------------------------------------------

OfferMenu Pipeline::submit_command(const std::string& session_id, const CommandInput& input) {
  const auto receipt = Clock::now();
  auto sl = slot(session_id);

  // Guards that need no backend.
  if (input.wav) {
    const double seconds = adapters::wav_duration_seconds(*input.wav);
    if (seconds > adapters::kMaxCommandSeconds) throw AudioTooLong(seconds);
  } else if (!input.text || input.text->find_first_not_of(" \t\r\n") == std::string::npos) {
    throw InvalidArgument("command needs text or audio");
  }

  std::lock_guard work(sl->work);
  StatusState prior;
  std::string language;
  {
    std::lock_guard lock(sl->state);
    prior = sl->s.status;
    language = sl->s.language;
  }
  if (prior != StatusState::Welcome && prior != StatusState::Presenting && prior != StatusState::Offers)
    throw InvalidState(std::string("cannot take a command while ") + to_string(prior));

  const OfferMenu prior_menu = sl->menu;
  move_to(*sl, StatusState::Listening);
  move_to(*sl, StatusState::Thinking);

  auto restore = [&](const std::string& notice_text, const std::string& code, const std::string& message) {
    std::string ref;
    try {
      ref = speak(notice_text, language);
    } catch (const std::exception&) {
      // the notice is best effort; the error itself still reaches the caller
    }
    {
      std::lock_guard lock(sl->state);
      sl->s.last_notice_audio_ref = ref;
    }
    sl->bus.publish("notice", {{"code", code}, {"message", message}, {"audio_ref", ref}});
    sl->menu = prior_menu;
    move_to(*sl, prior);
  };

  std::map<std::string, double> stages;
  OfferMenu menu;
  try {
    std::string text;
    if (input.wav) {
      auto tr = timed(stages, "transcribe", [&] { return backends_.stt->transcribe(*input.wav, language); });
      text = tr.text_english;
    } else {
      text = *input.text;
    }
    auto objects = timed(stages, "extract", [&] { return backends_.extractor->extract(text); });
    if (objects.empty()) {
      ++sl->pending_user_retries;
      restore(config_.no_objects_text, "no_objects", "no known object in command");
      throw NoObjectsFound();
    }
    auto recs = timed(stages, "recommend", [&] {
      return backends_.recommender->recommend(objects, sl->placed_labels, config_.recommendations);
    });

    auto embed_items = [&](const std::vector<adapters::ExtractedObject>& list) {
      std::vector<OfferItem> items;
      for (const auto& o : list) {
        OfferItem item{o, adapters::label_of(o), {}};
        item.embedding = timed(stages, "embed", [&] { return backends_.embedder->embed(item.label); });
        items.push_back(std::move(item));
      }
      return items;
    };
    auto requested = embed_items(objects);
    auto recommended = embed_items(recs);

    // Repository hits for each requested label, best first.
    std::map<std::string, vectorstore::SearchHit> hits;
    timed(stages, "search", [&] {
      for (const auto& item : requested)
        for (auto& h : store_->search(item.embedding, config_.max_offers)) {
          if (h.similarity < store_->config().hit_threshold) continue;
          auto it = hits.find(h.record.id);
          if (it == hits.end() || it->second.similarity < h.similarity) hits[h.record.id] = std::move(h);
        }
      return 0;
    });
    std::vector<vectorstore::SearchHit> ranked;
    for (auto& [id, h] : hits) ranked.push_back(std::move(h));
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.similarity != b.similarity ? a.similarity > b.similarity : a.record.id < b.record.id;
    });

    // Greedy dedup across the whole menu: stored assets first, then requested, then recommended.
    timed(stages, "dedup", [&] {
      const double t = store_->config().dedup_threshold;
      std::vector<const vectorstore::Embedding*> kept;
      auto distinct = [&](const vectorstore::Embedding& e) {
        for (const auto* k : kept)
          if (vectorstore::cosine_similarity(*k, e) >= t) return false;
        return true;
      };
      menu.repository.reserve(config_.max_offers);
      menu.requested.reserve(config_.max_offers);
      menu.recommended.reserve(config_.max_offers);
      for (auto& h : ranked) {
        if (menu.repository.size() == config_.max_offers) break;
        if (!distinct(h.record.embedding)) continue;
        menu.repository.push_back(std::move(h));
        kept.push_back(&menu.repository.back().record.embedding);
      }
      for (auto& item : requested) {
        if (menu.requested.size() == config_.max_offers) break;
        if (!distinct(item.embedding)) continue;
        menu.requested.push_back(std::move(item));
        kept.push_back(&menu.requested.back().embedding);
      }
      for (auto& item : recommended) {
        if (menu.recommended.size() == config_.max_offers) break;
        if (!distinct(item.embedding)) continue;
        menu.recommended.push_back(std::move(item));
        kept.push_back(&menu.recommended.back().embedding);
      }
      return 0;
    });
  } catch (const NoObjectsFound&) {
    throw;
  } catch (const Error& e) {
    ++sl->pending_errors;
    restore(config_.backend_error_text, e.code(), e.what());
    throw;
  } catch (const std::exception& e) {
    ++sl->pending_errors;
    restore(config_.backend_error_text, "internal", e.what());
    throw;
  }

  sl->menu = menu;
  sl->command_receipt = receipt;
  sl->command_stages = std::move(stages);
  move_to(*sl, StatusState::Offers);
  sl->offers_ready = Clock::now();
  sl->bus.publish("offers", to_json(menu));
  return menu;
}

// ---- selection -------------------------------------------------------------

AssetDelivery Pipeline::select_offer(const std::string& session_id, const std::string& offer_ref) {
  const auto receipt = Clock::now();
  auto sl = slot(session_id);
  std::lock_guard work(sl->work);
  std::string language;
  {
    std::lock_guard lock(sl->state);
    if (sl->s.status != StatusState::Offers)
      throw InvalidState(std::string("no offers to choose from while ") + to_string(sl->s.status));
    language = sl->s.language;
  }
  const OfferRef ref = OfferRef::parse(offer_ref);
  const OfferMenu& menu = sl->menu;
  const std::size_t list_size = ref.list == OfferRef::List::requested     ? menu.requested.size()
                                : ref.list == OfferRef::List::recommended ? menu.recommended.size()
                                                                          : menu.repository.size();
  if (ref.index >= list_size) throw InvalidChoice("offer '" + offer_ref + "' is not on the menu");

  std::map<std::string, double> stages = sl->command_stages;
  stages["awaiting_selection"] = seconds_between(sl->offers_ready, receipt);
  move_to(*sl, StatusState::Baking);

  AssetDelivery out;
  std::string obj;
  auto fail = [&](const std::string& label, const std::exception& e, bool count_generation) {
    ++sl->pending_errors;
    MetricsRecord r;
    r.task_kind = count_generation ? TaskKind::generate : TaskKind::retrieve;
    r.label = label;
    r.success = false;
    r.error_count = sl->pending_errors;
    r.user_retries = sl->pending_user_retries;
    r.stage_timings = stages;
    const auto now = Clock::now();
    r.completion_time = seconds_between(sl->command_receipt, now);
    r.responsiveness = seconds_between(receipt, now);
    sl->pending_errors = 0;
    sl->pending_user_retries = 0;
    {
      std::lock_guard lock(sl->state);
      sl->s.metrics.push_back(r);
    }
    sl->bus.publish("error", {{"message", e.what()}, {"offer_ref", offer_ref}});
    sl->bus.publish("metrics", to_json(r));
    move_to(*sl, StatusState::Offers);
  };

  if (ref.list == OfferRef::List::repository) {
    const auto& hit = menu.repository[ref.index];
    out.from_repository = true;
    out.asset_id = hit.record.id;
    out.label = hit.record.label;
    out.mesh_ref = hit.record.mesh_ref;
    try {
      obj = timed(stages, "load", [&] { return store_->read_blob(hit.record.mesh_ref); });
      auto mesh = timed(stages, "parse", [&] { return geometry::parse_obj(obj); });
      out.stats.vertex_count = mesh.vertex_count();
      out.stats.face_count = mesh.face_count();
      out.stats.bbox_diagonal = geometry::bounding_box(mesh).diagonal();
    } catch (const std::exception& e) {
      fail(out.label, e, false);
      throw;
    }
  } else {
    const OfferItem& item = ref.list == OfferRef::List::requested ? menu.requested[ref.index]
                                                                  : menu.recommended[ref.index];
    out.label = item.label;
    geometry::TriMesh simplified;
    try {
      auto model = timed(stages, "generate",
                         [&] { return backends_.generator->generate(item.label, config_.generation); });
      simplified = timed(stages, "simplify", [&] { return geometry::simplify(model.mesh, config_.simplify).first; });
    } catch (const std::exception& e) {
      fail(out.label, e, true);
      throw GenerationFailed(std::string("could not generate '") + item.label + "': " + e.what());
    }
    simplified.name = item.label;
    obj = timed(stages, "serialize", [&] { return geometry::write_obj(simplified); });
    out.stats.vertex_count = simplified.vertex_count();
    out.stats.face_count = simplified.face_count();
    out.stats.bbox_diagonal = geometry::bounding_box(simplified).diagonal();
    timed(stages, "store", [&] {
      vectorstore::AssetRecord rec;
      rec.id = store_->allocate_id();
      rec.label = item.label;
      rec.language = language;
      rec.embedding = item.embedding;
      rec.created_at = unix_millis();
      rec.source = vectorstore::AssetSource::generated;
      out.asset_id = store_->upsert_with_blob(std::move(rec), obj);
      out.mesh_ref = store_->get(out.asset_id)->mesh_ref;
      if (config_.persist_store && !store_->config().data_dir.empty()) store_->persist();
      return 0;
    });
  }
  out.stats.serialized_size = obj.size();

  const auto ready = Clock::now();
  {
    std::lock_guard lock(sl->state);
    if (std::find(sl->s.placed_assets.begin(), sl->s.placed_assets.end(), out.asset_id) ==
        sl->s.placed_assets.end()) {
      sl->s.placed_assets.push_back(out.asset_id);
      sl->s.placements[out.asset_id] = Placement{};
    }
  }
  sl->placed_labels.push_back(out.label);
  move_to(*sl, StatusState::Presenting);
  sl->bus.publish("asset", {{"asset_id", out.asset_id},
                            {"label", out.label},
                            {"mesh_url", "/v1/assets/" + out.asset_id + ".obj"},
                            {"from_repository", out.from_repository},
                            {"vertices", out.stats.vertex_count},
                            {"faces", out.stats.face_count},
                            {"bytes", out.stats.serialized_size}});

  try {
    out.confirmation_audio_ref = timed(stages, "confirm_tts", [&] {
      return speak(replace_all(config_.confirmation_text, "{label}", out.label), language);
    });
  } catch (const std::exception&) {
    ++sl->pending_errors;  // asset is delivered, the spoken confirmation is not
  }
  const auto done = Clock::now();

  MetricsRecord r;
  r.task_kind = out.from_repository ? TaskKind::retrieve : TaskKind::generate;
  r.asset_id = out.asset_id;
  r.label = out.label;
  r.completion_time = seconds_between(sl->command_receipt, done);
  r.responsiveness = seconds_between(receipt, ready);
  r.error_count = sl->pending_errors;
  r.user_retries = sl->pending_user_retries;
  r.success = sl->pending_errors == 0;
  r.mesh_file_size = obj.size();
  r.stage_timings = std::move(stages);
  sl->pending_errors = 0;
  sl->pending_user_retries = 0;
  {
    std::lock_guard lock(sl->state);
    sl->s.metrics.push_back(r);
  }
  sl->bus.publish("metrics", to_json(r));
  out.metrics = std::move(r);
  return out;
}

// ---- placement -------------------------------------------------------------

Placement Pipeline::transform_asset(const std::string& session_id, const std::string& asset_id,
                                    const TransformOp& op) {
  const auto receipt = Clock::now();
  auto sl = slot(session_id);
  std::lock_guard work(sl->work);
  Placement updated;
  {
    std::lock_guard lock(sl->state);
    auto it = sl->s.placements.find(asset_id);
    if (it == sl->s.placements.end()) throw UnknownAsset(asset_id);
    updated = transformed(it->second, op);
    it->second = updated;
  }
  const auto done = Clock::now();
  MetricsRecord r;
  r.task_kind = TaskKind::customize;
  r.asset_id = asset_id;
  r.completion_time = seconds_between(receipt, done);
  r.responsiveness = r.completion_time;
  r.stage_timings["transform"] = r.completion_time;
  {
    std::lock_guard lock(sl->state);
    sl->s.metrics.push_back(r);
  }
  json placement = to_json(updated);
  placement["asset_id"] = asset_id;
  sl->bus.publish("placement", placement);
  return updated;
}

// ---- metrics ---------------------------------------------------------------

std::vector<MetricsRecord> Pipeline::all_metrics() const {
  std::vector<std::shared_ptr<Slot>> slots;
  {
    std::shared_lock lock(sessions_mutex_);
    for (const auto& [id, s] : sessions_) slots.push_back(s);
  }
  std::vector<MetricsRecord> all;
  for (const auto& s : slots) {
    std::lock_guard lock(s->state);
    all.insert(all.end(), s->s.metrics.begin(), s->s.metrics.end());
  }
  return all;
}

MetricsSummary Pipeline::metrics_summary() const { return summarize(all_metrics()); }

MetricsSummary Pipeline::session_metrics_summary(const std::string& session_id) const {
  auto sl = slot(session_id);
  std::lock_guard lock(sl->state);
  return summarize(sl->s.metrics);
}

std::string Pipeline::asset_obj(const std::string& asset_id) const {
  auto rec = store_->get(asset_id);
  if (!rec) throw UnknownAsset(asset_id);
  try {
    return store_->read_blob(rec->mesh_ref);
  } catch (const NotFound&) {
    throw UnknownAsset(asset_id);
  }
}

}  // namespace speech3d::pipeline
