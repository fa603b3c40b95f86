#include "speech3d/adapters/backends.hpp"

#include <algorithm>
#include <cctype>

#include "speech3d/errors.hpp"

namespace speech3d::adapters {

void CallLog::record(CallRecord r) {
  std::lock_guard lock(mutex_);
  calls_.push_back(std::move(r));
}

std::vector<CallRecord> CallLog::snapshot() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::size_t CallLog::count(std::string_view backend) const {
  std::lock_guard lock(mutex_);
  return static_cast<std::size_t>(std::count_if(
      calls_.begin(), calls_.end(), [&](const CallRecord& r) { return r.backend == backend; }));
}

std::size_t CallLog::total() const {
  std::lock_guard lock(mutex_);
  return calls_.size();
}

void CallLog::clear() {
  std::lock_guard lock(mutex_);
  calls_.clear();
}

namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

TranscriptResult SpeechToText::transcribe(std::string_view wav, std::string_view hint) {
  return logged(kTranscribe, [&] {
    TranscriptResult r = do_transcribe(wav, hint);
    r.was_translated = r.detected_language != "en";
    return r;
  });
}

std::string TextToSpeech::synthesize(std::string_view text, std::string_view lang) {
  if (blank(text)) throw InvalidArgument("text to synthesize is empty");
  return logged(kTts, [&] { return do_synthesize(text, lang); });
}

std::vector<ExtractedObject> ObjectExtractor::extract(std::string_view text) {
  if (blank(text)) throw InvalidArgument("command text is empty");
  return logged(kExtract, [&] {
    auto raw = do_extract(text);
    std::vector<ExtractedObject> out;
    out.reserve(raw.size());
    for (auto& o : raw) {
      if (blank(o.name)) continue;
      out.push_back(normalized(std::move(o)));
    }
    return out;
  });
}

std::vector<ExtractedObject> Recommender::recommend(const std::vector<ExtractedObject>& context,
                                                    const std::vector<std::string>& history,
                                                    std::size_t max_n) {
  if (max_n < 1) throw InvalidArgument("max_n must be >= 1");
  return logged(kRecommend, [&] {
    auto raw = do_recommend(context, history, max_n);
    std::vector<ExtractedObject> out;
    for (auto& o : raw) {
      if (out.size() == max_n) break;
      if (blank(o.name)) continue;
      auto n = normalized(std::move(o));
      bool in_context = std::any_of(context.begin(), context.end(), [&](const ExtractedObject& c) {
        return lower(c.name) == n.name;
      });
      bool repeated = std::any_of(out.begin(), out.end(),
                                  [&](const ExtractedObject& e) { return e.name == n.name; });
      if (!in_context && !repeated) out.push_back(std::move(n));
    }
    return out;
  });
}

GeneratedModel ModelGenerator::generate(std::string_view prompt, const GenerationParams& params) {
  if (blank(prompt)) throw InvalidArgument("generation prompt is empty");
  params.validate();
  return logged(kGenerate, [&] { return do_generate(prompt, params); });
}

vectorstore::Embedding Embedder::embed(std::string_view label) {
  if (blank(label)) throw InvalidArgument("text to embed is empty");
  return logged(kEmbed, [&] {
    auto v = do_embed(label);
    if (v.size() != dimension_) throw DimensionMismatch(dimension_, v.size());
    return v;
  });
}

}  // namespace speech3d::adapters
