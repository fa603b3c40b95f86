#include "speech3d/pipeline/session.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "speech3d/errors.hpp"

namespace speech3d::pipeline {

using nlohmann::json;

std::string OfferRef::to_string() const {
  const char* name = list == List::requested ? "requested" : list == List::recommended ? "recommended" : "repository";
  return std::string(name) + ":" + std::to_string(index);
}

OfferRef OfferRef::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InvalidChoice("offer reference '" + text + "' has no ':'");
  const std::string list = text.substr(0, colon);
  const std::string num = text.substr(colon + 1);
  OfferRef r;
  if (list == "requested") r.list = List::requested;
  else if (list == "recommended") r.list = List::recommended;
  else if (list == "repository") r.list = List::repository;
  else throw InvalidChoice("unknown offer list '" + list + "'");
  if (num.empty() || num.size() > 6 || !std::all_of(num.begin(), num.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw InvalidChoice("bad offer index '" + num + "'");
  r.index = std::stoul(num);
  return r;
}

// ---- placement -------------------------------------------------------------

namespace {

Quaternion multiply(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

// q and -q are the same rotation; keep the one with w >= 0.
Quaternion canonical(Quaternion q) {
  const double eps = 1e-15;
  bool flip = q.w < -eps;
  if (std::fabs(q.w) <= eps) {
    for (double c : {q.x, q.y, q.z}) {
      if (std::fabs(c) > eps) {
        flip = c < 0;
        break;
      }
    }
  }
  if (flip) q = {-q.w, -q.x, -q.y, -q.z};
  return q;
}

}  // namespace

Placement transformed(const Placement& p, const TransformOp& op) {
  Placement out = p;
  if (auto* m = std::get_if<MoveOp>(&op)) {
    out.position = p.position + m->delta;
  } else if (auto* s = std::get_if<ScaleOp>(&op)) {
    const auto& f = s->factors;
    if (!(f.x > 0) || !(f.y > 0) || !(f.z > 0) || !std::isfinite(f.x) || !std::isfinite(f.y) || !std::isfinite(f.z))
      throw NonPositiveScale();
    out.scale = {p.scale.x * f.x, p.scale.y * f.y, p.scale.z * f.z};
  } else if (auto* r = std::get_if<RotateOp>(&op)) {
    const double len = geometry::norm(r->axis);
    if (!(len > 0) || !std::isfinite(len) || !std::isfinite(r->angle_radians))
      throw InvalidArgument("rotation axis must be a finite non-zero vector");
    const double h = 0.5 * r->angle_radians;
    const double s = std::sin(h) / len;
    const Quaternion q{std::cos(h), r->axis.x * s, r->axis.y * s, r->axis.z * s};
    out.orientation = canonical(multiply(q, p.orientation));
  }
  return out;
}

TransformOp inverse(const TransformOp& op) {
  if (auto* m = std::get_if<MoveOp>(&op)) return MoveOp{geometry::Vec3{0, 0, 0} - m->delta};
  if (auto* s = std::get_if<ScaleOp>(&op)) {
    const auto& f = s->factors;
    if (!(f.x > 0) || !(f.y > 0) || !(f.z > 0)) throw NonPositiveScale();
    return ScaleOp{{1.0 / f.x, 1.0 / f.y, 1.0 / f.z}};
  }
  const auto& r = std::get<RotateOp>(op);
  return RotateOp{r.axis, -r.angle_radians};
}

// ---- metrics ---------------------------------------------------------------

const char* to_string(TaskKind k) {
  switch (k) {
    case TaskKind::generate: return "generate";
    case TaskKind::retrieve: return "retrieve";
    case TaskKind::customize: return "customize";
  }
  return "?";
}

double MetricsRecord::stage_total() const {
  double t = 0;
  for (const auto& [stage, d] : stage_timings) t += d;
  return t;
}

MetricsSummary summarize(const std::vector<MetricsRecord>& records) {
  MetricsSummary s;
  s.tasks = records.size();
  if (records.empty()) return s;
  double completion = 0, resp = 0, overhead = 0, mesh = 0;
  std::size_t ok = 0, mesh_n = 0;
  long errors = 0;
  for (const auto& r : records) {
    completion += r.completion_time;
    resp += r.responsiveness;
    overhead += r.overhead();
    s.max_overhead = std::max(s.max_overhead, r.overhead());
    ok += r.success ? 1 : 0;
    errors += r.error_count;
    if (r.mesh_file_size > 0) {
      mesh += static_cast<double>(r.mesh_file_size);
      ++mesh_n;
    }
    if (r.task_kind == TaskKind::generate) ++s.generation_calls;
  }
  const double n = static_cast<double>(records.size());
  s.mean_completion_time = completion / n;
  s.success_rate = 100.0 * static_cast<double>(ok) / n;
  s.error_rate = static_cast<double>(errors) / n;
  s.mean_responsiveness = resp / n;
  s.mean_overhead = overhead / n;
  s.mean_mesh_size_bytes = mesh_n ? mesh / static_cast<double>(mesh_n) : 0.0;
  return s;
}

// ---- json ------------------------------------------------------------------

json to_json(const adapters::ExtractedObject& o) {
  json attrs = json::object();
  for (const auto& [k, v] : o.attributes) attrs[k] = v;
  return {{"name", o.name}, {"attrs", attrs}};
}

json to_json(const OfferMenu& menu) {
  auto items = [](const std::vector<OfferItem>& list, const char* prefix) {
    json arr = json::array();
    for (std::size_t i = 0; i < list.size(); ++i)
      arr.push_back({{"offer_ref", std::string(prefix) + ":" + std::to_string(i)},
                     {"label", list[i].label},
                     {"object", to_json(list[i].object)}});
    return arr;
  };
  json repo = json::array();
  for (std::size_t i = 0; i < menu.repository.size(); ++i) {
    const auto& h = menu.repository[i];
    repo.push_back({{"offer_ref", "repository:" + std::to_string(i)},
                    {"label", h.record.label},
                    {"asset_id", h.record.id},
                    {"similarity", h.similarity}});
  }
  return {{"requested", items(menu.requested, "requested")},
          {"recommended", items(menu.recommended, "recommended")},
          {"repository", repo}};
}

json to_json(const Placement& p) {
  return {{"position", {p.position.x, p.position.y, p.position.z}},
          {"scale", {p.scale.x, p.scale.y, p.scale.z}},
          {"orientation", {p.orientation.w, p.orientation.x, p.orientation.y, p.orientation.z}}};
}

json to_json(const MetricsRecord& r) {
  return {{"task_kind", to_string(r.task_kind)},
          {"asset_id", r.asset_id},
          {"label", r.label},
          {"completion_time", r.completion_time},
          {"success", r.success},
          {"error_count", r.error_count},
          {"user_retries", r.user_retries},
          {"responsiveness", r.responsiveness},
          {"mesh_file_size", r.mesh_file_size},
          {"stage_timings", r.stage_timings},
          {"overhead", r.overhead()}};
}

json to_json(const MetricsSummary& s) {
  return {{"tasks", s.tasks},
          {"mean_completion_time_s", s.mean_completion_time},
          {"success_rate_pct", s.success_rate},
          {"error_rate", s.error_rate},
          {"mean_responsiveness_s", s.mean_responsiveness},
          {"mean_mesh_size_mb", s.mean_mesh_size_bytes / 1e6},
          {"mean_overhead_s", s.mean_overhead},
          {"max_overhead_s", s.max_overhead},
          {"generation_tasks", s.generation_calls}};
}

}  // namespace speech3d::pipeline
