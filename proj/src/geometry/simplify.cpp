#include "speech3d/geometry/simplify.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "speech3d/errors.hpp"
#include "speech3d/geometry/quadric.hpp"

namespace speech3d::geometry {

void SimplifyConfig::validate() const {
  if (target_vertices < 4) throw InvalidArgument("target_vertices must be >= 4");
  if (batch_passes < 1) throw InvalidArgument("batch_passes must be >= 1");
  if (boundary_penalty < 0.0) throw InvalidArgument("boundary_penalty must be >= 0");
  if (max_relative_error < 0.0) throw InvalidArgument("max_relative_error must be >= 0");
}

std::vector<std::size_t> pass_budgets(std::size_t input_vertices, std::size_t target,
                                      std::size_t passes) {
  std::vector<std::size_t> budgets;
  if (passes == 0) return budgets;
  if (input_vertices <= target) return std::vector<std::size_t>(passes, input_vertices);
  const double ratio = static_cast<double>(target) / static_cast<double>(input_vertices);
  for (std::size_t k = 1; k <= passes; ++k) {
    const double f = std::pow(ratio, static_cast<double>(k) / static_cast<double>(passes));
    auto b = static_cast<std::size_t>(std::llround(static_cast<double>(input_vertices) * f));
    budgets.push_back(std::max(b, target));
  }
  budgets.back() = target;
  return budgets;
}

namespace {

struct Candidate {
  double cost;
  std::uint32_t a;  // a < b
  std::uint32_t b;
  std::uint32_t gen_a;
  std::uint32_t gen_b;
  Vec3 position;
};

// Orders the heap so the top is the lowest cost, then the lowest (a, b).
struct WorseThan {
  bool operator()(const Candidate& l, const Candidate& r) const {
    if (l.cost != r.cost) return l.cost > r.cost;
    if (l.a != r.a) return l.a > r.a;
    return l.b > r.b;
  }
};

struct EdgeUse {
  std::uint32_t other;
  int with_u = 0;
  int with_v = 0;
  int shared = 0;
};

class Decimator {
 public:
  Decimator(const TriMesh& mesh, const SimplifyConfig& cfg)
      : positions_(mesh.vertices), faces_(mesh.faces) {
    QuadricOptions qopt;
    qopt.area_weighted = cfg.area_weighted;
    qopt.boundary_penalty = cfg.boundary_penalty;
    quadrics_ = vertex_quadrics(mesh, qopt);
    face_alive_.assign(faces_.size(), true);
    generation_.assign(positions_.size(), 0);
    incident_.resize(positions_.size());
    for (std::uint32_t fi = 0; fi < faces_.size(); ++fi) {
      for (auto v : faces_[fi]) incident_[v].push_back(fi);
    }
    vertex_alive_.resize(positions_.size());
    for (std::size_t v = 0; v < positions_.size(); ++v) {
      vertex_alive_[v] = !incident_[v].empty();
      if (vertex_alive_[v]) ++alive_count_;
    }
  }

  std::size_t alive_count() const { return alive_count_; }

  // Runs collapses until at most `budget` vertices remain. Returns false when
  // the queue drained first.
  bool run_pass(std::size_t budget, SimplifyReport& report) {
    heap_ = {};
    for (std::uint32_t fi = 0; fi < faces_.size(); ++fi) {
      if (!face_alive_[fi]) continue;
      const Face& f = faces_[fi];
      for (int k = 0; k < 3; ++k) {
        const auto a = f[k];
        const auto b = f[(k + 1) % 3];
        // Each undirected edge once: from the face where it runs a -> b with a < b,
        // or from any face when the opposite orientation never occurs.
        if (a < b || !has_directed_edge(b, a)) push_candidate(a, b);
      }
    }
    while (alive_count_ > budget) {
      if (heap_.empty()) return false;
      Candidate c = heap_.top();
      heap_.pop();
      if (!vertex_alive_[c.a] || !vertex_alive_[c.b]) continue;
      if (generation_[c.a] != c.gen_a || generation_[c.b] != c.gen_b) continue;
      if (!try_collapse(c.a, c.b, c.position)) {
        ++report.rejected_collapses;
        continue;
      }
      ++report.collapses;
      report.max_collapse_cost = std::max(report.max_collapse_cost, c.cost);
      for (auto w : neighbours(c.a)) push_candidate(c.a, w);
    }
    return true;
  }

  TriMesh compact(std::string name) const {
    TriMesh out;
    out.name = std::move(name);
    std::vector<std::uint32_t> remap(positions_.size(), 0);
    for (std::uint32_t v = 0; v < positions_.size(); ++v) {
      if (!vertex_alive_[v]) continue;
      remap[v] = static_cast<std::uint32_t>(out.vertices.size());
      out.vertices.push_back(positions_[v]);
    }
    for (std::uint32_t fi = 0; fi < faces_.size(); ++fi) {
      if (!face_alive_[fi]) continue;
      const Face& f = faces_[fi];
      out.faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
    }
    return out;
  }

 private:
  bool has_directed_edge(std::uint32_t from, std::uint32_t to) const {
    for (auto fi : incident_[from]) {
      const Face& f = faces_[fi];
      for (int k = 0; k < 3; ++k) {
        if (f[k] == from && f[(k + 1) % 3] == to) return true;
      }
    }
    return false;
  }

  void push_candidate(std::uint32_t a, std::uint32_t b) {
    if (a > b) std::swap(a, b);
    const auto placement = collapse_cost(quadrics_[a] + quadrics_[b], positions_[a], positions_[b]);
    heap_.push({placement.cost, a, b, generation_[a], generation_[b], placement.position});
  }

  std::vector<std::uint32_t> neighbours(std::uint32_t v) const {
    std::vector<std::uint32_t> out;
    for (auto fi : incident_[v]) {
      for (auto w : faces_[fi]) {
        if (w != v && std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  static bool contains(const Face& f, std::uint32_t v) {
    return f[0] == v || f[1] == v || f[2] == v;
  }

  // Merges `v` into `u` at `target`, or returns false if the collapse would
  // break an invariant.
  bool try_collapse(std::uint32_t u, std::uint32_t v, const Vec3& target) {
    if (alive_count_ <= 4) return false;

    // Per-neighbour edge multiplicities before and after the collapse.
    std::vector<EdgeUse> uses;
    auto use_of = [&uses](std::uint32_t w) -> EdgeUse& {
      for (auto& e : uses) {
        if (e.other == w) return e;
      }
      uses.push_back({w});
      return uses.back();
    };
    bool any_shared = false;
    for (auto fi : incident_[u]) {
      const Face& f = faces_[fi];
      const bool shared = contains(f, v);
      any_shared = any_shared || shared;
      for (auto w : f) {
        if (w == u || w == v) continue;
        auto& e = use_of(w);
        ++e.with_u;
        if (shared) ++e.shared;
      }
    }
    if (!any_shared) return false;
    for (auto fi : incident_[v]) {
      for (auto w : faces_[fi]) {
        if (w == u || w == v) continue;
        ++use_of(w).with_v;
      }
    }
    for (const auto& e : uses) {
      const int after = (e.with_u - e.shared) + (e.with_v - e.shared);
      if (after > 2 && after > std::max(e.with_u, e.with_v)) return false;
    }

    // Surviving faces of v must not coincide with a surviving face of u.
    std::vector<Face> u_faces;
    for (auto fi : incident_[u]) {
      if (!contains(faces_[fi], v)) u_faces.push_back(sorted_face(faces_[fi]));
    }
    for (auto fi : incident_[v]) {
      Face f = faces_[fi];
      if (contains(f, u)) continue;
      for (auto& x : f) {
        if (x == v) x = u;
      }
      if (std::find(u_faces.begin(), u_faces.end(), sorted_face(f)) != u_faces.end()) return false;
    }

    // No surviving face may flip or collapse to zero area.
    auto moved = [&](std::uint32_t x) -> const Vec3& {
      return (x == u || x == v) ? target : positions_[x];
    };
    for (auto vertex : {u, v}) {
      for (auto fi : incident_[vertex]) {
        const Face& f = faces_[fi];
        if (contains(f, u) && contains(f, v)) continue;
        const Vec3& p0 = positions_[f[0]];
        const Vec3 before = cross(positions_[f[1]] - p0, positions_[f[2]] - p0);
        const Vec3& q0 = moved(f[0]);
        const Vec3 after = cross(moved(f[1]) - q0, moved(f[2]) - q0);
        if (dot(before, after) < 0.0) return false;
        if (squared_norm(after) <= 1e-24 * squared_norm(before)) return false;
      }
    }

    // Apply.
    for (auto fi : std::vector<std::uint32_t>(incident_[u])) {
      if (!contains(faces_[fi], v)) continue;
      face_alive_[fi] = false;
      for (auto x : faces_[fi]) {
        auto& list = incident_[x];
        list.erase(std::remove(list.begin(), list.end(), fi), list.end());
      }
    }
    for (auto fi : incident_[v]) {
      for (auto& x : faces_[fi]) {
        if (x == v) x = u;
      }
      incident_[u].push_back(fi);
    }
    incident_[v].clear();
    positions_[u] = target;
    quadrics_[u] += quadrics_[v];
    vertex_alive_[v] = false;
    ++generation_[u];
    ++generation_[v];
    --alive_count_;
    return true;
  }

  std::vector<Vec3> positions_;
  std::vector<Face> faces_;
  std::vector<Quadric> quadrics_;
  std::vector<bool> face_alive_;
  std::vector<bool> vertex_alive_;
  std::vector<std::uint32_t> generation_;
  std::vector<std::vector<std::uint32_t>> incident_;
  std::size_t alive_count_ = 0;
  std::priority_queue<Candidate, std::vector<Candidate>, WorseThan> heap_;
};

}  // namespace

std::pair<TriMesh, SimplifyReport> simplify(const TriMesh& mesh, const SimplifyConfig& cfg) {
  cfg.validate();
  if (mesh.faces.empty()) throw EmptyMeshError("cannot simplify a mesh without faces");
  validate(mesh);

  SimplifyReport report;
  report.input_vertices = mesh.vertex_count();
  report.input_faces = mesh.face_count();

  if (mesh.vertex_count() <= cfg.target_vertices) {
    report.output_vertices = report.input_vertices;
    report.output_faces = report.input_faces;
    report.note = "input already at or below target; no collapses";
    return {mesh, report};
  }

  Decimator decimator(mesh, cfg);
  for (auto budget : pass_budgets(mesh.vertex_count(), cfg.target_vertices, cfg.batch_passes)) {
    if (decimator.alive_count() <= budget) continue;
    ++report.passes_executed;
    if (!decimator.run_pass(budget, report)) {
      report.stopped_early = true;
      report.note = "no valid collapse remains at " + std::to_string(decimator.alive_count()) +
                    " vertices";
      break;
    }
  }

  TriMesh out = decimator.compact(mesh.name);
  report.output_vertices = out.vertex_count();
  report.output_faces = out.face_count();
  const double diagonal = bounding_box(mesh).diagonal();
  report.exceeded_error_budget =
      std::sqrt(report.max_collapse_cost) > cfg.max_relative_error * diagonal;
  if (report.note.empty()) {
    report.note = std::to_string(report.collapses) + " collapses in " +
                  std::to_string(report.passes_executed) + " passes";
  }
  return {std::move(out), report};
}

}  // namespace speech3d::geometry
