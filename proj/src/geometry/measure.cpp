#include "speech3d/geometry/measure.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "speech3d/errors.hpp"
#include "speech3d/geometry/obj.hpp"

namespace speech3d::geometry {

MeshStats mesh_stats(const TriMesh& mesh) {
  MeshStats s;
  s.vertex_count = mesh.vertex_count();
  s.face_count = mesh.face_count();
  s.serialized_size = write_obj(mesh).size();
  s.bbox_diagonal = bounding_box(mesh).diagonal();
  return s;
}

// Region-based closest point (Ericson, Real-Time Collision Detection 5.1.5).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = dot(ab, ap);
  const double d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp);
  const double d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double denom = d1 - d3;
    return denom != 0.0 ? a + ab * (d1 / denom) : a;
  }

  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp);
  const double d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double denom = d2 - d6;
    return denom != 0.0 ? a + ac * (d2 / denom) : a;
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double denom = (d4 - d3) + (d5 - d6);
    return denom != 0.0 ? b + (c - b) * ((d4 - d3) / denom) : b;
  }

  const double sum = va + vb + vc;
  if (sum == 0.0) return a;
  const double inv = 1.0 / sum;
  return a + ab * (vb * inv) + ac * (vc * inv);
}

namespace {

struct Box {
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};

  void grow(const Vec3& p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  void grow(const Box& b) {
    grow(b.lo);
    grow(b.hi);
  }
  double squared_distance(const Vec3& p) const {
    auto axis = [](double v, double l, double h) {
      if (v < l) return l - v;
      if (v > h) return v - h;
      return 0.0;
    };
    const double dx = axis(p.x, lo.x, hi.x);
    const double dy = axis(p.y, lo.y, hi.y);
    const double dz = axis(p.z, lo.z, hi.z);
    return dx * dx + dy * dy + dz * dz;
  }
};

// Bounding volume hierarchy over triangles for nearest-surface queries.
class TriangleTree {
 public:
  explicit TriangleTree(const TriMesh& mesh) : mesh_(mesh) {
    order_.resize(mesh.faces.size());
    std::iota(order_.begin(), order_.end(), 0u);
    boxes_.resize(mesh.faces.size());
    centroids_.resize(mesh.faces.size());
    for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
      for (auto v : mesh.faces[i]) boxes_[i].grow(mesh.vertices[v]);
      const auto& f = mesh.faces[i];
      centroids_[i] = (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) * (1.0 / 3.0);
    }
    if (!order_.empty()) build(0, order_.size());
  }

  double squared_distance(const Vec3& p) const {
    double best = std::numeric_limits<double>::infinity();
    if (nodes_.empty()) return best;
    std::vector<std::uint32_t> stack{0};
    while (!stack.empty()) {
      const Node& n = nodes_[stack.back()];
      stack.pop_back();
      if (n.box.squared_distance(p) >= best) continue;
      if (n.count > 0) {
        for (std::uint32_t i = n.first; i < n.first + n.count; ++i) {
          const auto& f = mesh_.faces[order_[i]];
          const Vec3 q = closest_point_on_triangle(p, mesh_.vertices[f[0]], mesh_.vertices[f[1]],
                                                   mesh_.vertices[f[2]]);
          best = std::min(best, squared_norm(q - p));
        }
        continue;
      }
      const Node& l = nodes_[n.left];
      const Node& r = nodes_[n.left + 1];
      // Visit the nearer child first (pushed last).
      if (l.box.squared_distance(p) < r.box.squared_distance(p)) {
        stack.push_back(n.left + 1);
        stack.push_back(n.left);
      } else {
        stack.push_back(n.left);
        stack.push_back(n.left + 1);
      }
    }
    return best;
  }

 private:
  struct Node {
    Box box;
    std::uint32_t left = 0;   // index of left child; right is left + 1
    std::uint32_t first = 0;  // leaf range into order_
    std::uint32_t count = 0;  // > 0 for leaves
  };

  void build(std::size_t first, std::size_t last) {
    struct Task {
      std::uint32_t node;
      std::size_t first;
      std::size_t last;
    };
    nodes_.push_back({});
    std::vector<Task> tasks{{0, first, last}};
    while (!tasks.empty()) {
      const Task t = tasks.back();
      tasks.pop_back();
      Box box;
      Box centroid_box;
      for (std::size_t i = t.first; i < t.last; ++i) {
        box.grow(boxes_[order_[i]]);
        centroid_box.grow(centroids_[order_[i]]);
      }
      nodes_[t.node].box = box;
      if (t.last - t.first <= 4) {
        nodes_[t.node].first = static_cast<std::uint32_t>(t.first);
        nodes_[t.node].count = static_cast<std::uint32_t>(t.last - t.first);
        continue;
      }
      const Vec3 extent = centroid_box.hi - centroid_box.lo;
      int axis = 0;
      if (extent.y > extent.x) axis = 1;
      if (extent.z > (axis == 0 ? extent.x : extent.y)) axis = 2;
      auto key = [&](std::uint32_t f) {
        const Vec3& c = centroids_[f];
        return axis == 0 ? c.x : axis == 1 ? c.y : c.z;
      };
      const std::size_t mid = (t.first + t.last) / 2;
      std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(t.first),
                       order_.begin() + static_cast<std::ptrdiff_t>(mid),
                       order_.begin() + static_cast<std::ptrdiff_t>(t.last),
                       [&](std::uint32_t a, std::uint32_t b) {
                         return key(a) < key(b) || (key(a) == key(b) && a < b);
                       });
      const auto left = static_cast<std::uint32_t>(nodes_.size());
      nodes_.push_back({});
      nodes_.push_back({});
      nodes_[t.node].left = left;
      tasks.push_back({left, t.first, mid});
      tasks.push_back({left + 1, mid, t.last});
    }
  }

  const TriMesh& mesh_;
  std::vector<std::uint32_t> order_;
  std::vector<Box> boxes_;
  std::vector<Vec3> centroids_;
  std::vector<Node> nodes_;
};

double unit_interval(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

double geometric_error(const TriMesh& original, const TriMesh& simplified, std::size_t samples,
                       std::uint64_t seed) {
  if (samples < 100) throw InvalidArgument("geometric_error needs at least 100 samples");
  if (original.faces.empty() || simplified.faces.empty()) {
    throw EmptyMeshError("geometric_error needs non-empty meshes");
  }
  std::vector<double> cumulative(original.faces.size());
  double total = 0.0;
  for (std::size_t i = 0; i < original.faces.size(); ++i) {
    total += face_area(original, original.faces[i]);
    cumulative[i] = total;
  }
  if (total <= 0.0) throw InvalidMeshError("original mesh has zero surface area");

  const TriangleTree tree(simplified);
  std::mt19937_64 rng(seed);
  double sum = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double pick = unit_interval(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const Face& f = original.faces[static_cast<std::size_t>(it - cumulative.begin())];
    const double r1 = std::sqrt(unit_interval(rng));
    const double r2 = unit_interval(rng);
    const Vec3& a = original.vertices[f[0]];
    const Vec3& b = original.vertices[f[1]];
    const Vec3& c = original.vertices[f[2]];
    const Vec3 p = a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2);
    sum += std::sqrt(tree.squared_distance(p));
  }
  const double diagonal = bounding_box(original).diagonal();
  return diagonal > 0.0 ? (sum / static_cast<double>(samples)) / diagonal : 0.0;
}

}  // namespace speech3d::geometry
