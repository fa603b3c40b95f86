#include "speech3d/geometry/quadric.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace speech3d::geometry {

Quadric Quadric::from_plane(double a, double b, double c, double d, double weight) {
  Quadric q;
  q.c_ = {a * a, a * b, a * c, a * d, b * b, b * c, b * d, c * c, c * d, d * d};
  q *= weight;
  return q;
}

Quadric Quadric::from_point_normal(const Vec3& point, const Vec3& normal, double weight) {
  const Vec3 n = normalized(normal);
  if (n == Vec3{}) return {};
  return from_plane(n.x, n.y, n.z, -dot(n, point), weight);
}

double Quadric::error(const Vec3& p) const {
  const auto& [a2, ab, ac, ad, b2, bc, bd, c2, cd, d2] = c_;
  return a2 * p.x * p.x + 2.0 * ab * p.x * p.y + 2.0 * ac * p.x * p.z + 2.0 * ad * p.x +
         b2 * p.y * p.y + 2.0 * bc * p.y * p.z + 2.0 * bd * p.y + c2 * p.z * p.z +
         2.0 * cd * p.z + d2;
}

Quadric& Quadric::operator+=(const Quadric& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Quadric& Quadric::operator*=(double s) {
  for (auto& v : c_) v *= s;
  return *this;
}

std::array<double, 9> Quadric::linear_block() const {
  return {c_[0], c_[1], c_[2], c_[1], c_[4], c_[5], c_[2], c_[5], c_[7]};
}

bool Quadric::is_zero() const {
  return std::all_of(c_.begin(), c_.end(), [](double v) { return v == 0.0; });
}

std::vector<Quadric> vertex_quadrics(const TriMesh& mesh, const QuadricOptions& options) {
  std::vector<Quadric> quadrics(mesh.vertices.size());
  // Directed edge -> incident face, to find edges used by only one face.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<int, std::size_t>> edge_use;

  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const Face& f = mesh.faces[fi];
    const Vec3 n = face_normal(mesh, f);
    const double twice_area = norm(n);
    if (twice_area > 0.0) {
      const double weight = options.area_weighted ? 0.5 * twice_area : 1.0;
      const Quadric q = Quadric::from_point_normal(mesh.vertices[f[0]], n, weight);
      for (auto v : f) quadrics[v] += q;
    }
    for (int k = 0; k < 3; ++k) {
      auto a = f[k];
      auto b = f[(k + 1) % 3];
      auto key = std::minmax(a, b);
      auto& [count, face] = edge_use[{key.first, key.second}];
      ++count;
      face = fi;
    }
  }

  if (options.boundary_penalty <= 0.0) return quadrics;
  for (const auto& [edge, use] : edge_use) {
    if (use.first != 1) continue;
    const Face& f = mesh.faces[use.second];
    const Vec3 n = face_normal(mesh, f);
    if (squared_norm(n) == 0.0) continue;
    const Vec3& pa = mesh.vertices[edge.first];
    const Vec3& pb = mesh.vertices[edge.second];
    // Plane containing the edge, perpendicular to the face.
    const Vec3 constraint = cross(pb - pa, n);
    const Quadric q = Quadric::from_point_normal(pa, constraint, options.boundary_penalty);
    quadrics[edge.first] += q;
    quadrics[edge.second] += q;
  }
  return quadrics;
}

namespace {

double det3(const std::array<double, 9>& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

}  // namespace

CollapsePlacement collapse_cost(const Quadric& q_sum, const Vec3& v1, const Vec3& v2) {
  const Vec3 mid = (v1 + v2) * 0.5;
  CollapsePlacement best{q_sum.error(mid), mid};
  for (const Vec3& p : {v1, v2}) {
    const double e = q_sum.error(p);
    if (e < best.cost) best = {e, p};
  }

  const auto m = q_sum.linear_block();
  double scale = 0.0;
  for (double v : m) scale = std::max(scale, std::abs(v));
  const double det = det3(m);
  if (scale > 0.0 && std::abs(det) >= 1e-12 * scale * scale * scale) {
    // Cramer's rule on A p = -b.
    const Vec3 b = -q_sum.linear_term();
    auto replaced = [&](int col) {
      auto r = m;
      r[col] = b.x;
      r[3 + col] = b.y;
      r[6 + col] = b.z;
      return det3(r) / det;
    };
    const Vec3 p{replaced(0), replaced(1), replaced(2)};
    if (std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z)) {
      const double e = q_sum.error(p);
      if (e < best.cost) best = {e, p};
    }
  }
  best.cost = std::max(best.cost, 0.0);
  return best;
}

}  // namespace speech3d::geometry
