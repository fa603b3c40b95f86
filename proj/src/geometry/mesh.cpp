#include "speech3d/geometry/mesh.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "speech3d/errors.hpp"

namespace speech3d::geometry {

void validate(const TriMesh& mesh) {
  const auto n = mesh.vertices.size();
  std::set<Face> seen;
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const Face& f = mesh.faces[i];
    for (auto idx : f) {
      if (idx >= n) {
        throw InvalidMeshError("face " + std::to_string(i) + " references vertex " +
                               std::to_string(idx) + " of " + std::to_string(n));
      }
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      throw InvalidMeshError("face " + std::to_string(i) + " is degenerate");
    }
    if (!seen.insert(sorted_face(f)).second) {
      throw InvalidMeshError("face " + std::to_string(i) + " is a duplicate");
    }
  }
}

BoundingBox bounding_box(const TriMesh& mesh) {
  if (mesh.vertices.empty()) return {};
  constexpr double inf = std::numeric_limits<double>::infinity();
  BoundingBox box{{inf, inf, inf}, {-inf, -inf, -inf}};
  for (const auto& v : mesh.vertices) {
    box.min = {std::min(box.min.x, v.x), std::min(box.min.y, v.y), std::min(box.min.z, v.z)};
    box.max = {std::max(box.max.x, v.x), std::max(box.max.y, v.y), std::max(box.max.z, v.z)};
  }
  return box;
}

Vec3 face_normal(const TriMesh& mesh, const Face& f) {
  const Vec3& a = mesh.vertices[f[0]];
  return cross(mesh.vertices[f[1]] - a, mesh.vertices[f[2]] - a);
}

double face_area(const TriMesh& mesh, const Face& f) { return 0.5 * norm(face_normal(mesh, f)); }

double surface_area(const TriMesh& mesh) {
  double total = 0.0;
  for (const auto& f : mesh.faces) total += face_area(mesh, f);
  return total;
}

Face sorted_face(const Face& f) {
  Face s = f;
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace speech3d::geometry
