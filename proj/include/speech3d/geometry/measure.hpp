#pragma once

#include <cstddef>
#include <cstdint>

#include "speech3d/geometry/mesh.hpp"

namespace speech3d::geometry {

struct MeshStats {
  std::size_t vertex_count = 0;
  std::size_t face_count = 0;
  std::size_t serialized_size = 0;  // bytes of write_obj output
  double bbox_diagonal = 0.0;
};

MeshStats mesh_stats(const TriMesh& mesh);

// Closest point on triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Mean distance from `samples` area-uniform points on `original` to the
// surface of `simplified`, divided by the bounding-box diagonal of `original`.
// Deterministic for a given seed. Requires samples >= 100.
double geometric_error(const TriMesh& original, const TriMesh& simplified, std::size_t samples,
                       std::uint64_t seed = 0x5eed);

}  // namespace speech3d::geometry
