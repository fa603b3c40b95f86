#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "speech3d/geometry/vec3.hpp"

namespace speech3d::geometry {

using Face = std::array<std::uint32_t, 3>;

// Indexed triangle mesh. Invariants (checked by validate()):
//  - every face index < vertex count
//  - faces have three distinct indices
//  - no two faces share the same vertex set
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::string name;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t face_count() const { return faces.size(); }
};

struct BoundingBox {
  Vec3 min;
  Vec3 max;

  double diagonal() const { return norm(max - min); }
};

// Throws InvalidMeshError naming the first violated invariant.
void validate(const TriMesh& mesh);

BoundingBox bounding_box(const TriMesh& mesh);

// Unnormalized face normal (length = 2 * area).
Vec3 face_normal(const TriMesh& mesh, const Face& f);

double face_area(const TriMesh& mesh, const Face& f);

double surface_area(const TriMesh& mesh);

// Face vertex set in ascending order, for duplicate detection.
Face sorted_face(const Face& f);

}  // namespace speech3d::geometry
