#pragma once

#include <string>
#include <string_view>

#include "speech3d/geometry/mesh.hpp"

namespace speech3d::geometry {

// Parses the Wavefront OBJ subset used for generated models:
//   v x y z [w...]      positions (extra components ignored)
//   f i j k [l ...]     faces; `i/t/n` and `i//n` forms accepted, polygons fan-triangulated
//   # ...               comments
//   vn vt o g s mtllib usemtl   ignored
// Negative indices count back from the current vertex count. Faces that
// reference a vertex twice, and repeats of an earlier face, are dropped so the
// result always satisfies the TriMesh invariants.
//
// Throws ParseError (malformed line), IndexError (index out of range) and
// EmptyMeshError (no vertices or no faces).
TriMesh parse_obj(std::string_view text);

// `v %.6f %.6f %.6f` lines then `f %d %d %d` lines (1-based), `\n` terminated.
std::string write_obj(const TriMesh& mesh);

}  // namespace speech3d::geometry
