#pragma once

#include <cstddef>

#include "speech3d/geometry/mesh.hpp"

namespace speech3d::geometry {

// Unit cube [0,1]^3, 8 vertices and 12 outward-facing triangles. Face
// diagonals all touch the corners (0,0,0), (1,1,0), (1,0,1), (0,1,1); the
// other four corners each belong to exactly three triangles.
TriMesh unit_cube();

// Regular icosahedron inscribed in the unit sphere (12 vertices, 20 faces).
TriMesh icosahedron();

struct SphereShape {
  std::size_t slices = 166;  // longitudinal segments
  std::size_t stacks = 85;   // latitudinal bands (stacks - 1 vertex rings)
  double radius = 1.0;
  // Smooth radial perturbation r * (1 + bulge * sin(lobes * phi) * sin(theta)^2).
  double bulge = 0.0;
  int lobes = 0;
};

// Closed UV sphere: (stacks - 1) * slices + 2 vertices, 2 * slices * (stacks - 1) faces.
// Default shape gives 13,946 vertices and 27,888 faces.
TriMesh uv_sphere(const SphereShape& shape = {});

// Closed torus with rings * sides vertices.
TriMesh torus(std::size_t rings, std::size_t sides, double major_radius, double minor_radius);

// Open square grid in z = 0 with (n + 1)^2 vertices.
TriMesh grid(std::size_t n, double size = 1.0);

}  // namespace speech3d::geometry
