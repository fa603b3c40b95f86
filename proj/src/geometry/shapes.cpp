#include "speech3d/geometry/shapes.hpp"

#include <cmath>
#include <numbers>

namespace speech3d::geometry {

TriMesh unit_cube() {
  TriMesh m;
  m.name = "cube";
  // 0:(0,0,0) 1:(1,0,0) 2:(1,1,0) 3:(0,1,0) 4:(0,0,1) 5:(1,0,1) 6:(1,1,1) 7:(0,1,1)
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  m.faces = {
      {0, 2, 1}, {0, 3, 2},  // z = 0, diagonal 0-2
      {4, 5, 7}, {5, 6, 7},  // z = 1, diagonal 5-7
      {0, 1, 5}, {0, 5, 4},  // y = 0, diagonal 0-5
      {3, 7, 2}, {2, 7, 6},  // y = 1, diagonal 2-7
      {0, 4, 7}, {0, 7, 3},  // x = 0, diagonal 0-7
      {1, 2, 5}, {2, 6, 5},  // x = 1, diagonal 2-5
  };
  return m;
}

TriMesh icosahedron() {
  TriMesh m;
  m.name = "icosahedron";
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  const Vec3 raw[12] = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                        {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                        {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (const auto& v : raw) m.vertices.push_back(normalized(v));
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  return m;
}

TriMesh uv_sphere(const SphereShape& shape) {
  TriMesh m;
  m.name = "sphere";
  const std::size_t slices = std::max<std::size_t>(shape.slices, 3);
  const std::size_t stacks = std::max<std::size_t>(shape.stacks, 2);
  const double pi = std::numbers::pi;

  auto radius_at = [&](double theta, double phi) {
    const double s = std::sin(theta);
    return shape.radius * (1.0 + shape.bulge * std::sin(shape.lobes * phi) * s * s);
  };

  m.vertices.push_back({0.0, 0.0, shape.radius});
  for (std::size_t i = 1; i < stacks; ++i) {
    const double theta = pi * static_cast<double>(i) / static_cast<double>(stacks);
    for (std::size_t j = 0; j < slices; ++j) {
      const double phi = 2.0 * pi * static_cast<double>(j) / static_cast<double>(slices);
      const double r = radius_at(theta, phi);
      m.vertices.push_back({r * std::sin(theta) * std::cos(phi), r * std::sin(theta) * std::sin(phi),
                            r * std::cos(theta)});
    }
  }
  m.vertices.push_back({0.0, 0.0, -shape.radius});

  const auto south = static_cast<std::uint32_t>(m.vertices.size() - 1);
  auto ring = [&](std::size_t i, std::size_t j) {
    return static_cast<std::uint32_t>(1 + (i - 1) * slices + (j % slices));
  };
  for (std::size_t j = 0; j < slices; ++j) m.faces.push_back({0, ring(1, j), ring(1, j + 1)});
  for (std::size_t i = 1; i + 1 < stacks; ++i) {
    for (std::size_t j = 0; j < slices; ++j) {
      m.faces.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
      m.faces.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
    }
  }
  for (std::size_t j = 0; j < slices; ++j) {
    m.faces.push_back({ring(stacks - 1, j), south, ring(stacks - 1, j + 1)});
  }
  return m;
}

TriMesh torus(std::size_t rings, std::size_t sides, double major_radius, double minor_radius) {
  TriMesh m;
  m.name = "torus";
  const double pi = std::numbers::pi;
  for (std::size_t i = 0; i < rings; ++i) {
    const double u = 2.0 * pi * static_cast<double>(i) / static_cast<double>(rings);
    for (std::size_t j = 0; j < sides; ++j) {
      const double v = 2.0 * pi * static_cast<double>(j) / static_cast<double>(sides);
      const double r = major_radius + minor_radius * std::cos(v);
      m.vertices.push_back({r * std::cos(u), r * std::sin(u), minor_radius * std::sin(v)});
    }
  }
  auto at = [&](std::size_t i, std::size_t j) {
    return static_cast<std::uint32_t>((i % rings) * sides + (j % sides));
  };
  for (std::size_t i = 0; i < rings; ++i) {
    for (std::size_t j = 0; j < sides; ++j) {
      m.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
      m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
    }
  }
  return m;
}

TriMesh grid(std::size_t n, double size) {
  TriMesh m;
  m.name = "grid";
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      m.vertices.push_back({size * static_cast<double>(j) / static_cast<double>(n),
                            size * static_cast<double>(i) / static_cast<double>(n), 0.0});
    }
  }
  auto at = [&](std::size_t i, std::size_t j) { return static_cast<std::uint32_t>(i * (n + 1) + j); };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      m.faces.push_back({at(i, j), at(i, j + 1), at(i + 1, j + 1)});
      m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i + 1, j)});
    }
  }
  return m;
}

}  // namespace speech3d::geometry
