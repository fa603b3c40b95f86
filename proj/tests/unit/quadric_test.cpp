#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "speech3d/geometry/quadric.hpp"
#include "speech3d/geometry/shapes.hpp"

using namespace speech3d::geometry;

namespace {

TriMesh single_triangle() {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 2}};
  return m;
}

}  // namespace

TEST(Quadric, PointOnPlaneHasZeroError) {
  const auto qs = vertex_quadrics(single_triangle(), {.boundary_penalty = 0.0});
  ASSERT_EQ(qs.size(), 3u);
  for (const auto& q : qs) {
    EXPECT_NEAR(q.error({0.3, -7.0, 0.0}), 0.0, 1e-12);
    EXPECT_NEAR(q.error({12.0, 4.5, 0.0}), 0.0, 1e-12);
  }
}

TEST(Quadric, SquaredDistanceToPlane) {
  const auto q = Quadric::from_point_normal({0, 0, 0}, {0, 0, 1});
  EXPECT_DOUBLE_EQ(q.error({0, 0, 2}), 4.0);
  const auto qs = vertex_quadrics(single_triangle(), {.boundary_penalty = 0.0});
  EXPECT_DOUBLE_EQ(qs[0].error({0, 0, 2}), 4.0);
}

TEST(Quadric, CubeCornerHandSum) {
  const TriMesh cube = unit_cube();
  const auto qs = vertex_quadrics(cube);
  // Vertex 6 = (1,1,1) lies on exactly three triangles, one per adjacent face
  // plane x=1, y=1, z=1. At the center each plane is 0.5 away: 3 * 0.25.
  EXPECT_NEAR(qs[6].error({1, 1, 1}), 0.0, 1e-12);
  EXPECT_NEAR(qs[6].error({0.5, 0.5, 0.5}), 0.75, 1e-12);
}

TEST(Quadric, ClosedMeshGetsNoBoundaryTerms) {
  const TriMesh cube = unit_cube();
  const auto with = vertex_quadrics(cube, {.boundary_penalty = 1000.0});
  const auto without = vertex_quadrics(cube, {.boundary_penalty = 0.0});
  for (std::size_t i = 0; i < with.size(); ++i) {
    EXPECT_EQ(with[i].coefficients(), without[i].coefficients());
  }
}

TEST(Quadric, BoundaryEdgeAddsPerpendicularPlane) {
  const auto qs = vertex_quadrics(single_triangle(), {.boundary_penalty = 1000.0});
  // Vertex 0 has boundary edges along x (0-1) and y (0-2); the constraint
  // planes are y=0 and x=0, each weighted 1000.
  EXPECT_NEAR(qs[0].error({0.1, 0.0, 0.0}), 1000.0 * 0.01, 1e-9);
  EXPECT_NEAR(qs[0].error({0.0, 0.0, 0.0}), 0.0, 1e-12);
}

TEST(Quadric, ZeroAreaFaceContributesNothing) {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  m.faces = {{0, 1, 2}};
  for (const auto& q : vertex_quadrics(m)) EXPECT_TRUE(q.is_zero());
}

TEST(Quadric, AreaWeightingScalesByArea) {
  const auto qs = vertex_quadrics(single_triangle(), {.area_weighted = true, .boundary_penalty = 0.0});
  EXPECT_NEAR(qs[0].error({0, 0, 2}), 0.5 * 4.0, 1e-12);
}

// Property: plane quadrics are PSD and additive.
TEST(Quadric, PsdAndAdditiveAtRandomPoints) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int plane = 0; plane < 20; ++plane) {
    const Quadric q1 = Quadric::from_point_normal({u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)});
    const Quadric q2 = Quadric::from_point_normal({u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)},
                                                  std::abs(u(rng)));
    const Quadric sum = q1 + q2;
    for (int i = 0; i < 1000; ++i) {
      const Vec3 p{u(rng), u(rng), u(rng)};
      ASSERT_GE(q1.error(p), -1e-9);
      ASSERT_GE(sum.error(p), -1e-9);
      const double expected = q1.error(p) + q2.error(p);
      ASSERT_NEAR(sum.error(p), expected, 1e-9 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST(Quadric, SphereVertexQuadricsArePsd) {
  const auto mesh = uv_sphere({.slices = 20, .stacks = 10});
  const auto qs = vertex_quadrics(mesh);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const auto& q : qs) {
    for (int i = 0; i < 50; ++i) ASSERT_GE(q.error({u(rng), u(rng), u(rng)}), -1e-9);
  }
}

TEST(CollapseCost, CoplanarEndpointsCostNothing) {
  const TriMesh flat = grid(4);
  const auto qs = vertex_quadrics(flat, {.boundary_penalty = 0.0});
  // Interior vertices 6 and 7 of the 5x5 grid.
  const auto placement = collapse_cost(qs[6] + qs[7], flat.vertices[6], flat.vertices[7]);
  EXPECT_NEAR(placement.cost, 0.0, 1e-12);
}

TEST(CollapseCost, ZeroQuadricFallsBackToMidpoint) {
  const auto placement = collapse_cost(Quadric{}, {0, 0, 0}, {2, 4, 6});
  EXPECT_EQ(placement.cost, 0.0);
  EXPECT_EQ(placement.position, (Vec3{1, 2, 3}));
}

TEST(CollapseCost, CubeEdgeMatchesGridSearch) {
  const TriMesh cube = unit_cube();
  const auto qs = vertex_quadrics(cube);
  const Vec3 v1 = cube.vertices[6];  // (1,1,1)
  const Vec3 v2 = cube.vertices[5];  // (1,0,1)
  const Quadric q = qs[6] + qs[5];
  const auto placement = collapse_cost(q, v1, v2);

  // Hand derivation: q = 3(x-1)^2 + (y-1)^2 + 2y^2 + 3(z-1)^2, minimized at
  // y = 1/3 with value 2/3. Candidates: v1 -> 2, v2 -> 1, midpoint -> 0.75.
  EXPECT_NEAR(placement.cost, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(placement.position.y, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(q.error(v1), 2.0, 1e-12);
  EXPECT_NEAR(q.error(v2), 1.0, 1e-12);
  EXPECT_NEAR(q.error((v1 + v2) * 0.5), 0.75, 1e-12);

  // Dense 21^3 grid over the edge bounding box +- 0.5.
  double grid_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      for (int k = 0; k <= 20; ++k) {
        const Vec3 p{0.5 + i * 0.05, -0.5 + j * 0.1, 0.5 + k * 0.05};
        grid_min = std::min(grid_min, q.error(p));
      }
    }
  }
  EXPECT_LE(placement.cost, grid_min + 1e-12);
  EXPECT_LE(grid_min - placement.cost, 0.01);
}

// Property: the placement never costs more than v1, v2 or the midpoint.
TEST(CollapseCost, NeverWorseThanFallbackCandidates) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 2000; ++trial) {
    Quadric q;
    const int planes = 1 + trial % 4;
    for (int i = 0; i < planes; ++i) {
      q += Quadric::from_point_normal({u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)});
    }
    const Vec3 v1{u(rng), u(rng), u(rng)};
    const Vec3 v2{u(rng), u(rng), u(rng)};
    const auto placement = collapse_cost(q, v1, v2);
    const double eps = 1e-9 * std::max(1.0, placement.cost);
    ASSERT_GE(placement.cost, 0.0);
    ASSERT_LE(placement.cost, q.error(v1) + eps);
    ASSERT_LE(placement.cost, q.error(v2) + eps);
    ASSERT_LE(placement.cost, q.error((v1 + v2) * 0.5) + eps);
  }
}
