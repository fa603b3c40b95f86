#pragma once

#include <array>
#include <vector>

#include "speech3d/geometry/mesh.hpp"

namespace speech3d::geometry {

// Symmetric 4x4 error form Q, stored as its 10 upper-triangle coefficients:
//
//   | a2 ab ac ad |
//   | ab b2 bc bd |
//   | ac bc c2 cd |
//   | ad bd cd d2 |
//
// error(p) = [p 1] Q [p 1]^T. For the plane ax+by+cz+d=0 with unit normal this
// is the squared distance of p to the plane.
class Quadric {
 public:
  Quadric() = default;

  static Quadric from_plane(double a, double b, double c, double d, double weight = 1.0);

  // Plane through `point` with normal `normal`; the normal is normalized first.
  // A zero normal yields the zero quadric.
  static Quadric from_point_normal(const Vec3& point, const Vec3& normal, double weight = 1.0);

  double error(const Vec3& p) const;

  Quadric& operator+=(const Quadric& o);
  friend Quadric operator+(Quadric a, const Quadric& b) { return a += b; }
  Quadric& operator*=(double s);

  const std::array<double, 10>& coefficients() const { return c_; }

  // Upper-left 3x3 block (row-major) and the linear term (ad, bd, cd).
  std::array<double, 9> linear_block() const;
  Vec3 linear_term() const { return {c_[3], c_[6], c_[8]}; }

  bool is_zero() const;

 private:
  // a2 ab ac ad b2 bc bd c2 cd d2
  std::array<double, 10> c_{};
};

struct QuadricOptions {
  bool area_weighted = false;
  double boundary_penalty = 1000.0;
};

// One quadric per vertex: the sum of incident face-plane quadrics, plus a
// perpendicular constraint plane (scaled by boundary_penalty) for each
// boundary edge. Zero-area faces contribute nothing.
std::vector<Quadric> vertex_quadrics(const TriMesh& mesh, const QuadricOptions& options = {});

struct CollapsePlacement {
  double cost = 0.0;
  Vec3 position;
};

// Minimizes p^T Q p for the merged vertex. Solves the 3x3 system when it is
// well conditioned; otherwise (|det| < 1e-12 relative to the block scale)
// picks the best of {midpoint, v1, v2}. The returned cost is never above the
// cost of v1, v2 or the midpoint, and never negative.
CollapsePlacement collapse_cost(const Quadric& q_sum, const Vec3& v1, const Vec3& v2);

}  // namespace speech3d::geometry
