#pragma once

#include <cstddef>
#include <string>
#include <utility>

#include "speech3d/geometry/mesh.hpp"

namespace speech3d::geometry {

struct SimplifyConfig {
  std::size_t target_vertices = 1000;
  std::size_t batch_passes = 5;
  double boundary_penalty = 1000.0;
  // Quality budget, as a fraction of the input bounding-box diagonal. It does
  // not stop decimation; the report flags runs whose worst collapse exceeded it.
  double max_relative_error = 0.02;
  bool area_weighted = false;

  // Throws InvalidArgument when target_vertices < 4 or batch_passes < 1.
  void validate() const;
};

struct SimplifyReport {
  std::size_t input_vertices = 0;
  std::size_t input_faces = 0;
  std::size_t output_vertices = 0;
  std::size_t output_faces = 0;
  std::size_t passes_executed = 0;
  std::size_t collapses = 0;
  std::size_t rejected_collapses = 0;
  double max_collapse_cost = 0.0;
  bool exceeded_error_budget = false;
  // True when the loop ran out of valid collapses before reaching the target.
  bool stopped_early = false;
  std::string note;
};

// Greedy quadric edge-collapse decimation, run in cfg.batch_passes passes whose
// vertex budgets shrink geometrically from the input count to the target.
// Collapses that flip a face, duplicate a face, or leave an edge with more
// than two faces are rejected. Output is deterministic for a given input.
//
// Throws EmptyMeshError when the mesh has no faces.
std::pair<TriMesh, SimplifyReport> simplify(const TriMesh& mesh, const SimplifyConfig& cfg = {});

// Vertex budgets for each pass, ending at `target`.
std::vector<std::size_t> pass_budgets(std::size_t input_vertices, std::size_t target,
                                      std::size_t passes);

}  // namespace speech3d::geometry
