#pragma once

#include <utility>
#include <vector>

#include "animesh/mesh.hpp"

namespace animesh {

/// Per-edge cotangent weights plus one-ring adjacency.
///
/// Each unordered edge (i, j) with i < j is stored once; w_ij = w_ji is
/// implicit. Interior edges carry 1/2 (cot a + cot b) over the two angles
/// opposite the edge, boundary edges the single 1/2 cot a term. one_rings
/// and ring_weights are aligned: ring_weights[i][m] is the weight of edge
/// (i, one_rings[i][m]).
struct CotanLaplacian {
  std::vector<std::pair<int, int>> edges;
  std::vector<double> weights;
  std::vector<std::vector<int>> one_rings;
  std::vector<std::vector<double>> ring_weights;
  // True when any stored weight is negative. Clamped construction never
  // sets it: the flag describes the weights in use, not the input mesh.
  bool has_negative_weights = false;

  int edge_count() const { return static_cast<int>(edges.size()); }
};

/// Cotangent weights for every edge of the mesh. Angles (hence weights) are
/// invariant under rigid transforms and uniform scaling. Faces with area
/// below area_epsilon abort with a ValidationError naming the face.
///
/// Obtuse triangles produce negative cotangents; they are kept unless
/// clamp_negative is set, which floors each edge weight at 0.
CotanLaplacian cotangent_weights(const TriangleMesh& mesh, bool clamp_negative = false,
                                 double area_epsilon = 1e-12);

}  // namespace animesh
