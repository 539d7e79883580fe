#pragma once

#include <vector>

#include "animesh/mesh.hpp"
#include "animesh/rng.hpp"

namespace animesh {

/// Animatable-form conversion of a mesh: a partition of the vertices into
/// clusters (one-hot pseudo-skinning weights), one handle point per cluster
/// at the cluster centroid, and the anchor vertices used by the rigidity
/// regulation's fidelity term.
struct Rig {
  std::vector<int> cluster_of;            // per-vertex cluster index in [0, n_clusters)
  std::vector<Eigen::Vector3d> handles;   // rest-pose cluster centroids
  int n_clusters = 0;
  std::vector<int> fps_anchors;           // distinct vertex indices; may be empty until sampled

  /// Checks sizes, the one-vertex-per-cluster floor, anchor validity, and
  /// that each handle is its cluster's centroid (to 1e-9).
  void validate(const TriangleMesh& mesh) const;
};

/// Number of clusters used when none is requested.
int default_cluster_count();  // 80

/// Fraction of vertices sampled as anchors when none is requested.
double default_fps_fraction();  // 0.1

/// Lloyd's algorithm with k-means++ seeding on the rest-pose vertex
/// positions. Deterministic for a given seed: nearest-centroid ties go to
/// the lowest cluster index, and a cluster that empties is repaired by
/// moving in the vertex farthest from its current centroid. Stops when the
/// assignment is stable or after 100 rounds. fps_anchors is left empty.
Rig kmeans_cluster(const TriangleMesh& mesh, int n_clusters, const Rng& seed);

/// Cluster centroids: h_k = sum of member vertices / member count.
std::vector<Eigen::Vector3d> handle_points(const TriangleMesh& mesh,
                                           const std::vector<int>& cluster_of);

/// Greedy Euclidean farthest point sampling over the rest-pose vertices,
/// starting from start_vertex. Picks max(1, round(fraction * vertex_count));
/// each step takes the vertex maximizing the distance to the chosen set,
/// lowest index on ties.
std::vector<int> fps_sample(const TriangleMesh& mesh, double fraction, int start_vertex = 0);

}  // namespace animesh
