#include "animesh/rig.hpp"

#include <algorithm>
#include <limits>

#include "animesh/errors.hpp"

namespace animesh {

int default_cluster_count() { return 80; }

double default_fps_fraction() { return 0.1; }

void Rig::validate(const TriangleMesh& mesh) const {
  const int nv = mesh.vertex_count();
  if (n_clusters < 1) throw ValidationError("rig: n_clusters must be >= 1");
  if (static_cast<int>(cluster_of.size()) != nv)
    throw ValidationError("rig: cluster_of size does not match vertex count");
  if (static_cast<int>(handles.size()) != n_clusters)
    throw ValidationError("rig: handle count does not match n_clusters");

  std::vector<int> counts(static_cast<std::size_t>(n_clusters), 0);
  for (int c : cluster_of) {
    if (c < 0 || c >= n_clusters) throw ValidationError("rig: cluster index out of range");
    ++counts[static_cast<std::size_t>(c)];
  }
  for (int k = 0; k < n_clusters; ++k)
    if (counts[static_cast<std::size_t>(k)] == 0)
      throw ValidationError("rig: cluster " + std::to_string(k) + " has no vertices");

  const std::vector<Eigen::Vector3d> centroids = handle_points(mesh, cluster_of);
  for (int k = 0; k < n_clusters; ++k) {
    if ((handles[static_cast<std::size_t>(k)] - centroids[static_cast<std::size_t>(k)]).norm() > 1e-9)
      throw ValidationError("rig: handle " + std::to_string(k) + " is not its cluster centroid");
  }

  std::vector<char> seen(static_cast<std::size_t>(nv), 0);
  for (int a : fps_anchors) {
    if (a < 0 || a >= nv) throw ValidationError("rig: anchor index out of range");
    if (seen[static_cast<std::size_t>(a)]) throw ValidationError("rig: repeated anchor index");
    seen[static_cast<std::size_t>(a)] = 1;
  }
}

std::vector<Eigen::Vector3d> handle_points(const TriangleMesh& mesh,
                                           const std::vector<int>& cluster_of) {
  if (cluster_of.size() != mesh.vertices.size())
    throw ValidationError("handle_points: cluster_of size does not match vertex count");
  int n_clusters = 0;
  for (int c : cluster_of) {
    if (c < 0) throw ValidationError("handle_points: negative cluster index");
    n_clusters = std::max(n_clusters, c + 1);
  }
  std::vector<Eigen::Vector3d> sums(static_cast<std::size_t>(n_clusters), Eigen::Vector3d::Zero());
  std::vector<int> counts(static_cast<std::size_t>(n_clusters), 0);
  for (std::size_t i = 0; i < cluster_of.size(); ++i) {
    sums[static_cast<std::size_t>(cluster_of[i])] += mesh.vertices[i];
    ++counts[static_cast<std::size_t>(cluster_of[i])];
  }
  for (int k = 0; k < n_clusters; ++k) {
    if (counts[static_cast<std::size_t>(k)] == 0)
      throw ValidationError("handle_points: cluster " + std::to_string(k) + " has no vertices");
    sums[static_cast<std::size_t>(k)] /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
  }
  return sums;
}

namespace {

// Squared distance from each vertex to the nearest of the chosen seeds.
void update_nearest_sq(const std::vector<Eigen::Vector3d>& pts, const Eigen::Vector3d& seed,
                       std::vector<double>& nearest_sq) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    nearest_sq[i] = std::min(nearest_sq[i], (pts[i] - seed).squaredNorm());
}

std::vector<Eigen::Vector3d> kmeanspp_seeds(const std::vector<Eigen::Vector3d>& pts,
                                            int n_clusters, Rng& rng) {
  std::vector<Eigen::Vector3d> seeds;
  seeds.reserve(static_cast<std::size_t>(n_clusters));
  seeds.push_back(pts[rng.uniform_index(pts.size())]);

  std::vector<double> nearest_sq(pts.size(), std::numeric_limits<double>::infinity());
  while (static_cast<int>(seeds.size()) < n_clusters) {
    update_nearest_sq(pts, seeds.back(), nearest_sq);
    double total = 0.0;
    for (double d : nearest_sq) total += d;
    std::size_t pick = 0;
    if (total > 0.0) {
      // Sample proportionally to squared distance from the chosen set.
      const double r = rng.uniform() * total;
      double acc = 0.0;
      pick = pts.size() - 1;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        acc += nearest_sq[i];
        if (acc >= r && nearest_sq[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      // All points coincide with a seed already; duplicates are repaired later.
      pick = rng.uniform_index(pts.size());
    }
    seeds.push_back(pts[pick]);
  }
  return seeds;
}

}  // namespace

Rig kmeans_cluster(const TriangleMesh& mesh, int n_clusters, const Rng& seed) {
  mesh.validate();
  const int nv = mesh.vertex_count();
  if (n_clusters < 1) throw ValidationError("kmeans_cluster: n_clusters must be >= 1");
  if (n_clusters > nv)
    throw ValidationError("kmeans_cluster: more clusters than vertices (" +
                          std::to_string(n_clusters) + " > " + std::to_string(nv) + ")");

  const std::vector<Eigen::Vector3d>& pts = mesh.vertices;
  Rng rng = seed;  // local copy; caller's stream is untouched
  std::vector<Eigen::Vector3d> centroids = kmeanspp_seeds(pts, n_clusters, rng);

  std::vector<int> assign(static_cast<std::size_t>(nv), -1);
  constexpr int kMaxRounds = 100;
  for (int round = 0; round < kMaxRounds; ++round) {
    bool changed = false;
    for (int i = 0; i < nv; ++i) {
      int best = 0;
      double best_sq = (pts[static_cast<std::size_t>(i)] - centroids[0]).squaredNorm();
      for (int k = 1; k < n_clusters; ++k) {
        const double d = (pts[static_cast<std::size_t>(i)] - centroids[static_cast<std::size_t>(k)]).squaredNorm();
        if (d < best_sq) {  // strict: ties keep the lowest index
          best_sq = d;
          best = k;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }

    // Repair empty clusters by stealing the vertex farthest from its centroid.
    std::vector<int> counts(static_cast<std::size_t>(n_clusters), 0);
    for (int c : assign) ++counts[static_cast<std::size_t>(c)];
    for (int k = 0; k < n_clusters; ++k) {
      if (counts[static_cast<std::size_t>(k)] > 0) continue;
      int donor = -1;
      double worst = -1.0;
      for (int i = 0; i < nv; ++i) {
        const int c = assign[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(c)] < 2) continue;
        const double d = (pts[static_cast<std::size_t>(i)] - centroids[static_cast<std::size_t>(c)]).squaredNorm();
        if (d > worst) {
          worst = d;
          donor = i;
        }
      }
      if (donor < 0)
        throw NumericalError("kmeans_cluster: cannot repair empty cluster " + std::to_string(k));
      --counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(donor)])];
      assign[static_cast<std::size_t>(donor)] = k;
      ++counts[static_cast<std::size_t>(k)];
      changed = true;
    }

    if (!changed) break;

    for (auto& c : centroids) c.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < nv; ++i) {
      centroids[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])] += pts[static_cast<std::size_t>(i)];
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    for (int k = 0; k < n_clusters; ++k)
      centroids[static_cast<std::size_t>(k)] /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
  }

  Rig rig;
  rig.cluster_of = std::move(assign);
  rig.n_clusters = n_clusters;
  rig.handles = handle_points(mesh, rig.cluster_of);
  return rig;
}

std::vector<int> fps_sample(const TriangleMesh& mesh, double fraction, int start_vertex) {
  mesh.validate();
  const int nv = mesh.vertex_count();
  if (!(fraction > 0.0) || fraction > 1.0)
    throw ValidationError("fps_sample: fraction must be in (0, 1]");
  if (start_vertex < 0 || start_vertex >= nv)
    throw ValidationError("fps_sample: start vertex out of range");

  const int count = std::max(1, static_cast<int>(std::llround(fraction * nv)));
  std::vector<int> picked;
  picked.reserve(static_cast<std::size_t>(count));
  picked.push_back(start_vertex);

  std::vector<double> nearest_sq(static_cast<std::size_t>(nv),
                                 std::numeric_limits<double>::infinity());
  while (static_cast<int>(picked.size()) < count) {
    const Eigen::Vector3d& last = mesh.vertices[static_cast<std::size_t>(picked.back())];
    int far = -1;
    double far_sq = -1.0;
    for (int i = 0; i < nv; ++i) {
      double& d = nearest_sq[static_cast<std::size_t>(i)];
      d = std::min(d, (mesh.vertices[static_cast<std::size_t>(i)] - last).squaredNorm());
      if (d > far_sq) {  // strict: ties keep the lowest index
        far_sq = d;
        far = i;
      }
    }
    picked.push_back(far);
  }
  return picked;
}

}  // namespace animesh
