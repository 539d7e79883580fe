#include "animesh/laplacian.hpp"

#include <algorithm>
#include <map>

#include <Eigen/Geometry>

#include "animesh/errors.hpp"

namespace animesh {

CotanLaplacian cotangent_weights(const TriangleMesh& mesh, bool clamp_negative,
                                 double area_epsilon) {
  mesh.validate();

  // Accumulate 1/2 cot(angle opposite edge) per incident face.
  std::map<std::pair<int, int>, double> acc;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& tri = mesh.faces[f];
    const Eigen::Vector3d& a = mesh.vertices[tri[0]];
    const Eigen::Vector3d& b = mesh.vertices[tri[1]];
    const Eigen::Vector3d& c = mesh.vertices[tri[2]];
    double area2 = (b - a).cross(c - a).norm();  // twice the area
    if (0.5 * area2 < area_epsilon)
      throw ValidationError("degenerate triangle: face " + std::to_string(f) + " has area " +
                            std::to_string(0.5 * area2) + " < " + std::to_string(area_epsilon));
    for (int corner = 0; corner < 3; ++corner) {
      int vi = tri[corner];
      int vj = tri[(corner + 1) % 3];
      int vk = tri[(corner + 2) % 3];
      // Angle at vk is opposite edge (vi, vj); cot = dot / |cross|.
      Eigen::Vector3d u = mesh.vertices[vi] - mesh.vertices[vk];
      Eigen::Vector3d v = mesh.vertices[vj] - mesh.vertices[vk];
      double cot = u.dot(v) / area2;
      auto key = std::minmax(vi, vj);
      acc[{key.first, key.second}] += 0.5 * cot;
    }
  }

  CotanLaplacian lap;
  lap.edges.reserve(acc.size());
  lap.weights.reserve(acc.size());
  lap.one_rings.resize(mesh.vertex_count());
  lap.ring_weights.resize(mesh.vertex_count());
  for (const auto& [edge, w_raw] : acc) {
    double w = clamp_negative ? std::max(w_raw, 0.0) : w_raw;
    if (w < 0.0) lap.has_negative_weights = true;
    lap.edges.push_back(edge);
    lap.weights.push_back(w);
    lap.one_rings[edge.first].push_back(edge.second);
    lap.ring_weights[edge.first].push_back(w);
    lap.one_rings[edge.second].push_back(edge.first);
    lap.ring_weights[edge.second].push_back(w);
  }
  return lap;
}

}  // namespace animesh
