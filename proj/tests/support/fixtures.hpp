#pragma once

// Mesh, rig, and motion generators shared by the test binaries.

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include <Eigen/Geometry>

#include "animesh/deform.hpp"
#include "animesh/mesh.hpp"
#include "animesh/rig.hpp"
#include "animesh/rng.hpp"

namespace fixtures {

using animesh::MotionParams;
using animesh::Rig;
using animesh::Rng;
using animesh::TriangleMesh;

inline TriangleMesh minimal_triangle() {
  TriangleMesh mesh;
  mesh.vertices = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  mesh.faces = {{0, 1, 2}};
  return mesh;
}

// Open tube: `segs` + 1 rings of `ring` vertices, quads split into two
// triangles. Every vertex has a nonempty one-ring.
inline TriangleMesh make_cylinder(int ring, int segs, double radius = 0.5,
                                  double half_height = 1.0) {
  TriangleMesh mesh;
  const double pi = 3.14159265358979323846;
  for (int s = 0; s <= segs; ++s) {
    const double y = half_height * (-1.0 + 2.0 * s / segs);
    for (int r = 0; r < ring; ++r) {
      const double a = 2.0 * pi * r / ring;
      mesh.vertices.push_back({radius * std::cos(a), y, radius * std::sin(a)});
    }
  }
  for (int s = 0; s < segs; ++s) {
    for (int r = 0; r < ring; ++r) {
      const int a = s * ring + r;
      const int b = s * ring + (r + 1) % ring;
      const int c = a + ring;
      const int d = b + ring;
      mesh.faces.push_back({a, b, d});
      mesh.faces.push_back({a, d, c});
    }
  }
  return mesh;
}

// Closed cube surface [-1,1]^3 sampled on an (n+1)^3 lattice (surface cells
// only), vertices welded across edges and corners.
inline TriangleMesh grid_cube(int n) {
  TriangleMesh mesh;
  std::map<std::array<int, 3>, int> index;
  auto vertex_id = [&](int i, int j, int k) {
    const std::array<int, 3> key{i, j, k};
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(mesh.vertices.size());
    index.emplace(key, id);
    mesh.vertices.push_back({-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n, -1.0 + 2.0 * k / n});
    return id;
  };
  auto emit_quad = [&](int a, int b, int c, int d) {
    mesh.faces.push_back({a, b, c});
    mesh.faces.push_back({a, c, d});
  };
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      // -z and +z faces (winding flipped so normals point outward)
      emit_quad(vertex_id(u, v, 0), vertex_id(u, v + 1, 0), vertex_id(u + 1, v + 1, 0),
                vertex_id(u + 1, v, 0));
      emit_quad(vertex_id(u, v, n), vertex_id(u + 1, v, n), vertex_id(u + 1, v + 1, n),
                vertex_id(u, v + 1, n));
      // -y and +y
      emit_quad(vertex_id(u, 0, v), vertex_id(u + 1, 0, v), vertex_id(u + 1, 0, v + 1),
                vertex_id(u, 0, v + 1));
      emit_quad(vertex_id(u, n, v), vertex_id(u, n, v + 1), vertex_id(u + 1, n, v + 1),
                vertex_id(u + 1, n, v));
      // -x and +x
      emit_quad(vertex_id(0, u, v), vertex_id(0, u, v + 1), vertex_id(0, u + 1, v + 1),
                vertex_id(0, u + 1, v));
      emit_quad(vertex_id(n, u, v), vertex_id(n, u + 1, v), vertex_id(n, u + 1, v + 1),
                vertex_id(n, u, v + 1));
    }
  }
  return mesh;
}

inline TriangleMesh icosphere(int subdivisions) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh mesh;
  mesh.vertices = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                   {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                   {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (Eigen::Vector3d& v : mesh.vertices) v.normalize();
  mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int round = 0; round < subdivisions; ++round) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int id = static_cast<int>(mesh.vertices.size());
      midpoint.emplace(key, id);
      mesh.vertices.push_back((mesh.vertices[a] + mesh.vertices[b]).normalized());
      return id;
    };
    std::vector<std::array<int, 3>> faces;
    faces.reserve(mesh.faces.size() * 4);
    for (const std::array<int, 3>& f : mesh.faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      faces.push_back({f[0], ab, ca});
      faces.push_back({f[1], bc, ab});
      faces.push_back({f[2], ca, bc});
      faces.push_back({ab, bc, ca});
    }
    mesh.faces = std::move(faces);
  }
  return mesh;
}

// Two-cluster rig splitting the mesh at `threshold` along `axis`
// (0=x, 1=y, 2=z); cluster 1 is the strictly-greater side.
inline Rig split_rig(const TriangleMesh& mesh, int axis, double threshold) {
  Rig rig;
  rig.n_clusters = 2;
  rig.cluster_of.resize(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    rig.cluster_of[i] = mesh.vertices[i][axis] > threshold ? 1 : 0;
  rig.handles = animesh::handle_points(mesh, rig.cluster_of);
  return rig;
}

inline Eigen::Vector4d axis_angle_quat(const Eigen::Vector3d& axis, double angle) {
  const Eigen::Vector3d u = axis.normalized();
  const double half = angle / 2.0;
  return {std::cos(half), std::sin(half) * u.x(), std::sin(half) * u.y(),
          std::sin(half) * u.z()};
}

inline Eigen::Matrix3d rotation_about(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

inline Eigen::Matrix3d random_rotation(Rng& rng) {
  const Eigen::Vector3d axis{rng.normal(), rng.normal(), rng.normal()};
  return rotation_about(axis.norm() > 0 ? axis : Eigen::Vector3d::UnitX(),
                        rng.uniform() * 2.0 * 3.14159265358979323846);
}

inline MotionParams random_motion(Rng& rng, int frames, int clusters, double translation_scale,
                                  double angle_scale) {
  MotionParams motion = MotionParams::identity(frames, clusters);
  for (int n = 0; n < frames; ++n) {
    for (int k = 0; k < clusters; ++k) {
      motion.translations[n][k] = translation_scale * Eigen::Vector3d{rng.normal(), rng.normal(),
                                                                      rng.normal()};
      Eigen::Vector3d axis{rng.normal(), rng.normal(), rng.normal()};
      if (axis.norm() < 1e-12) axis = Eigen::Vector3d::UnitY();
      motion.rotations[n][k] = axis_angle_quat(axis, angle_scale * rng.uniform());
    }
  }
  return motion;
}

// The regulation fixture: a gridded cube split into two clusters at y=0 with
// the top half twisted about +y. Driving it produces a discontinuity along
// the seam for regulation to repair.
struct TwistedCube {
  TriangleMesh mesh;
  Rig rig;
  MotionParams motion;  // frame 0 identity, frame 1 twisted
};

inline TwistedCube twisted_cube(int resolution = 6, double angle = 3.14159265358979323846 / 4) {
  TwistedCube fixture;
  fixture.mesh = grid_cube(resolution);
  fixture.rig = split_rig(fixture.mesh, 1, 0.0);
  fixture.motion = MotionParams::identity(2, 2);
  fixture.motion.rotations[1][1] = axis_angle_quat(Eigen::Vector3d::UnitY(), angle);
  return fixture;
}

}  // namespace fixtures
