#pragma once

#include <Eigen/Core>
#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace animesh {

/// Static triangle mesh: rest-pose vertex positions plus 0-based face
/// indices. Immutable by convention after construction; everything
/// downstream (rigging, driving, regulation) shares it freely.
struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }

  /// Throws ValidationError unless: every face index is in range, no face
  /// repeats a vertex, vertex count >= 3 and face count >= 1.
  void validate() const;

  Eigen::Vector3d centroid() const;
};

/// Parse an ASCII OBJ. Only `v` and `f` records are consumed; `vt`/`vn`
/// and other records are dropped. Polygon faces are fan-triangulated:
/// (v0,v1,v2), (v0,v2,v3), ... Errors carry the 1-based line number.
TriangleMesh load_obj(const std::filesystem::path& path);

/// Write an ASCII OBJ with positions at 9 decimal digits, 1-based indices.
/// A reload reproduces faces exactly and positions within 1e-9.
void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

/// The OBJ text save_obj would produce; also the preimage of
/// mesh_content_hash.
std::string obj_text(const TriangleMesh& mesh);

/// FNV-1a 64 over obj_text(mesh), as 16 hex digits. Used to pin the mesh
/// referenced by an animation document.
std::string mesh_content_hash(const TriangleMesh& mesh);

}  // namespace animesh
