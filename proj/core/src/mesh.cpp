#include "animesh/mesh.hpp"

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "animesh/errors.hpp"

namespace animesh {

void TriangleMesh::validate() const {
  if (vertex_count() < 3)
    throw ValidationError("mesh has " + std::to_string(vertex_count()) +
                          " vertices; at least 3 required");
  if (face_count() < 1) throw ValidationError("mesh has no faces");
  for (int f = 0; f < face_count(); ++f) {
    const auto& tri = faces[f];
    for (int c = 0; c < 3; ++c) {
      if (tri[c] < 0 || tri[c] >= vertex_count())
        throw ValidationError("face " + std::to_string(f) + " references vertex " +
                              std::to_string(tri[c]) + " outside [0, " +
                              std::to_string(vertex_count()) + ")");
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw ValidationError("face " + std::to_string(f) + " references the same vertex twice");
  }
}

Eigen::Vector3d TriangleMesh::centroid() const {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& v : vertices) c += v;
  return vertices.empty() ? c : Eigen::Vector3d(c / static_cast<double>(vertices.size()));
}

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& path, int line, const std::string& what) {
  throw ValidationError(path.string() + ":" + std::to_string(line) + ": " + what);
}

// First integer of an OBJ face token such as "3", "3/1" or "3/1/2".
int face_vertex_index(const std::string& token, const std::filesystem::path& path, int line) {
  std::size_t slash = token.find('/');
  std::string head = slash == std::string::npos ? token : token.substr(0, slash);
  try {
    std::size_t used = 0;
    int idx = std::stoi(head, &used);
    if (used != head.size()) throw std::invalid_argument(head);
    return idx;
  } catch (const std::exception&) {
    parse_fail(path, line, "malformed face index '" + token + "'");
  }
}

}  // namespace

TriangleMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");

  TriangleMesh mesh;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ss >> x >> y >> z)) parse_fail(path, lineno, "vertex record needs 3 coordinates");
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string token;
      while (ss >> token) {
        int idx = face_vertex_index(token, path, lineno);
        if (idx <= 0) parse_fail(path, lineno, "face index must be positive, got '" + token + "'");
        if (idx > static_cast<int>(mesh.vertices.size()))
          parse_fail(path, lineno,
                     "face index " + std::to_string(idx) + " exceeds vertex count " +
                         std::to_string(mesh.vertices.size()));
        poly.push_back(idx - 1);
      }
      if (poly.size() < 3) parse_fail(path, lineno, "face record needs at least 3 indices");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k)
        mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
    }
    // vt/vn/usemtl/... tolerated and dropped
  }

  if (mesh.vertices.empty() || mesh.faces.empty())
    throw ValidationError("'" + path.string() + "' contains no usable mesh (v/f records)");
  mesh.validate();
  return mesh;
}

std::string obj_text(const TriangleMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 48 + mesh.faces.size() * 24);
  char buf[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.9f %.9f %.9f\n", v.x(), v.y(), v.z());
    out += buf;
  }
  for (const auto& f : mesh.faces) {
    std::snprintf(buf, sizeof buf, "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
    out += buf;
  }
  return out;
}

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  mesh.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << obj_text(mesh);
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string mesh_content_hash(const TriangleMesh& mesh) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : obj_text(mesh)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace animesh
