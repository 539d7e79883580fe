#include "animesh/scene.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <utility>

#include "json.hpp"

#include "animesh/errors.hpp"

namespace animesh {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

const Json& member(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) schema_error(path + "." + key, "missing field");
  return *it;
}

int as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) schema_error(path, "expected an integer");
  return j.get<int>();
}

std::uint64_t as_uint64(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) schema_error(path, "expected a nonnegative integer");
  if (!j.is_number_unsigned() && j.get<long long>() < 0)
    schema_error(path, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

double as_double(const Json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  return j.get<double>();
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) schema_error(path, "expected a string");
  return j.get<std::string>();
}

const Json& as_array(const Json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array");
  return j;
}

Eigen::Vector3d as_vec3(const Json& j, const std::string& path) {
  as_array(j, path);
  if (j.size() != 3) schema_error(path, "expected 3 numbers");
  return {as_double(j[0], path + "[0]"), as_double(j[1], path + "[1]"),
          as_double(j[2], path + "[2]")};
}

Eigen::Vector4d as_vec4(const Json& j, const std::string& path) {
  as_array(j, path);
  if (j.size() != 4) schema_error(path, "expected 4 numbers");
  return {as_double(j[0], path + "[0]"), as_double(j[1], path + "[1]"),
          as_double(j[2], path + "[2]"), as_double(j[3], path + "[3]")};
}

void check_version(const Json& j, const std::string& path) {
  const int v = as_int(member(j, "version", path), path + ".version");
  if (v != 1)
    schema_error(path + ".version",
                 "unsupported version " + std::to_string(v) + " (expected 1)");
}

Json mesh_to_json(const TriangleMesh& mesh) {
  Json j;
  Json verts = Json::array();
  for (const Eigen::Vector3d& v : mesh.vertices) verts.push_back({v.x(), v.y(), v.z()});
  Json faces = Json::array();
  for (const std::array<int, 3>& f : mesh.faces) faces.push_back({f[0], f[1], f[2]});
  j["vertices"] = std::move(verts);
  j["faces"] = std::move(faces);
  return j;
}

TriangleMesh mesh_from_json(const Json& j, const std::string& path) {
  TriangleMesh mesh;
  const Json& verts = as_array(member(j, "vertices", path), path + ".vertices");
  mesh.vertices.reserve(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i)
    mesh.vertices.push_back(as_vec3(verts[i], path + ".vertices[" + std::to_string(i) + "]"));
  const Json& faces = as_array(member(j, "faces", path), path + ".faces");
  mesh.faces.reserve(faces.size());
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const std::string fp = path + ".faces[" + std::to_string(i) + "]";
    const Json& f = as_array(faces[i], fp);
    if (f.size() != 3) schema_error(fp, "expected 3 vertex indices");
    mesh.faces.push_back({as_int(f[0], fp + "[0]"), as_int(f[1], fp + "[1]"),
                          as_int(f[2], fp + "[2]")});
  }
  return mesh;
}

Json rig_to_json(const Rig& rig) {
  Json j;
  j["n_clusters"] = rig.n_clusters;
  j["cluster_of"] = rig.cluster_of;
  Json handles = Json::array();
  for (const Eigen::Vector3d& h : rig.handles) handles.push_back({h.x(), h.y(), h.z()});
  j["handles"] = std::move(handles);
  j["fps_anchors"] = rig.fps_anchors;
  return j;
}

Rig rig_from_json(const Json& j, const std::string& path) {
  Rig rig;
  rig.n_clusters = as_int(member(j, "n_clusters", path), path + ".n_clusters");
  const Json& cl = as_array(member(j, "cluster_of", path), path + ".cluster_of");
  rig.cluster_of.reserve(cl.size());
  for (std::size_t i = 0; i < cl.size(); ++i)
    rig.cluster_of.push_back(as_int(cl[i], path + ".cluster_of[" + std::to_string(i) + "]"));
  const Json& hs = as_array(member(j, "handles", path), path + ".handles");
  rig.handles.reserve(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i)
    rig.handles.push_back(as_vec3(hs[i], path + ".handles[" + std::to_string(i) + "]"));
  const Json& fa = as_array(member(j, "fps_anchors", path), path + ".fps_anchors");
  rig.fps_anchors.reserve(fa.size());
  for (std::size_t i = 0; i < fa.size(); ++i)
    rig.fps_anchors.push_back(as_int(fa[i], path + ".fps_anchors[" + std::to_string(i) + "]"));
  return rig;
}

Json motion_to_json(const MotionParams& motion) {
  Json j;
  Json ts = Json::array();
  for (const auto& row : motion.translations) {
    Json r = Json::array();
    for (const Eigen::Vector3d& t : row) r.push_back({t.x(), t.y(), t.z()});
    ts.push_back(std::move(r));
  }
  Json qs = Json::array();
  for (const auto& row : motion.rotations) {
    Json r = Json::array();
    for (const Eigen::Vector4d& q : row) r.push_back({q[0], q[1], q[2], q[3]});
    qs.push_back(std::move(r));
  }
  j["translations"] = std::move(ts);
  j["rotations"] = std::move(qs);
  return j;
}

MotionParams motion_from_json(const Json& j, const std::string& path) {
  MotionParams motion;
  const Json& ts = as_array(member(j, "translations", path), path + ".translations");
  for (std::size_t n = 0; n < ts.size(); ++n) {
    const std::string np = path + ".translations[" + std::to_string(n) + "]";
    const Json& row = as_array(ts[n], np);
    std::vector<Eigen::Vector3d> out;
    out.reserve(row.size());
    for (std::size_t k = 0; k < row.size(); ++k)
      out.push_back(as_vec3(row[k], np + "[" + std::to_string(k) + "]"));
    motion.translations.push_back(std::move(out));
  }
  const Json& qs = as_array(member(j, "rotations", path), path + ".rotations");
  for (std::size_t n = 0; n < qs.size(); ++n) {
    const std::string np = path + ".rotations[" + std::to_string(n) + "]";
    const Json& row = as_array(qs[n], np);
    std::vector<Eigen::Vector4d> out;
    out.reserve(row.size());
    for (std::size_t k = 0; k < row.size(); ++k)
      out.push_back(as_vec4(row[k], np + "[" + std::to_string(k) + "]"));
    motion.rotations.push_back(std::move(out));
  }
  return motion;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return j;
}

void write_json_file(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void AnimationDoc::validate() const {
  if (version != 1)
    throw ValidationError("animation doc: unsupported version " + std::to_string(version));
  mesh.validate();
  rig.validate(mesh);
  motion.validate();
  if (motion.handle_count() != rig.n_clusters)
    throw ValidationError("animation doc: motion handle count does not match the rig");
  if (mesh_hash != mesh_content_hash(mesh))
    throw ValidationError("animation doc: mesh_hash does not match the mesh content");
}

AnimationDoc make_animation_doc(TriangleMesh mesh, Rig rig, MotionParams motion,
                                std::uint64_t seed, std::string config_json) {
  AnimationDoc doc;
  doc.mesh = std::move(mesh);
  doc.mesh_hash = mesh_content_hash(doc.mesh);
  doc.rig = std::move(rig);
  doc.motion = std::move(motion);
  doc.seed = seed;
  doc.config_json = std::move(config_json);
  doc.validate();
  return doc;
}

void SceneDoc::validate() const {
  if (version != 1)
    throw ValidationError("scene doc: unsupported version " + std::to_string(version));
  if (placements.empty()) throw ValidationError("scene doc: placements must be non-empty");
  for (std::size_t i = 0; i < placements.size(); ++i) {
    const ScenePlacement& p = placements[i];
    if (p.anim_path.empty())
      throw ValidationError("scene doc: placements[" + std::to_string(i) + "] has no document");
    if (p.frame_offset < 0)
      throw ValidationError("scene doc: placements[" + std::to_string(i) +
                            "] frame_offset must be >= 0");
    if (p.rotation.norm() < 1e-12)
      throw ValidationError("scene doc: placements[" + std::to_string(i) +
                            "] has a zero-norm rotation");
  }
}

void save_doc(const AnimationDoc& doc, const std::filesystem::path& path) {
  doc.validate();
  Json j;
  j["version"] = doc.version;
  if (doc.obj_path.empty()) {
    j["mesh"] = mesh_to_json(doc.mesh);
  } else {
    j["mesh"] = Json{{"obj", doc.obj_path}};
  }
  j["mesh_hash"] = doc.mesh_hash;
  j["rig"] = rig_to_json(doc.rig);
  j["motion"] = motion_to_json(doc.motion);
  Json prov;
  prov["seed"] = doc.seed;
  if (doc.config_json.empty()) {
    prov["config"] = nullptr;
  } else {
    try {
      prov["config"] = Json::parse(doc.config_json);
    } catch (const Json::parse_error& e) {
      throw ValidationError(std::string("animation doc: config snapshot is not valid JSON: ") +
                            e.what());
    }
  }
  j["provenance"] = std::move(prov);
  write_json_file(j, path);
}

AnimationDoc load_animation_doc(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  check_version(j, "animation doc");
  AnimationDoc doc;

  const Json& mesh = member(j, "mesh", "animation doc");
  if (mesh.is_object() && mesh.contains("obj")) {
    doc.obj_path = as_string(member(mesh, "obj", "mesh"), "mesh.obj");
    std::filesystem::path ref(doc.obj_path);
    if (ref.is_relative()) ref = path.parent_path() / ref;
    doc.mesh = load_obj(ref);
  } else {
    doc.mesh = mesh_from_json(mesh, "mesh");
  }
  doc.mesh_hash = as_string(member(j, "mesh_hash", "animation doc"), "mesh_hash");
  doc.rig = rig_from_json(member(j, "rig", "animation doc"), "rig");
  doc.motion = motion_from_json(member(j, "motion", "animation doc"), "motion");
  const Json& prov = member(j, "provenance", "animation doc");
  doc.seed = as_uint64(member(prov, "seed", "provenance"), "provenance.seed");
  const Json& config = member(prov, "config", "provenance");
  if (config.is_null()) {
    doc.config_json.clear();
  } else if (config.is_object()) {
    doc.config_json = config.dump(2);
  } else {
    schema_error("provenance.config", "expected an object or null");
  }
  doc.validate();
  return doc;
}

void save_doc(const RigDoc& doc, const std::filesystem::path& path) {
  if (doc.version != 1)
    throw ValidationError("rig doc: unsupported version " + std::to_string(doc.version));
  Json j;
  j["version"] = doc.version;
  j["mesh_hash"] = doc.mesh_hash;
  j["rig"] = rig_to_json(doc.rig);
  write_json_file(j, path);
}

RigDoc load_rig_doc(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  check_version(j, "rig doc");
  RigDoc doc;
  doc.mesh_hash = as_string(member(j, "mesh_hash", "rig doc"), "mesh_hash");
  doc.rig = rig_from_json(member(j, "rig", "rig doc"), "rig");
  return doc;
}

void save_doc(const SceneDoc& doc, const std::filesystem::path& path) {
  doc.validate();
  Json j;
  j["version"] = doc.version;
  Json placements = Json::array();
  for (const ScenePlacement& p : doc.placements) {
    Json pj;
    pj["anim"] = p.anim_path;
    pj["rotation"] = {p.rotation[0], p.rotation[1], p.rotation[2], p.rotation[3]};
    pj["translation"] = {p.translation.x(), p.translation.y(), p.translation.z()};
    pj["frame_offset"] = p.frame_offset;
    placements.push_back(std::move(pj));
  }
  j["placements"] = std::move(placements);
  write_json_file(j, path);
}

SceneDoc load_scene_doc(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  check_version(j, "scene doc");
  SceneDoc doc;
  const Json& placements = as_array(member(j, "placements", "scene doc"), "placements");
  for (std::size_t i = 0; i < placements.size(); ++i) {
    const std::string pp = "placements[" + std::to_string(i) + "]";
    const Json& pj = placements[i];
    ScenePlacement p;
    p.anim_path = as_string(member(pj, "anim", pp), pp + ".anim");
    p.rotation = as_vec4(member(pj, "rotation", pp), pp + ".rotation");
    p.translation = as_vec3(member(pj, "translation", pp), pp + ".translation");
    p.frame_offset = as_int(member(pj, "frame_offset", pp), pp + ".frame_offset");
    doc.placements.push_back(std::move(p));
  }
  doc.validate();
  return doc;
}

KeyframeSequence compose(const std::vector<PlacedAnimation>& objects) {
  if (objects.empty()) throw ValidationError("compose: no objects");

  struct Placed {
    KeyframeSequence driven;
    Eigen::Matrix3d rotation;
    Eigen::Vector3d translation;
    int offset;
  };
  std::vector<Placed> placed;
  placed.reserve(objects.size());
  int total_frames = 0;
  int total_vertices = 0;
  int total_faces = 0;
  for (const PlacedAnimation& obj : objects) {
    obj.doc.validate();
    if (obj.frame_offset < 0) throw ValidationError("compose: frame_offset must be >= 0");
    Placed p{drive_mesh(obj.doc.mesh, obj.doc.rig, obj.doc.motion),
             quat_to_matrix(obj.rotation), obj.translation, obj.frame_offset};
    total_frames = std::max(total_frames, obj.frame_offset + p.driven.frame_count());
    total_vertices += p.driven.base.vertex_count();
    total_faces += p.driven.base.face_count();
    placed.push_back(std::move(p));
  }

  KeyframeSequence out;
  out.base.vertices.reserve(static_cast<std::size_t>(total_vertices));
  out.base.faces.reserve(static_cast<std::size_t>(total_faces));
  int vertex_offset = 0;
  for (const Placed& p : placed) {
    for (const Eigen::Vector3d& v : p.driven.base.vertices)
      out.base.vertices.push_back(p.rotation * v + p.translation);
    for (const std::array<int, 3>& f : p.driven.base.faces)
      out.base.faces.push_back(
          {f[0] + vertex_offset, f[1] + vertex_offset, f[2] + vertex_offset});
    vertex_offset += p.driven.base.vertex_count();
  }

  out.frames.assign(static_cast<std::size_t>(total_frames),
                    std::vector<Eigen::Vector3d>());
  for (int n = 0; n < total_frames; ++n) {
    std::vector<Eigen::Vector3d>& frame = out.frames[static_cast<std::size_t>(n)];
    frame.reserve(static_cast<std::size_t>(total_vertices));
    for (const Placed& p : placed) {
      // Hold the first frame before the object's track starts and the last
      // frame after it ends.
      const int local = std::clamp(n - p.offset, 0, p.driven.frame_count() - 1);
      for (const Eigen::Vector3d& v : p.driven.frames[static_cast<std::size_t>(local)])
        frame.push_back(p.rotation * v + p.translation);
    }
  }
  out.validate();
  return out;
}

KeyframeSequence compose(const SceneDoc& scene, const std::filesystem::path& base_dir) {
  scene.validate();
  std::vector<PlacedAnimation> objects;
  objects.reserve(scene.placements.size());
  for (const ScenePlacement& p : scene.placements) {
    std::filesystem::path ref(p.anim_path);
    if (ref.is_relative()) ref = base_dir / ref;
    PlacedAnimation obj;
    obj.doc = load_animation_doc(ref);
    obj.rotation = p.rotation;
    obj.translation = p.translation;
    obj.frame_offset = p.frame_offset;
    objects.push_back(std::move(obj));
  }
  return compose(objects);
}

void export_frames(const KeyframeSequence& frames, const std::filesystem::path& directory) {
  frames.validate();
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError("cannot create directory " + directory.string() + ": " + ec.message());
  for (int n = 0; n < frames.frame_count(); ++n) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04d.obj", n);
    save_obj(frames.frame_mesh(n), directory / name);
  }
}

}  // namespace animesh
