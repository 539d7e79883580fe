#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "animesh/deform.hpp"
#include "animesh/mesh.hpp"
#include "animesh/rig.hpp"

namespace animesh {

/// Self-contained persisted animation: mesh (embedded, or an OBJ reference
/// when obj_path is set), rig, motion, and provenance. The mesh hash is the
/// content hash of the mesh's OBJ text and must match on load and save.
struct AnimationDoc {
  int version = 1;
  TriangleMesh mesh;
  std::string obj_path;  // when nonempty the mesh is saved as this reference
  std::string mesh_hash;
  Rig rig;
  MotionParams motion;
  std::uint64_t seed = 0;
  std::string config_json;  // pipeline-config snapshot ("" = none)

  void validate() const;
};

AnimationDoc make_animation_doc(TriangleMesh mesh, Rig rig, MotionParams motion,
                                std::uint64_t seed, std::string config_json = std::string());

/// Persisted clustering result for a mesh identified by content hash.
struct RigDoc {
  int version = 1;
  std::string mesh_hash;
  Rig rig;
};

/// One animated object in a scene: a document reference, a rigid placement
/// (unit quaternion + translation), and a start-frame offset.
struct ScenePlacement {
  std::string anim_path;
  Eigen::Vector4d rotation{1.0, 0.0, 0.0, 0.0};  // (w,x,y,z)
  Eigen::Vector3d translation{0.0, 0.0, 0.0};
  int frame_offset = 0;
};

struct SceneDoc {
  int version = 1;
  std::vector<ScenePlacement> placements;

  void validate() const;
};

/// JSON round trip. Writing is key-ordered and uses exact (shortest
/// round-trip) number formatting, so save-load-save is byte-identical.
void save_doc(const AnimationDoc& doc, const std::filesystem::path& path);
void save_doc(const RigDoc& doc, const std::filesystem::path& path);
void save_doc(const SceneDoc& doc, const std::filesystem::path& path);
AnimationDoc load_animation_doc(const std::filesystem::path& path);
RigDoc load_rig_doc(const std::filesystem::path& path);
SceneDoc load_scene_doc(const std::filesystem::path& path);

struct PlacedAnimation {
  AnimationDoc doc;
  Eigen::Vector4d rotation{1.0, 0.0, 0.0, 0.0};
  Eigen::Vector3d translation{0.0, 0.0, 0.0};
  int frame_offset = 0;
};

/// Drives every object, applies its rigid placement, and concatenates the
/// vertex/face lists with index offsets. The output has
/// max(offset + frames) frames; an object holds its first frame before its
/// offset starts and its last frame afterwards.
KeyframeSequence compose(const std::vector<PlacedAnimation>& objects);

/// Resolves the scene's document references (relative to base_dir) and
/// composes them.
KeyframeSequence compose(const SceneDoc& scene, const std::filesystem::path& base_dir);

/// Writes frame_0000.obj, frame_0001.obj, ... into the directory.
void export_frames(const KeyframeSequence& frames, const std::filesystem::path& directory);

}  // namespace animesh
