#pragma once

#include <vector>

#include "animesh/mesh.hpp"
#include "animesh/rig.hpp"

namespace animesh {

/// Per-frame, per-handle rigid transforms. Rotations are quaternions in
/// (w, x, y, z) order; they may drift off unit norm while being optimized
/// and are renormalized wherever a rotation matrix is formed, so gradients
/// flow through the normalization.
struct MotionParams {
  std::vector<std::vector<Eigen::Vector3d>> translations;  // [frame][handle]
  std::vector<std::vector<Eigen::Vector4d>> rotations;     // [frame][handle], (w,x,y,z)

  int frame_count() const { return static_cast<int>(translations.size()); }
  int handle_count() const {
    return translations.empty() ? 0 : static_cast<int>(translations.front().size());
  }

  static MotionParams identity(int n_frames, int n_handles);

  /// Ragged rows, zero frames, or (near-)zero quaternions are rejected.
  void validate() const;
};

/// A driven animation: the rest mesh plus one vertex array per keyframe.
/// All frames share the rest mesh's face list.
struct KeyframeSequence {
  TriangleMesh base;
  std::vector<std::vector<Eigen::Vector3d>> frames;  // [frame][vertex]

  int frame_count() const { return static_cast<int>(frames.size()); }
  void validate() const;
  TriangleMesh frame_mesh(int frame) const;  // frame vertices + shared faces
};

/// Rotation matrix of q after normalization. Throws on (near-)zero norm.
Eigen::Matrix3d quat_to_matrix(const Eigen::Vector4d& q);

/// Applies each handle's rigid transform about the handle point to its
/// cluster: v' = R (v - h) + t + h. Frames are independent and evaluated in
/// parallel; the result is identical for any worker count.
KeyframeSequence drive_mesh(const TriangleMesh& mesh, const Rig& rig, const MotionParams& motion);

/// Derivatives of one frame's driven vertices with respect to that frame's
/// handle parameters. One-hot weights make every cross-cluster block zero,
/// so only each vertex's own-cluster blocks are stored; the translation
/// block is the identity by construction.
struct MotionJacobian {
  std::vector<int> cluster_of;                      // copied from the rig
  std::vector<Eigen::Matrix<double, 3, 4>> dv_dq;   // per vertex, w.r.t. raw quaternion

  int vertex_count() const { return static_cast<int>(cluster_of.size()); }
  Eigen::Matrix3d dv_dtranslation(int vertex, int handle) const;
  Eigen::Matrix<double, 3, 4> dv_drotation(int vertex, int handle) const;
};

MotionJacobian motion_jacobian(const TriangleMesh& mesh, const Rig& rig,
                               const MotionParams& motion, int frame);

/// Chain rule: folds d(loss)/d(vertex) for one frame into parameter
/// gradients (accumulated in place; sized n_handles).
void accumulate_param_gradient(const MotionJacobian& jac,
                               const std::vector<Eigen::Vector3d>& dloss_dvertex,
                               std::vector<Eigen::Vector3d>& grad_t,
                               std::vector<Eigen::Vector4d>& grad_q);

/// Optional penalty on jumps between successive handle transforms:
/// sum over frames n >= 1 of ||t_n - t_{n-1}||^2 plus the sign-aligned
/// normalized-quaternion difference ||s q^_n - q^_{n-1}||^2. Disabled by
/// default in the animation schedule. When grad_t/grad_q are non-null they
/// receive the analytic gradient with respect to the raw parameters.
double temporal_smoothness(const MotionParams& motion,
                           std::vector<std::vector<Eigen::Vector3d>>* grad_t = nullptr,
                           std::vector<std::vector<Eigen::Vector4d>>* grad_q = nullptr);

}  // namespace animesh
