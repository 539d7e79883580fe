#include "animesh/deform.hpp"

#include <cmath>

#include <Eigen/Geometry>

#include "animesh/errors.hpp"
#include "animesh/parallel.hpp"

namespace animesh {

MotionParams MotionParams::identity(int n_frames, int n_handles) {
  if (n_frames < 1 || n_handles < 1)
    throw ValidationError("motion: frame and handle counts must be >= 1");
  MotionParams m;
  m.translations.assign(static_cast<std::size_t>(n_frames),
                        std::vector<Eigen::Vector3d>(static_cast<std::size_t>(n_handles),
                                                     Eigen::Vector3d::Zero()));
  m.rotations.assign(static_cast<std::size_t>(n_frames),
                     std::vector<Eigen::Vector4d>(static_cast<std::size_t>(n_handles),
                                                  Eigen::Vector4d(1.0, 0.0, 0.0, 0.0)));
  return m;
}

void MotionParams::validate() const {
  if (translations.empty() || translations.size() != rotations.size())
    throw ValidationError("motion: translation/rotation frame counts differ or are zero");
  const std::size_t nk = translations.front().size();
  if (nk == 0) throw ValidationError("motion: handle count must be >= 1");
  for (std::size_t n = 0; n < translations.size(); ++n) {
    if (translations[n].size() != nk || rotations[n].size() != nk)
      throw ValidationError("motion: ragged parameter rows at frame " + std::to_string(n));
    for (const Eigen::Vector4d& q : rotations[n])
      if (q.norm() < 1e-12)
        throw ValidationError("motion: zero-norm quaternion at frame " + std::to_string(n));
  }
}

void KeyframeSequence::validate() const {
  base.validate();
  if (frames.empty()) throw ValidationError("keyframes: no frames");
  for (std::size_t n = 0; n < frames.size(); ++n)
    if (static_cast<int>(frames[n].size()) != base.vertex_count())
      throw ValidationError("keyframes: frame " + std::to_string(n) +
                            " vertex count does not match the base mesh");
}

TriangleMesh KeyframeSequence::frame_mesh(int frame) const {
  if (frame < 0 || frame >= frame_count())
    throw ValidationError("keyframes: frame index out of range");
  TriangleMesh m;
  m.vertices = frames[static_cast<std::size_t>(frame)];
  m.faces = base.faces;
  return m;
}

Eigen::Matrix3d quat_to_matrix(const Eigen::Vector4d& q) {
  const double n = q.norm();
  if (n < 1e-12) throw ValidationError("quat_to_matrix: zero-norm quaternion");
  const Eigen::Vector4d u = q / n;
  return Eigen::Quaterniond(u[0], u[1], u[2], u[3]).toRotationMatrix();
}

KeyframeSequence drive_mesh(const TriangleMesh& mesh, const Rig& rig, const MotionParams& motion) {
  mesh.validate();
  motion.validate();
  const int nv = mesh.vertex_count();
  if (static_cast<int>(rig.cluster_of.size()) != nv)
    throw ValidationError("drive_mesh: rig does not match the mesh");
  if (motion.handle_count() != rig.n_clusters)
    throw ValidationError("drive_mesh: motion handle count does not match the rig");

  KeyframeSequence seq;
  seq.base = mesh;
  seq.frames.assign(static_cast<std::size_t>(motion.frame_count()),
                    std::vector<Eigen::Vector3d>(static_cast<std::size_t>(nv)));

  parallel_for(static_cast<std::size_t>(motion.frame_count()), [&](std::size_t n) {
    // v' = R (v - h) + t + h, regrouped as R v + (t + (h - R h)) so that
    // identity transforms reproduce the input bit for bit.
    std::vector<Eigen::Matrix3d> rot(static_cast<std::size_t>(rig.n_clusters));
    std::vector<Eigen::Vector3d> shift(static_cast<std::size_t>(rig.n_clusters));
    for (int k = 0; k < rig.n_clusters; ++k) {
      const std::size_t ks = static_cast<std::size_t>(k);
      rot[ks] = quat_to_matrix(motion.rotations[n][ks]);
      shift[ks] = motion.translations[n][ks] + (rig.handles[ks] - rot[ks] * rig.handles[ks]);
    }
    std::vector<Eigen::Vector3d>& out = seq.frames[n];
    for (int i = 0; i < nv; ++i) {
      const std::size_t k = static_cast<std::size_t>(rig.cluster_of[static_cast<std::size_t>(i)]);
      out[static_cast<std::size_t>(i)] =
          rot[k] * mesh.vertices[static_cast<std::size_t>(i)] + shift[k];
    }
  });
  return seq;
}

Eigen::Matrix3d MotionJacobian::dv_dtranslation(int vertex, int handle) const {
  if (vertex < 0 || vertex >= vertex_count())
    throw ValidationError("motion_jacobian: vertex index out of range");
  if (cluster_of[static_cast<std::size_t>(vertex)] == handle) return Eigen::Matrix3d::Identity();
  return Eigen::Matrix3d::Zero();
}

Eigen::Matrix<double, 3, 4> MotionJacobian::dv_drotation(int vertex, int handle) const {
  if (vertex < 0 || vertex >= vertex_count())
    throw ValidationError("motion_jacobian: vertex index out of range");
  if (cluster_of[static_cast<std::size_t>(vertex)] != handle)
    return Eigen::Matrix<double, 3, 4>::Zero();
  return dv_dq[static_cast<std::size_t>(vertex)];
}

namespace {

// d(R(q^) u)/dq for raw q, through the normalization q^ = q/||q||.
// With q^ = (w, b): R u = u + 2w (b x u) + 2 b x (b x u).
Eigen::Matrix<double, 3, 4> rotation_point_jacobian(const Eigen::Vector4d& q,
                                                    const Eigen::Vector3d& u) {
  const double n = q.norm();
  if (n < 1e-12) throw ValidationError("motion_jacobian: zero-norm quaternion");
  const Eigen::Vector4d qh = q / n;
  const double w = qh[0];
  const Eigen::Vector3d b(qh[1], qh[2], qh[3]);

  Eigen::Matrix<double, 3, 4> d_unit;
  d_unit.col(0) = 2.0 * b.cross(u);
  for (int j = 0; j < 3; ++j) {
    const Eigen::Vector3d e = Eigen::Vector3d::Unit(j);
    d_unit.col(1 + j) = 2.0 * (w * e.cross(u) + e.cross(b.cross(u)) + b.cross(e.cross(u)));
  }
  const Eigen::Matrix4d chain = (Eigen::Matrix4d::Identity() - qh * qh.transpose()) / n;
  return d_unit * chain;
}

}  // namespace

MotionJacobian motion_jacobian(const TriangleMesh& mesh, const Rig& rig,
                               const MotionParams& motion, int frame) {
  mesh.validate();
  motion.validate();
  const int nv = mesh.vertex_count();
  if (static_cast<int>(rig.cluster_of.size()) != nv)
    throw ValidationError("motion_jacobian: rig does not match the mesh");
  if (motion.handle_count() != rig.n_clusters)
    throw ValidationError("motion_jacobian: motion handle count does not match the rig");
  if (frame < 0 || frame >= motion.frame_count())
    throw ValidationError("motion_jacobian: frame index out of range");

  MotionJacobian jac;
  jac.cluster_of = rig.cluster_of;
  jac.dv_dq.resize(static_cast<std::size_t>(nv));
  for (int i = 0; i < nv; ++i) {
    const std::size_t k = static_cast<std::size_t>(rig.cluster_of[static_cast<std::size_t>(i)]);
    const Eigen::Vector3d u = mesh.vertices[static_cast<std::size_t>(i)] - rig.handles[k];
    jac.dv_dq[static_cast<std::size_t>(i)] =
        rotation_point_jacobian(motion.rotations[static_cast<std::size_t>(frame)][k], u);
  }
  return jac;
}

void accumulate_param_gradient(const MotionJacobian& jac,
                               const std::vector<Eigen::Vector3d>& dloss_dvertex,
                               std::vector<Eigen::Vector3d>& grad_t,
                               std::vector<Eigen::Vector4d>& grad_q) {
  if (dloss_dvertex.size() != jac.cluster_of.size())
    throw ValidationError("accumulate_param_gradient: vertex gradient size mismatch");
  for (std::size_t i = 0; i < dloss_dvertex.size(); ++i) {
    const std::size_t k = static_cast<std::size_t>(jac.cluster_of[i]);
    if (k >= grad_t.size() || k >= grad_q.size())
      throw ValidationError("accumulate_param_gradient: gradient buffers too small");
    grad_t[k] += dloss_dvertex[i];
    grad_q[k] += jac.dv_dq[i].transpose() * dloss_dvertex[i];
  }
}

double temporal_smoothness(const MotionParams& motion,
                           std::vector<std::vector<Eigen::Vector3d>>* grad_t,
                           std::vector<std::vector<Eigen::Vector4d>>* grad_q) {
  motion.validate();
  const int nf = motion.frame_count();
  const int nk = motion.handle_count();
  if (grad_t)
    grad_t->assign(static_cast<std::size_t>(nf),
                   std::vector<Eigen::Vector3d>(static_cast<std::size_t>(nk),
                                                Eigen::Vector3d::Zero()));
  if (grad_q)
    grad_q->assign(static_cast<std::size_t>(nf),
                   std::vector<Eigen::Vector4d>(static_cast<std::size_t>(nk),
                                                Eigen::Vector4d::Zero()));

  double penalty = 0.0;
  for (int n = 1; n < nf; ++n) {
    for (int k = 0; k < nk; ++k) {
      const std::size_t sn = static_cast<std::size_t>(n);
      const std::size_t sk = static_cast<std::size_t>(k);
      const Eigen::Vector3d dt = motion.translations[sn][sk] - motion.translations[sn - 1][sk];
      penalty += dt.squaredNorm();
      if (grad_t) {
        (*grad_t)[sn][sk] += 2.0 * dt;
        (*grad_t)[sn - 1][sk] -= 2.0 * dt;
      }

      const Eigen::Vector4d qa = motion.rotations[sn - 1][sk].normalized();
      const Eigen::Vector4d qb_raw = motion.rotations[sn][sk];
      const Eigen::Vector4d qb = qb_raw.normalized();
      const double sign = qa.dot(qb) >= 0.0 ? 1.0 : -1.0;  // double cover: align hemispheres
      const Eigen::Vector4d dq = sign * qb - qa;
      penalty += dq.squaredNorm();
      if (grad_q) {
        const Eigen::Vector4d qa_raw = motion.rotations[sn - 1][sk];
        const Eigen::Matrix4d chain_b =
            (Eigen::Matrix4d::Identity() - qb * qb.transpose()) / qb_raw.norm();
        const Eigen::Matrix4d chain_a =
            (Eigen::Matrix4d::Identity() - qa * qa.transpose()) / qa_raw.norm();
        (*grad_q)[sn][sk] += chain_b * (2.0 * sign * dq);
        (*grad_q)[sn - 1][sk] -= chain_a * (2.0 * dq);
      }
    }
  }
  return penalty;
}

}  // namespace animesh
