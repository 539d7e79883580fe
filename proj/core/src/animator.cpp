#include "animesh/animator.hpp"

#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "animesh/errors.hpp"

namespace animesh {

void AnimateSchedule::validate() const {
  if (total_iters < 1) throw ValidationError("animate schedule: total_iters must be >= 1");
  if (regulate_every < 1) throw ValidationError("animate schedule: regulate_every must be >= 1");
  if (regulate_max < 1) throw ValidationError("animate schedule: regulate_max must be >= 1");
  if (keyframes < 1) throw ValidationError("animate schedule: keyframes must be >= 1");
  if (!(step_size > 0.0)) throw ValidationError("animate schedule: step_size must be > 0");
  if (!(fd_step > 0.0)) throw ValidationError("animate schedule: fd_step must be > 0");
  if (smoothness_weight < 0.0)
    throw ValidationError("animate schedule: smoothness_weight must be >= 0");
}

RefitResult refit_handles(const Rig& rig, const TriangleMesh& base,
                          const std::vector<std::vector<Eigen::Vector3d>>& frames) {
  rig.validate(base);
  const int nv = base.vertex_count();
  for (const std::vector<Eigen::Vector3d>& frame : frames)
    if (static_cast<int>(frame.size()) != nv)
      throw ValidationError("refit_handles: frame vertex count does not match the base mesh");
  if (frames.empty()) throw ValidationError("refit_handles: no frames");

  std::vector<std::vector<int>> members(static_cast<std::size_t>(rig.n_clusters));
  for (int i = 0; i < nv; ++i)
    members[static_cast<std::size_t>(rig.cluster_of[static_cast<std::size_t>(i)])].push_back(i);

  // A cluster needs 3 non-collinear rest vertices to pin down a rotation;
  // judged once on the rest scatter, independent of the deformed positions.
  std::vector<char> full_rank(static_cast<std::size_t>(rig.n_clusters), 0);
  for (int k = 0; k < rig.n_clusters; ++k) {
    const std::vector<int>& m = members[static_cast<std::size_t>(k)];
    if (m.size() < 3) continue;
    Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
    const Eigen::Vector3d& h = rig.handles[static_cast<std::size_t>(k)];
    for (int i : m) {
      const Eigen::Vector3d d = base.vertices[static_cast<std::size_t>(i)] - h;
      scatter += d * d.transpose();
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(scatter);
    const double s0 = svd.singularValues()[0];
    const double s1 = svd.singularValues()[1];
    full_rank[static_cast<std::size_t>(k)] = s0 > 0.0 && s1 > 1e-12 * s0;
  }

  RefitResult result;
  result.motion = MotionParams::identity(static_cast<int>(frames.size()), rig.n_clusters);
  for (std::size_t n = 0; n < frames.size(); ++n) {
    for (int k = 0; k < rig.n_clusters; ++k) {
      const std::vector<int>& m = members[static_cast<std::size_t>(k)];
      const Eigen::Vector3d& h = rig.handles[static_cast<std::size_t>(k)];
      Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
      for (int i : m) centroid += frames[n][static_cast<std::size_t>(i)];
      centroid /= static_cast<double>(m.size());

      Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
      if (full_rank[static_cast<std::size_t>(k)]) {
        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (int i : m) {
          cov += (base.vertices[static_cast<std::size_t>(i)] - h) *
                 (frames[n][static_cast<std::size_t>(i)] - centroid).transpose();
        }
        rot = fit_rotation_from_covariance(cov);
      } else {
        result.rank_deficient = true;
        result.degenerate.emplace_back(static_cast<int>(n), k);
      }
      const Eigen::Quaterniond q(rot);
      result.motion.rotations[n][static_cast<std::size_t>(k)] =
          Eigen::Vector4d(q.w(), q.x(), q.y(), q.z());
      result.motion.translations[n][static_cast<std::size_t>(k)] = centroid - h;
    }
  }
  return result;
}

namespace {

// Adaptive per-parameter steps (first and second moment running averages
// with bias correction).
struct MomentOptimizer {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;

  explicit MomentOptimizer(Eigen::Index n)
      : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}

  void reset() {
    m.setZero();
    v.setZero();
    step = 0;
  }

  void apply(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
    ++step;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (Eigen::Index i = 0; i < params.size(); ++i) {
      const double mh = m[i] / c1;
      const double vh = v[i] / c2;
      params[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
};

// Flat layout per frame, per handle: tx ty tz qw qx qy qz.
Eigen::VectorXd pack(const MotionParams& motion) {
  const int nf = motion.frame_count();
  const int nk = motion.handle_count();
  Eigen::VectorXd x(static_cast<Eigen::Index>(nf) * nk * 7);
  Eigen::Index at = 0;
  for (int n = 0; n < nf; ++n)
    for (int k = 0; k < nk; ++k) {
      const std::size_t sn = static_cast<std::size_t>(n);
      const std::size_t sk = static_cast<std::size_t>(k);
      x.segment<3>(at) = motion.translations[sn][sk];
      x.segment<4>(at + 3) = motion.rotations[sn][sk];
      at += 7;
    }
  return x;
}

void unpack(const Eigen::VectorXd& x, MotionParams& motion) {
  Eigen::Index at = 0;
  for (int n = 0; n < motion.frame_count(); ++n)
    for (int k = 0; k < motion.handle_count(); ++k) {
      const std::size_t sn = static_cast<std::size_t>(n);
      const std::size_t sk = static_cast<std::size_t>(k);
      motion.translations[sn][sk] = x.segment<3>(at);
      motion.rotations[sn][sk] = x.segment<4>(at + 3);
      at += 7;
    }
}

// Recompute a single frame's driven vertices (finite-difference probes
// perturb one frame at a time).
void drive_frame(const TriangleMesh& mesh, const Rig& rig, const MotionParams& motion, int frame,
                 std::vector<Eigen::Vector3d>& out) {
  const std::size_t n = static_cast<std::size_t>(frame);
  std::vector<Eigen::Matrix3d> rot(static_cast<std::size_t>(rig.n_clusters));
  for (int k = 0; k < rig.n_clusters; ++k)
    rot[static_cast<std::size_t>(k)] = quat_to_matrix(motion.rotations[n][static_cast<std::size_t>(k)]);
  out.resize(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const std::size_t k = static_cast<std::size_t>(rig.cluster_of[i]);
    const Eigen::Vector3d& h = rig.handles[k];
    out[i] = rot[k] * (mesh.vertices[i] - h) + motion.translations[n][k] + h;
  }
}

}  // namespace

AnimateResult animate(const TriangleMesh& mesh, const Rig& rig, const CotanLaplacian& lap,
                      MotionObjective& objective, const AnimateSchedule& schedule,
                      const RigidityConfig& rigidity) {
  schedule.validate();
  rigidity.validate();
  rig.validate(mesh);

  const bool regulation_enabled = rigidity.lambda1 != 0.0 || rigidity.lambda2 != 0.0;
  RigidityConfig reg_cfg = rigidity;  // the schedule's outer-loop knobs win
  reg_cfg.max_iters = schedule.regulate_max;
  reg_cfg.regulate_every = schedule.regulate_every;
  if (regulation_enabled && rig.fps_anchors.empty())
    throw ValidationError("animate: regulation needs anchor vertices in the rig");

  const int nk = rig.n_clusters;
  const int nf = schedule.keyframes;
  const Eigen::Index n_params = static_cast<Eigen::Index>(nf) * nk * 7;

  AnimateResult result;
  result.motion = MotionParams::identity(nf, nk);
  result.loss_history.reserve(static_cast<std::size_t>(schedule.total_iters));
  MomentOptimizer optimizer(n_params);

  for (int iter = 0; iter < schedule.total_iters; ++iter) {
    KeyframeSequence frames = drive_mesh(mesh, rig, result.motion);
    ObjectiveEval eval = objective.evaluate(frames);
    if (!std::isfinite(eval.loss))
      throw NumericalError("animate: objective returned a non-finite loss at iteration " +
                           std::to_string(iter));

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_params);
    if (eval.has_vertex_gradient) {
      if (eval.vertex_gradient.size() != static_cast<std::size_t>(nf))
        throw ValidationError("animate: objective gradient frame count mismatch");
      for (int n = 0; n < nf; ++n) {
        const MotionJacobian jac = motion_jacobian(mesh, rig, result.motion, n);
        std::vector<Eigen::Vector3d> grad_t(static_cast<std::size_t>(nk),
                                            Eigen::Vector3d::Zero());
        std::vector<Eigen::Vector4d> grad_q(static_cast<std::size_t>(nk),
                                            Eigen::Vector4d::Zero());
        accumulate_param_gradient(jac, eval.vertex_gradient[static_cast<std::size_t>(n)], grad_t,
                                  grad_q);
        for (int k = 0; k < nk; ++k) {
          const Eigen::Index at = (static_cast<Eigen::Index>(n) * nk + k) * 7;
          grad.segment<3>(at) = grad_t[static_cast<std::size_t>(k)];
          grad.segment<4>(at + 3) = grad_q[static_cast<std::size_t>(k)];
        }
      }
    } else {
      // Central differences over the handle parameters, one frame redriven
      // per probe; the objective holds its stochastic draws fixed.
      MotionParams probe = result.motion;
      for (int n = 0; n < nf; ++n) {
        const std::size_t sn = static_cast<std::size_t>(n);
        std::vector<Eigen::Vector3d> saved = frames.frames[sn];
        for (int k = 0; k < nk; ++k) {
          const std::size_t sk = static_cast<std::size_t>(k);
          for (int p = 0; p < 7; ++p) {
            double* param = p < 3 ? probe.translations[sn][sk].data() + p
                                  : probe.rotations[sn][sk].data() + (p - 3);
            const double saved_param = *param;
            *param = saved_param + schedule.fd_step;
            drive_frame(mesh, rig, probe, n, frames.frames[sn]);
            const double up = objective.reevaluate(frames);
            *param = saved_param - schedule.fd_step;
            drive_frame(mesh, rig, probe, n, frames.frames[sn]);
            const double down = objective.reevaluate(frames);
            *param = saved_param;
            grad[(static_cast<Eigen::Index>(n) * nk + k) * 7 + p] =
                (up - down) / (2.0 * schedule.fd_step);
          }
        }
        frames.frames[sn] = std::move(saved);
      }
    }

    double total_loss = eval.loss;
    if (schedule.smoothness_weight > 0.0) {
      std::vector<std::vector<Eigen::Vector3d>> sm_t;
      std::vector<std::vector<Eigen::Vector4d>> sm_q;
      total_loss += schedule.smoothness_weight * temporal_smoothness(result.motion, &sm_t, &sm_q);
      for (int n = 0; n < nf; ++n)
        for (int k = 0; k < nk; ++k) {
          const Eigen::Index at = (static_cast<Eigen::Index>(n) * nk + k) * 7;
          grad.segment<3>(at) +=
              schedule.smoothness_weight * sm_t[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
          grad.segment<4>(at + 3) +=
              schedule.smoothness_weight * sm_q[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
        }
    }
    result.loss_history.push_back(total_loss);

    Eigen::VectorXd params = pack(result.motion);
    optimizer.apply(params, grad, schedule.step_size);
    unpack(params, result.motion);

    if (regulation_enabled && (iter + 1) % schedule.regulate_every == 0) {
      const KeyframeSequence driven = drive_mesh(mesh, rig, result.motion);
      RegulationResult reg = regulate(driven, rig.fps_anchors, lap, reg_cfg);
      RefitResult refit = refit_handles(rig, mesh, reg.frames);
      result.motion = std::move(refit.motion);
      result.refit_rank_deficient = result.refit_rank_deficient || refit.rank_deficient;
      RegulationEvent event;
      event.iteration = iter;
      event.loss_before = reg.initial_loss;
      event.loss_after = reg.final_loss;
      for (const RegulationTrace& trace : reg.traces) {
        event.arap_term += trace.rows.back().arap_term;
        event.mse_term += trace.rows.back().mse_term;
      }
      result.regulation_events.push_back(event);
      result.last_regulation = std::move(reg.traces);
      ++result.regulation_calls;
      optimizer.reset();  // the parameters jumped; stale moments would mislead
    }
  }

  result.frames = drive_mesh(mesh, rig, result.motion);
  return result;
}

}  // namespace animesh
