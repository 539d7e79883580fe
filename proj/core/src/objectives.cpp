#include "animesh/objectives.hpp"

#include <utility>

#include "animesh/errors.hpp"

namespace animesh {

TrajectoryObjective::TrajectoryObjective(const Rig& rig, std::vector<TrajectoryTarget> targets)
    : targets_(std::move(targets)) {
  if (targets_.empty()) throw ValidationError("trajectory objective: no targets");
  members_.resize(static_cast<std::size_t>(rig.n_clusters));
  for (std::size_t i = 0; i < rig.cluster_of.size(); ++i)
    members_[static_cast<std::size_t>(rig.cluster_of[i])].push_back(static_cast<int>(i));
  for (const TrajectoryTarget& t : targets_)
    if (t.cluster < 0 || t.cluster >= rig.n_clusters)
      throw ValidationError("trajectory objective: cluster index out of range");
}

ObjectiveEval TrajectoryObjective::evaluate(const KeyframeSequence& frames) {
  ObjectiveEval eval;
  eval.has_vertex_gradient = true;
  eval.vertex_gradient.assign(frames.frames.size(),
                              std::vector<Eigen::Vector3d>(frames.base.vertices.size(),
                                                           Eigen::Vector3d::Zero()));
  const double inv = 1.0 / static_cast<double>(targets_.size());
  for (const TrajectoryTarget& t : targets_) {
    if (t.frame < 0 || t.frame >= frames.frame_count())
      throw ValidationError("trajectory objective: frame index out of range");
    const std::vector<int>& m = members_[static_cast<std::size_t>(t.cluster)];
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (int i : m) centroid += frames.frames[static_cast<std::size_t>(t.frame)][static_cast<std::size_t>(i)];
    centroid /= static_cast<double>(m.size());
    const Eigen::Vector3d diff = centroid - t.position;
    eval.loss += inv * diff.squaredNorm();
    const Eigen::Vector3d g = inv * 2.0 * diff / static_cast<double>(m.size());
    for (int i : m)
      eval.vertex_gradient[static_cast<std::size_t>(t.frame)][static_cast<std::size_t>(i)] += g;
  }
  return eval;
}

double TrajectoryObjective::reevaluate(const KeyframeSequence& frames) {
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(targets_.size());
  for (const TrajectoryTarget& t : targets_) {
    const std::vector<int>& m = members_[static_cast<std::size_t>(t.cluster)];
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (int i : m) centroid += frames.frames[static_cast<std::size_t>(t.frame)][static_cast<std::size_t>(i)];
    centroid /= static_cast<double>(m.size());
    loss += inv * (centroid - t.position).squaredNorm();
  }
  return loss;
}

VertexTargetObjective::VertexTargetObjective(std::vector<VertexTarget> targets)
    : targets_(std::move(targets)) {
  if (targets_.empty()) throw ValidationError("vertex-target objective: no targets");
}

ObjectiveEval VertexTargetObjective::evaluate(const KeyframeSequence& frames) {
  ObjectiveEval eval;
  eval.has_vertex_gradient = true;
  eval.vertex_gradient.assign(frames.frames.size(),
                              std::vector<Eigen::Vector3d>(frames.base.vertices.size(),
                                                           Eigen::Vector3d::Zero()));
  const double inv = 1.0 / static_cast<double>(targets_.size());
  for (const VertexTarget& t : targets_) {
    if (t.frame < 0 || t.frame >= frames.frame_count())
      throw ValidationError("vertex-target objective: frame index out of range");
    if (t.vertex < 0 || t.vertex >= frames.base.vertex_count())
      throw ValidationError("vertex-target objective: vertex index out of range");
    const Eigen::Vector3d diff =
        frames.frames[static_cast<std::size_t>(t.frame)][static_cast<std::size_t>(t.vertex)] -
        t.position;
    eval.loss += inv * diff.squaredNorm();
    eval.vertex_gradient[static_cast<std::size_t>(t.frame)][static_cast<std::size_t>(t.vertex)] +=
        inv * 2.0 * diff;
  }
  return eval;
}

double VertexTargetObjective::reevaluate(const KeyframeSequence& frames) {
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(targets_.size());
  for (const VertexTarget& t : targets_) {
    loss += inv * (frames.frames[static_cast<std::size_t>(t.frame)][static_cast<std::size_t>(t.vertex)] -
                   t.position)
                      .squaredNorm();
  }
  return loss;
}

SilhouetteObjective::SilhouetteObjective(Camera camera, std::vector<Silhouette> targets)
    : camera_(std::move(camera)), targets_(std::move(targets)) {
  camera_.validate();
  if (targets_.empty()) throw ValidationError("silhouette objective: no target masks");
  for (const Silhouette& t : targets_)
    if (t.width != camera_.width || t.height != camera_.height)
      throw ValidationError("silhouette objective: target mask size does not match the camera");
}

double SilhouetteObjective::reevaluate(const KeyframeSequence& frames) {
  if (targets_.size() != 1 && targets_.size() != frames.frames.size())
    throw ValidationError("silhouette objective: target count does not match frame count");
  double sum = 0.0;
  for (std::size_t n = 0; n < frames.frames.size(); ++n) {
    const Silhouette rendered = render_silhouette(frames.frames[n], frames.base.faces, camera_);
    const Silhouette& target = targets_[targets_.size() == 1 ? 0 : n];
    for (std::size_t p = 0; p < rendered.mask.size(); ++p) {
      const double d = static_cast<double>(rendered.mask[p]) - static_cast<double>(target.mask[p]);
      sum += d * d;
    }
  }
  return sum / (static_cast<double>(frames.frames.size()) *
                static_cast<double>(camera_.width) * static_cast<double>(camera_.height));
}

ObjectiveEval SilhouetteObjective::evaluate(const KeyframeSequence& frames) {
  ObjectiveEval eval;
  eval.loss = reevaluate(frames);
  eval.has_vertex_gradient = false;
  return eval;
}

SdsToyObjective::SdsToyObjective(Camera camera, GaussianToyDenoiser denoiser, DistillConfig cfg,
                                 double weight, Rng rng, std::string cond)
    : camera_(std::move(camera)),
      denoiser_(std::move(denoiser)),
      cfg_(std::move(cfg)),
      weight_(weight),
      rng_(rng),
      cond_(std::move(cond)) {
  camera_.validate();
  cfg_.validate();
}

ObjectiveEval SdsToyObjective::evaluate(const KeyframeSequence& frames) {
  frozen_.clear();
  frozen_.reserve(frames.frames.size());
  double loss = 0.0;
  for (std::size_t n = 0; n < frames.frames.size(); ++n) {
    const Eigen::VectorXd x =
        render_silhouette(frames.frames[n], frames.base.faces, camera_).flatten();
    Eigen::VectorXd g = sds_gradient(x, denoiser_, cond_, cfg_, rng_);
    loss += g.dot(x);
    frozen_.push_back(std::move(g));
  }
  ObjectiveEval eval;
  eval.loss = weight_ * loss / static_cast<double>(frames.frames.size());
  eval.has_vertex_gradient = false;
  return eval;
}

double SdsToyObjective::reevaluate(const KeyframeSequence& frames) {
  if (frozen_.size() != frames.frames.size())
    throw ValidationError("sds-toy objective: no frozen draws for this frame count");
  double loss = 0.0;
  for (std::size_t n = 0; n < frames.frames.size(); ++n) {
    const Eigen::VectorXd x =
        render_silhouette(frames.frames[n], frames.base.faces, camera_).flatten();
    loss += frozen_[n].dot(x);
  }
  return weight_ * loss / static_cast<double>(frames.frames.size());
}

}  // namespace animesh
