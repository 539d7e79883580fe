#pragma once

#include <string>
#include <vector>

#include "animesh/animator.hpp"
#include "animesh/camera.hpp"
#include "animesh/distill.hpp"
#include "animesh/rig.hpp"

namespace animesh {

/// Pulls driven cluster centroids toward target points at given frames.
/// Because each handle is its cluster's rest centroid, the driven centroid
/// is exactly handle + translation, so the loss is quadratic in the
/// translations with its optimum at translation = target - handle.
struct TrajectoryTarget {
  int frame = 0;
  int cluster = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

class TrajectoryObjective : public MotionObjective {
 public:
  TrajectoryObjective(const Rig& rig, std::vector<TrajectoryTarget> targets);
  ObjectiveEval evaluate(const KeyframeSequence& frames) override;
  double reevaluate(const KeyframeSequence& frames) override;

 private:
  std::vector<std::vector<int>> members_;  // vertices per cluster
  std::vector<TrajectoryTarget> targets_;
};

/// Mean squared distance of selected driven vertices to target points.
struct VertexTarget {
  int frame = 0;
  int vertex = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

class VertexTargetObjective : public MotionObjective {
 public:
  explicit VertexTargetObjective(std::vector<VertexTarget> targets);
  ObjectiveEval evaluate(const KeyframeSequence& frames) override;
  double reevaluate(const KeyframeSequence& frames) override;

 private:
  std::vector<VertexTarget> targets_;
};

/// Mean squared pixel difference between rendered and target masks.
/// Rasterization is not differentiable, so gradients come from finite
/// differences over the handle parameters. A single target mask is
/// broadcast to every frame.
class SilhouetteObjective : public MotionObjective {
 public:
  SilhouetteObjective(Camera camera, std::vector<Silhouette> targets);
  ObjectiveEval evaluate(const KeyframeSequence& frames) override;
  double reevaluate(const KeyframeSequence& frames) override;

 private:
  Camera camera_;
  std::vector<Silhouette> targets_;
};

/// Exercises the score-distillation pathway at desk scale: each frame's
/// silhouette is rendered, a distillation gradient g is drawn against the
/// toy denoiser, and the surrogate loss weight * mean_n dot(g_n, x_n) is
/// minimized. g is frozen between evaluate() calls so finite differences
/// probe a fixed function; its dot-product gradient w.r.t. pixels is
/// exactly the distillation gradient. The surrogate value may be negative.
class SdsToyObjective : public MotionObjective {
 public:
  SdsToyObjective(Camera camera, GaussianToyDenoiser denoiser, DistillConfig cfg, double weight,
                  Rng rng, std::string cond = std::string());
  ObjectiveEval evaluate(const KeyframeSequence& frames) override;
  double reevaluate(const KeyframeSequence& frames) override;

 private:
  Camera camera_;
  GaussianToyDenoiser denoiser_;
  DistillConfig cfg_;
  double weight_;
  Rng rng_;
  std::string cond_;
  std::vector<Eigen::VectorXd> frozen_;  // last drawn per-frame gradients
};

}  // namespace animesh
