#pragma once

#include <utility>
#include <vector>

#include "animesh/arap.hpp"
#include "animesh/deform.hpp"
#include "animesh/laplacian.hpp"
#include "animesh/mesh.hpp"
#include "animesh/rig.hpp"

namespace animesh {

/// One loss evaluation. When has_vertex_gradient is false the optimizer
/// falls back to central finite differences over the handle parameters
/// (used by objectives built on non-differentiable rendering).
struct ObjectiveEval {
  double loss = 0.0;
  bool has_vertex_gradient = false;
  std::vector<std::vector<Eigen::Vector3d>> vertex_gradient;  // [frame][vertex]
};

/// Loss driving the motion optimization. evaluate() is called exactly once
/// per outer iteration; objectives with internal randomness draw it there.
/// reevaluate() measures the loss at probe frames with the stochastic draws
/// of the last evaluate() frozen, so finite differences see a fixed
/// function; the default forwards to evaluate() (correct for deterministic
/// objectives only).
class MotionObjective {
 public:
  virtual ~MotionObjective() = default;
  virtual ObjectiveEval evaluate(const KeyframeSequence& frames) = 0;
  virtual double reevaluate(const KeyframeSequence& frames) { return evaluate(frames).loss; }
};

struct AnimateSchedule {
  int total_iters = 30000;
  int regulate_every = 500;  // outer iterations between regulation passes
  int regulate_max = 500;    // iteration cap inside each regulation pass
  int keyframes = 16;
  double step_size = 0.05;         // optimizer learning rate
  double sds_weight = 0.1;         // forwarded to distillation-backed objectives when built
  double smoothness_weight = 0.0;  // optional temporal penalty on handle transforms
  double fd_step = 1e-4;           // central-difference step over handle parameters

  void validate() const;
};

struct RefitResult {
  MotionParams motion;
  bool rank_deficient = false;  // some cluster fell back to translation-only
  std::vector<std::pair<int, int>> degenerate;  // (frame, cluster) fallbacks
};

/// Per frame and cluster, the least-squares rigid transform (weighted
/// Kabsch about the handle point) mapping the rest cluster onto the given
/// positions. Clusters without 3 non-collinear rest vertices get a
/// translation-only fit with identity rotation and are flagged.
RefitResult refit_handles(const Rig& rig, const TriangleMesh& base,
                          const std::vector<std::vector<Eigen::Vector3d>>& frames);

/// Summary of one regulation pass, recorded at the outer iteration where it
/// ran (terms are summed over frames).
struct RegulationEvent {
  int iteration = 0;
  double arap_term = 0.0;
  double mse_term = 0.0;
  double loss_before = 0.0;
  double loss_after = 0.0;
};

struct AnimateResult {
  MotionParams motion;
  KeyframeSequence frames;           // driven by the final motion
  std::vector<double> loss_history;  // one entry per outer iteration
  int regulation_calls = 0;
  std::vector<RegulationEvent> regulation_events;
  std::vector<RegulationTrace> last_regulation;  // traces of the most recent pass
  bool refit_rank_deficient = false;
};

/// Optimizes MotionParams against the objective with adaptive per-parameter
/// step scaling, starting from the identity motion. Every regulate_every
/// iterations the driven frames are regulated and the handle parameters are
/// re-fit to the regulated positions (the optimizer state restarts there,
/// since the parameters jump). Regulation is skipped entirely when both
/// loss weights are zero. Analytic objective gradients are chained through
/// the motion Jacobian; otherwise central finite differences over all
/// 7 * handles * frames parameters are used.
AnimateResult animate(const TriangleMesh& mesh, const Rig& rig, const CotanLaplacian& lap,
                      MotionObjective& objective, const AnimateSchedule& schedule,
                      const RigidityConfig& rigidity);

}  // namespace animesh
