#pragma once

#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "animesh/deform.hpp"
#include "animesh/laplacian.hpp"
#include "animesh/mesh.hpp"

namespace animesh {

struct RigidityConfig {
  double lambda1 = 1e-4;   // weight of the surface-rigidity term
  double lambda2 = 1.0;    // weight of the anchor-fidelity term
  int max_iters = 500;     // cap per regulation call
  double tol = 1e-7;       // stop when |loss change| drops below this
  int regulate_every = 500;  // outer-loop period (used by the animator)

  void validate() const;
};

/// Per-vertex proper rotations fitted to each 1-ring.
using LocalRotations = std::vector<Eigen::Matrix3d>;

/// Proper rotation maximizing tr(R * covariance): SVD with the weakest
/// singular direction flipped when the raw polar factor is a reflection.
Eigen::Matrix3d fit_rotation_from_covariance(const Eigen::Matrix3d& covariance);

/// R_i = argmin_R sum_{j in N(i)} w_ij || (v'_i - v'_j) - R (v_i - v_j) ||^2,
/// from the SVD of the weighted edge covariance with det forced to +1.
/// A vertex with an empty one-ring is an error.
LocalRotations optimal_rotations(const TriangleMesh& rest,
                                 const std::vector<Eigen::Vector3d>& deformed,
                                 const CotanLaplacian& lap);

/// Deformation energy sum_i sum_{j in N(i)} w_ij ||(v'_i - v'_j) - R_i (v_i - v_j)||^2
/// with the rotations fitted internally (first form) or supplied (second).
double arap_energy(const TriangleMesh& rest, const std::vector<Eigen::Vector3d>& deformed,
                   const CotanLaplacian& lap);
double arap_energy(const TriangleMesh& rest, const std::vector<Eigen::Vector3d>& deformed,
                   const CotanLaplacian& lap, const LocalRotations& rotations);

/// Mean squared coordinate deviation over the anchor vertices:
/// sum_a ||v'_a - p_a||^2 / (3 * anchor_count).
double anchor_mse(const std::vector<Eigen::Vector3d>& regulated,
                  const std::vector<Eigen::Vector3d>& driven, const std::vector<int>& anchors);

/// Total regulation loss over all frames:
///   lambda1 * sum_n E(rest, regulated_n) + lambda2 * sum_n anchor_mse(regulated_n, driven_n).
/// The anchor targets are the driven (pre-regulation) positions.
double rigidity_loss(const KeyframeSequence& driven,
                     const std::vector<std::vector<Eigen::Vector3d>>& regulated,
                     const std::vector<int>& anchors, const CotanLaplacian& lap,
                     const RigidityConfig& cfg);

struct RegulationRow {
  int iteration = 0;       // 0 is the state before the first global step
  double arap_term = 0.0;  // unweighted E for this frame
  double mse_term = 0.0;   // unweighted anchor MSE for this frame
  double loss = 0.0;       // lambda1 * E + lambda2 * MSE
};

struct RegulationTrace {
  std::vector<RegulationRow> rows;
  std::string stop_reason;  // "converged" or "max_iters"
};

struct RegulationResult {
  std::vector<std::vector<Eigen::Vector3d>> frames;  // regulated positions
  std::vector<RegulationTrace> traces;               // one per frame
  double initial_loss = 0.0;                         // summed over frames
  double final_loss = 0.0;
  bool negative_weights = false;  // monotone decrease is then not guaranteed
};

/// Alternating local/global minimizer of the regulation loss for one mesh
/// topology. The sparse system matrix 2*lambda1*L + c*D (graph Laplacian L,
/// anchor indicator D, c = lambda2 / (3 * anchor_count)) depends only on the weights
/// and the config, so it is factored once and reused across frames, calls,
/// and threads.
class Regulator {
 public:
  Regulator(const TriangleMesh& rest, const CotanLaplacian& lap, std::vector<int> anchors,
            const RigidityConfig& cfg);

  /// Fits per-vertex rotations to the current positions (exact minimizer of
  /// the rigidity term over rotations).
  LocalRotations local_step(const std::vector<Eigen::Vector3d>& current) const;

  /// Solves for positions minimizing the loss with rotations held fixed;
  /// anchor targets are read from `driven`.
  std::vector<Eigen::Vector3d> global_step(const LocalRotations& rotations,
                                           const std::vector<Eigen::Vector3d>& driven) const;

  /// Runs the alternation from the driven positions until |delta loss| < tol
  /// or max_iters. Each iteration is one global step followed by one local
  /// step; every reported loss uses rotations optimal for the reported
  /// positions.
  RegulationTrace regulate_frame(const std::vector<Eigen::Vector3d>& driven,
                                 std::vector<Eigen::Vector3d>& out) const;

  const RigidityConfig& config() const { return cfg_; }
  const std::vector<int>& anchors() const { return anchors_; }

 private:
  RegulationRow evaluate(const std::vector<Eigen::Vector3d>& positions,
                         const LocalRotations& rotations,
                         const std::vector<Eigen::Vector3d>& driven) const;

  TriangleMesh rest_;
  CotanLaplacian lap_;
  std::vector<int> anchors_;
  RigidityConfig cfg_;
  double anchor_coeff_ = 0.0;  // lambda2 / (3 * anchor_count)
  Eigen::SparseMatrix<double> system_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

/// Regulates every frame independently (the loss couples each frame only to
/// the rest pose); frames may run in parallel with identical results.
RegulationResult regulate(const KeyframeSequence& driven, const std::vector<int>& anchors,
                          const CotanLaplacian& lap, const RigidityConfig& cfg);

}  // namespace animesh
