#include "animesh/arap.hpp"

#include <cmath>
#include <utility>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "animesh/errors.hpp"
#include "animesh/parallel.hpp"

namespace animesh {

void RigidityConfig::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0)
    throw ValidationError("rigidity config: lambda1 and lambda2 must be >= 0");
  if (max_iters < 1) throw ValidationError("rigidity config: max_iters must be >= 1");
  // tol == 0 disables the convergence test and runs the full budget.
  if (!(tol >= 0.0)) throw ValidationError("rigidity config: tol must be >= 0");
  if (regulate_every < 1) throw ValidationError("rigidity config: regulate_every must be >= 1");
}

namespace {

void check_pair(const TriangleMesh& rest, const std::vector<Eigen::Vector3d>& deformed,
                const CotanLaplacian& lap) {
  if (deformed.size() != rest.vertices.size())
    throw ValidationError("arap: deformed vertex count does not match the rest mesh");
  if (lap.one_rings.size() != rest.vertices.size())
    throw ValidationError("arap: weights were built for a different mesh");
}

}  // namespace

Eigen::Matrix3d fit_rotation_from_covariance(const Eigen::Matrix3d& covariance) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(covariance, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixV() * svd.matrixU().transpose();
  if (r.determinant() < 0.0) {
    // Reflection: flip the weakest singular direction.
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    d(2, 2) = -1.0;
    r = svd.matrixV() * d * svd.matrixU().transpose();
  }
  return r;
}

LocalRotations optimal_rotations(const TriangleMesh& rest,
                                 const std::vector<Eigen::Vector3d>& deformed,
                                 const CotanLaplacian& lap) {
  check_pair(rest, deformed, lap);
  const int nv = rest.vertex_count();
  LocalRotations rotations(static_cast<std::size_t>(nv));
  for (int i = 0; i < nv; ++i) {
    const std::vector<int>& ring = lap.one_rings[static_cast<std::size_t>(i)];
    if (ring.empty())
      throw ValidationError("optimal_rotations: vertex " + std::to_string(i) +
                            " has an empty one-ring");
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::size_t r = 0; r < ring.size(); ++r) {
      const std::size_t j = static_cast<std::size_t>(ring[r]);
      const double w = lap.ring_weights[static_cast<std::size_t>(i)][r];
      const Eigen::Vector3d e = rest.vertices[static_cast<std::size_t>(i)] - rest.vertices[j];
      const Eigen::Vector3d ed = deformed[static_cast<std::size_t>(i)] - deformed[j];
      cov += w * e * ed.transpose();
    }
    rotations[static_cast<std::size_t>(i)] = fit_rotation_from_covariance(cov);
  }
  return rotations;
}

double arap_energy(const TriangleMesh& rest, const std::vector<Eigen::Vector3d>& deformed,
                   const CotanLaplacian& lap, const LocalRotations& rotations) {
  check_pair(rest, deformed, lap);
  if (rotations.size() != rest.vertices.size())
    throw ValidationError("arap_energy: rotation count does not match the mesh");
  double energy = 0.0;
  for (std::size_t i = 0; i < lap.one_rings.size(); ++i) {
    const std::vector<int>& ring = lap.one_rings[i];
    for (std::size_t r = 0; r < ring.size(); ++r) {
      const std::size_t j = static_cast<std::size_t>(ring[r]);
      const double w = lap.ring_weights[i][r];
      const Eigen::Vector3d e = rest.vertices[i] - rest.vertices[j];
      const Eigen::Vector3d ed = deformed[i] - deformed[j];
      energy += w * (ed - rotations[i] * e).squaredNorm();
    }
  }
  return energy;
}

double arap_energy(const TriangleMesh& rest, const std::vector<Eigen::Vector3d>& deformed,
                   const CotanLaplacian& lap) {
  return arap_energy(rest, deformed, lap, optimal_rotations(rest, deformed, lap));
}

double anchor_mse(const std::vector<Eigen::Vector3d>& regulated,
                  const std::vector<Eigen::Vector3d>& driven, const std::vector<int>& anchors) {
  if (anchors.empty()) throw ValidationError("anchor_mse: no anchor vertices");
  if (regulated.size() != driven.size())
    throw ValidationError("anchor_mse: vertex count mismatch");
  double sum = 0.0;
  for (int a : anchors) {
    if (a < 0 || a >= static_cast<int>(driven.size()))
      throw ValidationError("anchor_mse: anchor index out of range");
    sum += (regulated[static_cast<std::size_t>(a)] - driven[static_cast<std::size_t>(a)]).squaredNorm();
  }
  return sum / (3.0 * static_cast<double>(anchors.size()));
}

double rigidity_loss(const KeyframeSequence& driven,
                     const std::vector<std::vector<Eigen::Vector3d>>& regulated,
                     const std::vector<int>& anchors, const CotanLaplacian& lap,
                     const RigidityConfig& cfg) {
  cfg.validate();
  driven.validate();
  if (regulated.size() != driven.frames.size())
    throw ValidationError("rigidity_loss: frame count mismatch");
  double loss = 0.0;
  for (std::size_t n = 0; n < regulated.size(); ++n) {
    loss += cfg.lambda1 * arap_energy(driven.base, regulated[n], lap);
    loss += cfg.lambda2 * anchor_mse(regulated[n], driven.frames[n], anchors);
  }
  return loss;
}

Regulator::Regulator(const TriangleMesh& rest, const CotanLaplacian& lap,
                     std::vector<int> anchors, const RigidityConfig& cfg)
    : rest_(rest), lap_(lap), anchors_(std::move(anchors)), cfg_(cfg) {
  cfg_.validate();
  rest_.validate();
  if (lap_.one_rings.size() != rest_.vertices.size())
    throw ValidationError("regulator: weights were built for a different mesh");
  if (anchors_.empty() || cfg_.lambda2 <= 0.0)
    throw NumericalError(
        "regulator: the position system is singular without the anchor term; "
        "set lambda2 > 0 and provide at least one anchor (or pin a vertex)");
  const int nv = rest_.vertex_count();
  std::vector<char> is_anchor(static_cast<std::size_t>(nv), 0);
  for (int a : anchors_) {
    if (a < 0 || a >= nv) throw ValidationError("regulator: anchor index out of range");
    is_anchor[static_cast<std::size_t>(a)] = 1;
  }
  anchor_coeff_ = cfg_.lambda2 / (3.0 * static_cast<double>(anchors_.size()));

  // Without the rigidity term the driven positions are already optimal and the
  // position system (zero Laplacian plus anchor diagonal) is singular off the
  // anchors, so skip the factorization entirely.
  if (cfg_.lambda1 == 0.0) return;

  // 2*lambda1*L + c*D, assembled from the undirected edge list.
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(lap_.edges.size() * 4 + static_cast<std::size_t>(nv));
  for (std::size_t e = 0; e < lap_.edges.size(); ++e) {
    const auto [i, j] = lap_.edges[e];
    const double w = 2.0 * cfg_.lambda1 * lap_.weights[e];
    triplets.emplace_back(i, i, w);
    triplets.emplace_back(j, j, w);
    triplets.emplace_back(i, j, -w);
    triplets.emplace_back(j, i, -w);
  }
  for (int i = 0; i < nv; ++i)
    if (is_anchor[static_cast<std::size_t>(i)]) triplets.emplace_back(i, i, anchor_coeff_);

  system_.resize(nv, nv);
  system_.setFromTriplets(triplets.begin(), triplets.end());
  system_.makeCompressed();
  solver_.compute(system_);
  if (solver_.info() != Eigen::Success)
    throw NumericalError(
        "regulator: factorization failed; the system is singular or indefinite. "
        "Set lambda2 > 0, provide anchors in every connected component, or clamp "
        "negative weights");
}

LocalRotations Regulator::local_step(const std::vector<Eigen::Vector3d>& current) const {
  return optimal_rotations(rest_, current, lap_);
}

std::vector<Eigen::Vector3d> Regulator::global_step(
    const LocalRotations& rotations, const std::vector<Eigen::Vector3d>& driven) const {
  const int nv = rest_.vertex_count();
  if (static_cast<int>(rotations.size()) != nv || static_cast<int>(driven.size()) != nv)
    throw ValidationError("global_step: size mismatch");

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nv, 3);
  for (std::size_t i = 0; i < lap_.one_rings.size(); ++i) {
    const std::vector<int>& ring = lap_.one_rings[i];
    Eigen::Vector3d row = Eigen::Vector3d::Zero();
    for (std::size_t r = 0; r < ring.size(); ++r) {
      const std::size_t j = static_cast<std::size_t>(ring[r]);
      const double w = lap_.ring_weights[i][r];
      const Eigen::Vector3d e = rest_.vertices[i] - rest_.vertices[j];
      row += w * ((rotations[i] + rotations[j]) * e);
    }
    rhs.row(static_cast<Eigen::Index>(i)) = (cfg_.lambda1 * row).transpose();
  }
  for (int a : anchors_)
    rhs.row(a) += anchor_coeff_ * driven[static_cast<std::size_t>(a)].transpose();

  const Eigen::MatrixXd solution = solver_.solve(rhs);
  if (solver_.info() != Eigen::Success || !solution.allFinite())
    throw NumericalError(
        "global_step: solve failed; set lambda2 > 0 or anchor every component");

  std::vector<Eigen::Vector3d> out(static_cast<std::size_t>(nv));
  for (int i = 0; i < nv; ++i) out[static_cast<std::size_t>(i)] = solution.row(i).transpose();
  return out;
}

RegulationRow Regulator::evaluate(const std::vector<Eigen::Vector3d>& positions,
                                  const LocalRotations& rotations,
                                  const std::vector<Eigen::Vector3d>& driven) const {
  RegulationRow row;
  row.arap_term = arap_energy(rest_, positions, lap_, rotations);
  row.mse_term = anchor_mse(positions, driven, anchors_);
  row.loss = cfg_.lambda1 * row.arap_term + cfg_.lambda2 * row.mse_term;
  return row;
}

RegulationTrace Regulator::regulate_frame(const std::vector<Eigen::Vector3d>& driven,
                                          std::vector<Eigen::Vector3d>& out) const {
  out = driven;
  RegulationTrace trace;

  // lambda1 = 0 leaves only the anchor term, which the driven positions
  // already minimize exactly.
  if (cfg_.lambda1 == 0.0) {
    RegulationRow row;
    row.mse_term = anchor_mse(out, driven, anchors_);
    row.loss = cfg_.lambda2 * row.mse_term;
    trace.rows.push_back(row);
    trace.stop_reason = "converged";
    return trace;
  }

  LocalRotations rotations = local_step(out);
  RegulationRow row = evaluate(out, rotations, driven);
  trace.rows.push_back(row);
  double previous = row.loss;

  trace.stop_reason = "max_iters";
  for (int iter = 1; iter <= cfg_.max_iters; ++iter) {
    out = global_step(rotations, driven);
    rotations = local_step(out);
    row = evaluate(out, rotations, driven);
    row.iteration = iter;
    trace.rows.push_back(row);
    if (std::abs(previous - row.loss) < cfg_.tol) {
      trace.stop_reason = "converged";
      break;
    }
    previous = row.loss;
  }
  return trace;
}

RegulationResult regulate(const KeyframeSequence& driven, const std::vector<int>& anchors,
                          const CotanLaplacian& lap, const RigidityConfig& cfg) {
  driven.validate();
  const Regulator regulator(driven.base, lap, anchors, cfg);

  RegulationResult result;
  result.negative_weights = lap.has_negative_weights;
  const std::size_t nf = driven.frames.size();
  result.frames.resize(nf);
  result.traces.resize(nf);
  parallel_for(nf, [&](std::size_t n) {
    result.traces[n] = regulator.regulate_frame(driven.frames[n], result.frames[n]);
  });
  for (const RegulationTrace& trace : result.traces) {
    result.initial_loss += trace.rows.front().loss;
    result.final_loss += trace.rows.back().loss;
  }
  return result;
}

}  // namespace animesh
