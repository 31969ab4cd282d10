#pragma once

// Riemannian Gauss-Newton on the product manifold of planar dual quaternions.
//
// Edge error  e_ij = Log_1(z_ij^-1 (+) x_i^-1 (+) x_j)
// Edge cost   f_ij = 1/2 e^T Omega e
// Total cost  F    = sum e^T Omega e          (no 1/2; the argmin is the same)
//
// Gradients and Hessian blocks follow f_ij; the Newton step is invariant to
// the global factor. The linear system is solved in per-node tangent-basis
// coordinates with one anchor node removed, which makes it SPD for any
// connected graph.

#include "dqpgo/planar_dual_quaternion.hpp"
#include "dqpgo/pose_graph.hpp"

#include <Eigen/SparseCore>

#include <optional>
#include <string>
#include <vector>

namespace dqpgo {

struct SolverConfig {
  int max_iterations = 100;
  double gradient_tolerance = 1e-6;
  /// Run exactly this many iterations with the gradient test disabled.
  std::optional<int> fixed_iterations;
  std::size_t anchor_node = 0;
  /// Added to the diagonal of the reduced Hessian.
  double damping = 0.0;
  /// Number of 10x damping escalations tried when the factorization fails.
  int linear_solve_retries = 4;
  /// When false the per-iteration wall time is recorded as zero.
  bool record_timing = true;
};

/// Throws std::invalid_argument when a field is out of range for `graph`.
void checkConfig(const SolverConfig& config, const PoseGraph& graph);

enum class TerminationReason { GradientConverged, IterationLimit, LinearSolveFailure };

std::string toString(TerminationReason reason);

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;           // total cost after the step
  double gradient_norm = 0.0;  // Riemannian gradient norm before the step
  double step_norm = 0.0;
  double millis = 0.0;
};

struct SolverReport {
  double initial_cost = 0.0;
  std::vector<IterationRecord> iterations;
  TerminationReason termination = TerminationReason::IterationLimit;
};

struct EdgeJacobians {
  Eigen::Matrix<double, 3, 4> wrt_from;  // A_ij, d e_ij / d x_i
  Eigen::Matrix<double, 3, 4> wrt_to;    // B_ij, d e_ij / d x_j
};

TangentVectord edgeError(const PlanarDualQuaterniond& x_i, const PlanarDualQuaterniond& x_j,
                         const PlanarDualQuaterniond& z);

/// 1/2 e^T Omega e.
double edgeCost(const PlanarDualQuaterniond& x_i, const PlanarDualQuaterniond& x_j,
                const Edge& edge);

/// sum over edges of e^T Omega e.
double totalCost(const PoseGraph& graph);

/// Ambient Jacobians of the edge error, treating x_i and x_j as free
/// 4-vectors (inverse = conjugate, Log_1 applied to the raw product).
EdgeJacobians edgeJacobians(const PlanarDualQuaterniond& x_i,
                            const PlanarDualQuaterniond& x_j,
                            const PlanarDualQuaterniond& z);

/// Stacked 4n vector; block i is sum over incident edges of P_i J^T Omega e.
Eigen::VectorXd riemannianGradient(const PoseGraph& graph);

/// 4n x 4n approximated Riemannian Hessian with 4x4 blocks P J^T Omega J P^T.
Eigen::SparseMatrix<double> hessianBlocks(const PoseGraph& graph);

struct StepResult {
  PoseGraph graph;
  double step_norm = 0.0;
  double gradient_norm = 0.0;
  bool solved = true;
};

/// One Gauss-Newton iteration: solve the reduced system and retract every
/// non-anchor node with the exponential map.
StepResult gnStep(const PoseGraph& graph, const SolverConfig& config);

struct OptimizeResult {
  PoseGraph graph;
  SolverReport report;
};

OptimizeResult optimize(const PoseGraph& graph, const SolverConfig& config);

/// The error Log_1 of the relative pose (dtheta, dt) written as
/// 1/2 [[1, 0, 0], [0, beta, alpha], [0, -alpha, beta]] [dtheta, dt_x, dt_y]
/// with alpha = dtheta/2 and beta = cos(dtheta/2)/sinc(dtheta/2).
TangentVectord adaptErrorSmallAngle(const Eigen::Vector3d& delta);

}  // namespace dqpgo
