#pragma once

#include "dqpgo/pose_graph.hpp"

#include <Eigen/Core>

#include <vector>

namespace dqpgo {

struct ChordalSolution {
  std::vector<double> angles;
  std::vector<Eigen::Vector2d> translations;

  std::vector<PlanarDualQuaterniond> poses() const;
};

/// Relaxes each rotation to an unconstrained 2-vector r_i ~ [cos, sin],
/// solves the weighted linear least squares r_j = R(theta_ij) r_i with the
/// anchor fixed at its current rotation, then projects back onto the circle.
/// Rows are weighted by Omega(0, 0). Throws std::runtime_error when the
/// normal equations are singular.
std::vector<double> chordalRotations(const PoseGraph& graph, std::size_t anchor = 0);

/// Linear least squares t_j - t_i = R(theta_i) t_ij with the translational
/// information block rotated into the world frame; the anchor keeps its
/// translation.
std::vector<Eigen::Vector2d> chordalTranslations(const PoseGraph& graph,
                                                 const std::vector<double>& angles,
                                                 std::size_t anchor = 0);

ChordalSolution chordalSolve(const PoseGraph& graph, std::size_t anchor = 0);

/// Returns `graph` with its nodes replaced by the chordal solution.
PoseGraph chordalInitialize(const PoseGraph& graph, std::size_t anchor = 0);

/// Rebuilds node poses by chaining measurements outward from the anchor.
/// Sequential edges <k, k+1> are used first; nodes they do not reach are
/// filled in by a breadth-first spanning tree over the remaining edges.
PoseGraph odometryInitialize(const PoseGraph& graph, std::size_t anchor = 0);

}  // namespace dqpgo
