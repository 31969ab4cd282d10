#pragma once

#include "dqpgo/pose_graph.hpp"

namespace dqpgo {

struct RpeResult {
  double translational = 0.0;  // e_t, length units
  double rotational = 0.0;     // e_r, degrees
};

/// Reference cost on rotation matrices and translations:
///   sum || [Log(R_ij^T R_i^T R_j); R_ij^T (t_ij - R_i^T (t_j - t_i))] ||^2_Omega
/// with Log(R) the rotation angle in (-pi, pi].
double g2oCost(const PoseGraph& graph);

/// Relative pose error over the edges of `estimate`:
///   delta = (xhat_i^-1 xhat_j)^-1 (x_i^-1 x_j)
/// e_t = RMS of |translation(delta)|, e_r = RMS of |angle(delta)| in degrees.
/// With `sequential_only`, only edges <k, k+1> contribute.
/// Throws std::invalid_argument on a node-count mismatch.
RpeResult rpe(const PoseGraph& estimate, const PoseGraph& truth, bool sequential_only = false);

}  // namespace dqpgo
