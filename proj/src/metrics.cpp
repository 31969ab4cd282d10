#include "dqpgo/metrics.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dqpgo {

namespace {

// Wraps to (-pi, pi].
double wrapAngle(double a) {
  const Eigen::Matrix2d r = Eigen::Rotation2Dd(a).toRotationMatrix();
  return std::atan2(r(1, 0), r(0, 0));
}

}  // namespace

double g2oCost(const PoseGraph& graph) {
  double sum = 0.0;
  for (const Edge& edge : graph.edges) {
    const Pose2d xi = graph.nodes[edge.from].pose();
    const Pose2d xj = graph.nodes[edge.to].pose();
    const Pose2d z = edge.measurement.pose();
    const Eigen::Matrix2d r_i = Eigen::Rotation2Dd(xi.theta).toRotationMatrix();
    const Eigen::Matrix2d r_ij = Eigen::Rotation2Dd(z.theta).toRotationMatrix();

    // Log(R_ij^T R_i^T R_j) from the composed matrix entries.
    const Eigen::Matrix2d r_err = r_ij.transpose() * r_i.transpose() *
                                  Eigen::Rotation2Dd(xj.theta).toRotationMatrix();
    Eigen::Vector3d e;
    e[0] = std::atan2(r_err(1, 0), r_err(0, 0));
    e.tail<2>() = r_ij.transpose() * (z.t - r_i.transpose() * (xj.t - xi.t));
    sum += e.dot(edge.information * e);
  }
  return sum;
}

RpeResult rpe(const PoseGraph& estimate, const PoseGraph& truth, bool sequential_only) {
  if (estimate.size() != truth.size()) {
    throw std::invalid_argument("rpe: estimate and truth have different node counts");
  }
  double sum_t = 0.0;
  double sum_r = 0.0;
  std::size_t count = 0;
  for (const Edge& edge : estimate.edges) {
    if (sequential_only && edge.to != edge.from + 1) continue;
    const PlanarDualQuaterniond rel_est =
        estimate.nodes[edge.from].inverse() * estimate.nodes[edge.to];
    const PlanarDualQuaterniond rel_true = truth.nodes[edge.from].inverse() * truth.nodes[edge.to];
    const Pose2d delta = (rel_est.inverse() * rel_true).pose();
    sum_t += delta.t.squaredNorm();
    const double angle = std::abs(wrapAngle(delta.theta)) * 180.0 / std::numbers::pi;
    sum_r += angle * angle;
    ++count;
  }
  if (count == 0) return {};
  return {std::sqrt(sum_t / static_cast<double>(count)),
          std::sqrt(sum_r / static_cast<double>(count))};
}

}  // namespace dqpgo
