#pragma once

#include "dqpgo/pose_graph.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace dqpgo {

/// SplitMix64 evaluated at (seed, counter): draw k depends only on the seed
/// and k, so results do not depend on call order or platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform in (0, 1).
  double uniform(std::uint64_t counter) const;
  /// Standard normal pair from Box-Muller on counters 2k and 2k + 1.
  Eigen::Vector2d normalPair(std::uint64_t k) const;

 private:
  std::uint64_t seed_;
};

struct NoiseSpec {
  Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();  // over [dtheta, dt_x, dt_y]
  std::uint64_t seed = 0;
  bool sequential_only = false;  // perturb only edges <k, k+1>
};

/// Parses 6 (upper triangle, row-major) or 9 (full, row-major) numbers.
Eigen::Matrix3d covarianceFromValues(const std::vector<double>& values);

struct PerturbResult {
  PoseGraph graph;
  std::vector<std::string> diagnostics;
};

/// z'_ij = z_ij (+) FromPose(nu_1, (nu_2, nu_3)) with nu ~ N(0, Sigma) drawn
/// independently per edge; Omega_ij = Sigma^-1 (pseudo-inverse with a
/// diagnostic when Sigma is singular, untouched when Sigma is zero).
/// Throws std::invalid_argument when Sigma is not symmetric PSD.
PerturbResult perturb(const PoseGraph& graph, const NoiseSpec& spec);

/// The noise triple used for edge `edge_index`, nu = L * xi with Sigma = L L^T.
Eigen::Vector3d drawNoise(const Eigen::Matrix3d& factor, const CounterRng& rng,
                          std::size_t edge_index);

/// Square-root factor of a PSD covariance (Cholesky, or eigen when singular).
Eigen::Matrix3d covarianceFactor(const Eigen::Matrix3d& sigma);

/// Replaces every measurement with the relative pose x_i^-1 (+) x_j.
PoseGraph withConsistentMeasurements(PoseGraph graph);

struct RingGraphs {
  PoseGraph truth;
  PoseGraph odometry;
};

/// n poses on a circle, n - 1 sequential edges plus `closures` distinct
/// random loop closures, all measurements exact and Omega = I.
RingGraphs makeRing(std::size_t n, double radius, std::size_t closures, std::uint64_t seed);

}  // namespace dqpgo
