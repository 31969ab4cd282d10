#pragma once

#include "dqpgo/pose_graph.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

namespace dqpgo::test {

inline constexpr double kPi = std::numbers::pi;

inline std::string dataPath(const std::string& name) { return std::string(DQPGO_DATA_DIR) + "/" + name; }
inline std::string fixturePath(const std::string& name) {
  return std::string(DQPGO_FIXTURE_DIR) + "/" + name;
}

// Scratch directory under the build tree, one per test binary.
inline std::filesystem::path scratchDir(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path(DQPGO_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Random {
  std::mt19937_64 engine;
  explicit Random(std::uint64_t seed) : engine(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine); }
  double angle() { return uniform(-kPi + 1e-6, kPi - 1e-6); }
  Eigen::Vector2d point(double scale = 5.0) { return {uniform(-scale, scale), uniform(-scale, scale)}; }

  PlanarDualQuaterniond pose(double scale = 5.0) {
    return PlanarDualQuaterniond::FromPose(angle(), point(scale));
  }

  // Unit real part with either sign, not canonicalized.
  PlanarDualQuaterniond anySign(double scale = 5.0) {
    const PlanarDualQuaterniond x = pose(scale);
    return uniform(0, 1) < 0.5 ? -x : x;
  }

  InformationMatrix information() {
    Eigen::Matrix3d a;
    for (int k = 0; k < 9; ++k) a(k / 3, k % 3) = uniform(-1, 1);
    Eigen::Matrix3d m = a * a.transpose() + 0.5 * Eigen::Matrix3d::Identity();
    return 0.5 * (m + m.transpose());
  }

  PlanarDualQuaterniond perturbation(double size) {
    return PlanarDualQuaterniond::FromPose(uniform(-size, size), point(size));
  }

  // Connected graph: chain plus `extra` random edges, measurements near consistent.
  PoseGraph graph(std::size_t n, std::size_t extra, double noise = 0.2) {
    PoseGraph g;
    for (std::size_t k = 0; k < n; ++k) g.nodes.push_back(pose(3.0));
    auto add = [&](std::size_t i, std::size_t j) {
      const PlanarDualQuaterniond z = g.nodes[i].inverse() * g.nodes[j] * perturbation(noise);
      g.edges.push_back({i, j, z, information()});
    };
    for (std::size_t k = 0; k + 1 < n; ++k) add(k, k + 1);
    for (std::size_t e = 0; e < extra && n > 2; ++e) {
      std::size_t i = index(n);
      std::size_t j = index(n);
      if (i == j) j = (i + 1) % n;
      add(i, j);
    }
    return g;
  }
};

inline double maxPoseDifference(const PoseGraph& a, const PoseGraph& b) {
  // x and -x are the same pose; canonical() is discontinuous at x0 == 0
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Eigen::Vector4d& p = a.nodes[k].coeffs();
    const Eigen::Vector4d& q = b.nodes[k].coeffs();
    worst = std::max(worst, std::min((p - q).cwiseAbs().maxCoeff(), (p + q).cwiseAbs().maxCoeff()));
  }
  return worst;
}

}  // namespace dqpgo::test
