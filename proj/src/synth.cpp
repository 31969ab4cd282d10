#include "dqpgo/synth.hpp"

#include "dqpgo/initialization.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>
#include <utility>

namespace dqpgo {

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  std::uint64_t z = seed_ + (counter + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

Eigen::Vector2d CounterRng::normalPair(std::uint64_t k) const {
  const double radius = std::sqrt(-2.0 * std::log(uniform(2 * k)));
  const double angle = 2.0 * std::numbers::pi * uniform(2 * k + 1);
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

Eigen::Matrix3d covarianceFromValues(const std::vector<double>& v) {
  Eigen::Matrix3d sigma;
  if (v.size() == 9) {
    sigma << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  } else if (v.size() == 6) {
    sigma << v[0], v[1], v[2],
             v[1], v[3], v[4],
             v[2], v[4], v[5];
  } else {
    throw std::invalid_argument("covariance needs 6 or 9 values");
  }
  return sigma;
}

namespace {

void checkCovariance(const Eigen::Matrix3d& sigma) {
  if (!sigma.allFinite()) throw std::invalid_argument("covariance is not finite");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("covariance is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(sigma, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
    throw std::invalid_argument("covariance is not positive semidefinite");
  }
}

}  // namespace

Eigen::Matrix3d covarianceFactor(const Eigen::Matrix3d& sigma) {
  checkCovariance(sigma);
  const Eigen::LLT<Eigen::Matrix3d> llt(sigma);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(sigma);
  const Eigen::Vector3d roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal();
}

Eigen::Vector3d drawNoise(const Eigen::Matrix3d& factor, const CounterRng& rng,
                          std::size_t edge_index) {
  const Eigen::Vector2d a = rng.normalPair(2 * edge_index);
  const Eigen::Vector2d b = rng.normalPair(2 * edge_index + 1);
  return factor * Eigen::Vector3d(a.x(), a.y(), b.x());
}

PerturbResult perturb(const PoseGraph& graph, const NoiseSpec& spec) {
  const Eigen::Matrix3d factor = covarianceFactor(spec.sigma);

  PerturbResult result{graph, {}};
  const bool zero = spec.sigma.isZero(0.0);
  if (zero) return result;
  Eigen::Matrix3d information;
  const Eigen::LLT<Eigen::Matrix3d> llt(spec.sigma);
  if (llt.info() == Eigen::Success) {
    information = llt.solve(Eigen::Matrix3d::Identity());
  } else {
    information = spec.sigma.completeOrthogonalDecomposition().pseudoInverse();
    result.diagnostics.push_back("covariance is singular; information set to its pseudo-inverse");
  }
  information = 0.5 * (information + information.transpose());

  const CounterRng rng(spec.seed);
  for (std::size_t k = 0; k < result.graph.edges.size(); ++k) {
    Edge& edge = result.graph.edges[k];
    if (spec.sequential_only && edge.to != edge.from + 1) continue;
    const Eigen::Vector3d nu = drawNoise(factor, rng, k);
    edge.measurement =
        edge.measurement * PlanarDualQuaterniond::FromPose(nu[0], {nu[1], nu[2]});
    edge.information = information;
  }
  return result;
}

PoseGraph withConsistentMeasurements(PoseGraph graph) {
  for (Edge& edge : graph.edges) {
    edge.measurement = graph.nodes[edge.from].inverse() * graph.nodes[edge.to];
  }
  return graph;
}

RingGraphs makeRing(std::size_t n, double radius, std::size_t closures, std::uint64_t seed) {
  if (n < 3) throw std::invalid_argument("a ring needs at least 3 nodes");
  const std::size_t available = n * (n - 1) / 2 - (n - 1);
  if (closures > available) throw std::invalid_argument("too many loop closures requested");

  PoseGraph truth;
  for (std::size_t k = 0; k < n; ++k) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    truth.nodes.push_back(PlanarDualQuaterniond::FromPose(
        phi + std::numbers::pi / 2.0, {radius * std::cos(phi), radius * std::sin(phi)}));
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    truth.edges.push_back({k, k + 1, {}, InformationMatrix::Identity()});
  }

  const CounterRng rng(seed);
  std::set<std::pair<std::size_t, std::size_t>> chosen;
  for (std::uint64_t draw = 0; chosen.size() < closures; draw += 2) {
    std::size_t a = rng.bits(draw) % n;
    std::size_t b = rng.bits(draw + 1) % n;
    if (a > b) std::swap(a, b);
    if (b - a < 2 || !chosen.emplace(a, b).second) continue;
    truth.edges.push_back({b, a, {}, InformationMatrix::Identity()});
  }
  truth = withConsistentMeasurements(std::move(truth));
  return {truth, odometryInitialize(truth)};
}

}  // namespace dqpgo
