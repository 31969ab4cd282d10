#include "dqpgo/initialization.hpp"

#include <Eigen/Geometry>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cmath>
#include <deque>
#include <optional>
#include <stdexcept>

namespace dqpgo {

namespace {

Eigen::Matrix2d rotation(double angle) {
  return Eigen::Rotation2Dd(angle).toRotationMatrix();
}

// Column index of node k in a system with the anchor removed, 2 unknowns per node.
Eigen::Index column(std::size_t node, std::size_t anchor) {
  return 2 * static_cast<Eigen::Index>(node > anchor ? node - 1 : node);
}

// Accumulates a least-squares problem whose rows have the shape
// W^(1/2) (a_j - M a_i - c) with 2-vector unknowns per node.
class PairwiseLeastSquares {
 public:
  PairwiseLeastSquares(std::size_t nodes, std::size_t anchor, const Eigen::Vector2d& anchor_value)
      : anchor_(anchor),
        anchor_value_(anchor_value),
        rhs_(Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(nodes - 1))) {}

  // residual = a_j - m * a_i - c, weighted by w.
  void add(std::size_t i, std::size_t j, const Eigen::Matrix2d& m, const Eigen::Vector2d& c,
           const Eigen::Matrix2d& w) {
    // d residual / d a_i = -m, d residual / d a_j = I.
    const Eigen::Matrix2d ji = -m;
    Eigen::Vector2d target = c;
    if (i == anchor_) target -= ji * anchor_value_;
    if (j == anchor_) target -= anchor_value_;

    if (i != anchor_) {
      addBlock(i, i, ji.transpose() * w * ji);
      rhs_.segment<2>(column(i, anchor_)) += ji.transpose() * w * target;
    }
    if (j != anchor_) {
      addBlock(j, j, w);
      rhs_.segment<2>(column(j, anchor_)) += w * target;
    }
    if (i != anchor_ && j != anchor_) {
      addBlock(i, j, ji.transpose() * w);
      addBlock(j, i, w * ji);
    }
  }

  std::vector<Eigen::Vector2d> solve(std::size_t nodes) const {
    const auto dim = rhs_.size();
    Eigen::SparseMatrix<double> normal(dim, dim);
    normal.setFromTriplets(triplets_.begin(), triplets_.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(normal);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
      throw std::runtime_error("chordal initialization: singular normal equations");
    }
    const Eigen::VectorXd x = ldlt.solve(rhs_);
    if (ldlt.info() != Eigen::Success || !x.allFinite()) {
      throw std::runtime_error("chordal initialization: linear solve failed");
    }
    std::vector<Eigen::Vector2d> out(nodes);
    for (std::size_t k = 0; k < nodes; ++k) {
      out[k] = k == anchor_ ? anchor_value_ : Eigen::Vector2d(x.segment<2>(column(k, anchor_)));
    }
    return out;
  }

 private:
  void addBlock(std::size_t row, std::size_t col, const Eigen::Matrix2d& block) {
    const Eigen::Index r0 = column(row, anchor_);
    const Eigen::Index c0 = column(col, anchor_);
    for (int c = 0; c < 2; ++c) {
      for (int r = 0; r < 2; ++r) triplets_.emplace_back(r0 + r, c0 + c, block(r, c));
    }
  }

  std::size_t anchor_;
  Eigen::Vector2d anchor_value_;
  Eigen::VectorXd rhs_;
  std::vector<Eigen::Triplet<double>> triplets_;
};

void checkInput(const PoseGraph& graph, std::size_t anchor) {
  if (anchor >= graph.size()) throw std::invalid_argument("anchor is not a node of the graph");
  if (!isConnected(graph)) throw std::runtime_error("chordal initialization: graph is not connected");
}

}  // namespace

std::vector<PlanarDualQuaterniond> ChordalSolution::poses() const {
  std::vector<PlanarDualQuaterniond> out;
  out.reserve(angles.size());
  for (std::size_t k = 0; k < angles.size(); ++k) {
    out.push_back(PlanarDualQuaterniond::FromPose(angles[k], translations[k]));
  }
  return out;
}

std::vector<double> chordalRotations(const PoseGraph& graph, std::size_t anchor) {
  checkInput(graph, anchor);
  const std::size_t n = graph.size();
  if (n == 1) return {graph.nodes[0].angle()};

  const double anchor_angle = graph.nodes[anchor].angle();
  PairwiseLeastSquares problem(n, anchor, {std::cos(anchor_angle), std::sin(anchor_angle)});
  for (const Edge& edge : graph.edges) {
    const double weight = edge.information(0, 0);
    problem.add(edge.from, edge.to, rotation(edge.measurement.angle()), Eigen::Vector2d::Zero(),
                weight * Eigen::Matrix2d::Identity());
  }
  const std::vector<Eigen::Vector2d> relaxed = problem.solve(n);

  std::vector<double> angles(n);
  for (std::size_t k = 0; k < n; ++k) {
    angles[k] = k == anchor ? anchor_angle
                : relaxed[k].norm() < 1e-12 ? 0.0
                                            : std::atan2(relaxed[k].y(), relaxed[k].x());
  }
  return angles;
}

std::vector<Eigen::Vector2d> chordalTranslations(const PoseGraph& graph,
                                                 const std::vector<double>& angles,
                                                 std::size_t anchor) {
  checkInput(graph, anchor);
  const std::size_t n = graph.size();
  if (angles.size() != n) throw std::invalid_argument("one angle per node is required");
  if (n == 1) return {graph.nodes[0].translation()};

  PairwiseLeastSquares problem(n, anchor, graph.nodes[anchor].translation());
  for (const Edge& edge : graph.edges) {
    const Eigen::Matrix2d r_i = rotation(angles[edge.from]);
    const Eigen::Matrix2d w =
        r_i * edge.information.bottomRightCorner<2, 2>() * r_i.transpose();
    problem.add(edge.from, edge.to, Eigen::Matrix2d::Identity(),
                r_i * edge.measurement.translation(), w);
  }
  return problem.solve(n);
}

ChordalSolution chordalSolve(const PoseGraph& graph, std::size_t anchor) {
  ChordalSolution solution;
  solution.angles = chordalRotations(graph, anchor);
  solution.translations = chordalTranslations(graph, solution.angles, anchor);
  return solution;
}

PoseGraph chordalInitialize(const PoseGraph& graph, std::size_t anchor) {
  PoseGraph out = graph;
  out.nodes = chordalSolve(graph, anchor).poses();
  return out;
}

PoseGraph odometryInitialize(const PoseGraph& graph, std::size_t anchor) {
  const std::size_t n = graph.size();
  if (anchor >= n) throw std::invalid_argument("anchor is not a node of the graph");

  // Measurement taking node a to node b, if an edge joins them.
  struct Link {
    std::size_t other;
    PlanarDualQuaterniond motion;
  };
  std::vector<std::vector<Link>> links(n);
  std::vector<std::optional<PlanarDualQuaterniond>> forward(n);   // k -> k+1
  std::vector<std::optional<PlanarDualQuaterniond>> backward(n);  // k -> k-1
  for (const Edge& e : graph.edges) {
    links[e.from].push_back({e.to, e.measurement});
    links[e.to].push_back({e.from, e.measurement.inverse()});
    if (e.to == e.from + 1 && !forward[e.from]) forward[e.from] = e.measurement;
    if (e.from == e.to + 1 && !forward[e.to]) forward[e.to] = e.measurement.inverse();
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (forward[k - 1]) backward[k] = forward[k - 1]->inverse();
  }

  PoseGraph out = graph;
  std::vector<bool> placed(n, false);
  placed[anchor] = true;
  for (std::size_t k = anchor; k + 1 < n && forward[k]; ++k) {
    out.nodes[k + 1] = out.nodes[k] * *forward[k];
    placed[k + 1] = true;
  }
  for (std::size_t k = anchor; k > 0 && backward[k]; --k) {
    out.nodes[k - 1] = out.nodes[k] * *backward[k];
    placed[k - 1] = true;
  }

  std::deque<std::size_t> queue;
  for (std::size_t k = 0; k < n; ++k) {
    if (placed[k]) queue.push_back(k);
  }
  while (!queue.empty()) {
    const std::size_t a = queue.front();
    queue.pop_front();
    for (const Link& link : links[a]) {
      if (placed[link.other]) continue;
      out.nodes[link.other] = out.nodes[a] * link.motion;
      placed[link.other] = true;
      queue.push_back(link.other);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!placed[k]) throw std::runtime_error("odometry initialization: graph is not connected");
  }
  return out;
}

}  // namespace dqpgo
