#include "dqpgo/pose_graph.hpp"

#include <Eigen/Eigenvalues>

#include <numeric>

namespace dqpgo {

InformationMatrix informationFromUpperTriangle(double i11, double i12, double i13,
                                               double i22, double i23, double i33) {
  InformationMatrix omega;
  omega << i11, i12, i13,
           i12, i22, i23,
           i13, i23, i33;
  return omega;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

bool isConnected(const PoseGraph& graph) {
  const std::size_t n = graph.size();
  if (n == 0) return false;
  DisjointSets sets(n);
  for (const Edge& e : graph.edges) {
    if (e.from < n && e.to < n) sets.unite(e.from, e.to);
  }
  const std::size_t root = sets.find(0);
  for (std::size_t i = 1; i < n; ++i) {
    if (sets.find(i) != root) return false;
  }
  return true;
}

std::vector<Diagnostic> validate(const PoseGraph& graph) {
  std::vector<Diagnostic> out;
  const std::size_t n = graph.size();
  if (n == 0) {
    out.push_back({DiagnosticKind::EmptyGraph, 0, "graph has no nodes"});
    return out;
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(graph.nodes[k].real().norm() - 1.0) > 1e-12) {
      out.push_back({DiagnosticKind::NonUnitNode, k,
                     "node " + std::to_string(k) + " has a non-unit real part"});
    }
  }
  for (std::size_t k = 0; k < graph.edges.size(); ++k) {
    const Edge& e = graph.edges[k];
    const std::string name = "edge " + std::to_string(k);
    if (e.from >= n || e.to >= n) {
      out.push_back({DiagnosticKind::IndexOutOfRange, k, name + " references a missing node"});
    }
    if (e.from == e.to) {
      out.push_back({DiagnosticKind::SelfLoop, k, name + " is a self-loop"});
    }
    if ((e.information - e.information.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
      out.push_back({DiagnosticKind::AsymmetricInformation, k,
                     name + " has an asymmetric information matrix"});
    }
    const Eigen::SelfAdjointEigenSolver<InformationMatrix> eig(
        e.information, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0.0)) {
      out.push_back({DiagnosticKind::NonPositiveDefiniteInformation, k,
                     name + " has an information matrix that is not positive definite"});
    }
  }
  if (!isConnected(graph)) {
    out.push_back({DiagnosticKind::Disconnected, 0, "graph is not connected"});
  }
  return out;
}

PoseGraph withIdentityInformation(PoseGraph graph) {
  for (Edge& e : graph.edges) e.information.setIdentity();
  return graph;
}

}  // namespace dqpgo
