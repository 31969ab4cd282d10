#pragma once

#include "dqpgo/planar_dual_quaternion.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <vector>

namespace dqpgo {

/// 3x3 edge weight over the error ordering [dtheta, dt_x, dt_y].
using InformationMatrix = Eigen::Matrix3d;

/// Builds a symmetric information matrix from its upper triangle
/// (I11, I12, I13, I22, I23, I33), already in [dtheta, dt_x, dt_y] order.
InformationMatrix informationFromUpperTriangle(double i11, double i12, double i13,
                                               double i22, double i23, double i33);

struct Edge {
  std::size_t from = 0;  // i
  std::size_t to = 0;    // j
  PlanarDualQuaterniond measurement;  // z_ij, pose of j in the frame of i
  InformationMatrix information = InformationMatrix::Identity();
};

/// Nodes are dense 0-based indices. `ids` keeps the identifiers read from
/// the source file so output can reproduce them; empty means ids == indices.
struct PoseGraph {
  std::vector<PlanarDualQuaterniond> nodes;
  std::vector<Edge> edges;
  std::vector<long> ids;

  std::size_t size() const { return nodes.size(); }
  long idOf(std::size_t index) const {
    return ids.empty() ? static_cast<long>(index) : ids[index];
  }
};

enum class DiagnosticKind {
  SelfLoop,
  IndexOutOfRange,
  AsymmetricInformation,
  NonPositiveDefiniteInformation,
  NonUnitNode,
  Disconnected,
  EmptyGraph,
};

struct Diagnostic {
  DiagnosticKind kind;
  std::size_t edge = 0;  // edge or node index the diagnostic refers to
  std::string message;
};

/// One diagnostic per violated invariant; empty iff the graph is valid.
std::vector<Diagnostic> validate(const PoseGraph& graph);

/// True when the undirected edge graph spans every node.
bool isConnected(const PoseGraph& graph);

/// Replaces every information matrix by the identity.
PoseGraph withIdentityInformation(PoseGraph graph);

}  // namespace dqpgo
