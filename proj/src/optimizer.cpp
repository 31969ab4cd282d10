#include "dqpgo/optimizer.hpp"

#include <Eigen/SparseCholesky>

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace dqpgo {

void checkConfig(const SolverConfig& config, const PoseGraph& graph) {
  if (config.max_iterations < 1) {
    throw std::invalid_argument("max_iterations must be at least 1");
  }
  if (!(config.gradient_tolerance > 0.0)) {
    throw std::invalid_argument("gradient_tolerance must be positive");
  }
  if (config.fixed_iterations && *config.fixed_iterations < 0) {
    throw std::invalid_argument("fixed_iterations must be non-negative");
  }
  if (config.fixed_iterations && *config.fixed_iterations > config.max_iterations) {
    throw std::invalid_argument("fixed_iterations exceeds max_iterations");
  }
  if (config.anchor_node >= graph.size()) {
    throw std::invalid_argument("anchor_node is not a node of the graph");
  }
  if (!(config.damping >= 0.0)) {
    throw std::invalid_argument("damping must be non-negative");
  }
  if (config.linear_solve_retries < 0) {
    throw std::invalid_argument("linear_solve_retries must be non-negative");
  }
}

std::string toString(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::GradientConverged:
      return "gradient-converged";
    case TerminationReason::IterationLimit:
      return "iteration-limit";
    case TerminationReason::LinearSolveFailure:
      return "linear-solve-failure";
  }
  return "unknown";
}

TangentVectord edgeError(const PlanarDualQuaterniond& x_i, const PlanarDualQuaterniond& x_j,
                         const PlanarDualQuaterniond& z) {
  return logIdentity(z.inverse() * (x_i.inverse() * x_j));
}

double edgeCost(const PlanarDualQuaterniond& x_i, const PlanarDualQuaterniond& x_j,
                const Edge& edge) {
  const TangentVectord e = edgeError(x_i, x_j, edge.measurement);
  return 0.5 * e.dot(edge.information * e);
}

double totalCost(const PoseGraph& graph) {
  double sum = 0.0;
  for (const Edge& edge : graph.edges) {
    sum += 2.0 * edgeCost(graph.nodes[edge.from], graph.nodes[edge.to], edge);
  }
  return sum;
}

namespace {

// d Log_1(u) / d u for a canonical u, with Log_1(u) = [u1, u2, u3] / sinc(h)
// and h = atan2(u1, u0).
Eigen::Matrix<double, 3, 4> logIdentityJacobian(const Eigen::Vector4d& u) {
  const double rho2 = u[0] * u[0] + u[1] * u[1];
  const double h = std::atan2(u[1], u[0]);
  const double gamma = sinc(h);
  const double dgamma = sincDerivative(h);
  const Eigen::Vector4d dh(-u[1] / rho2, u[0] / rho2, 0.0, 0.0);

  Eigen::Matrix<double, 3, 4> jac = Eigen::Matrix<double, 3, 4>::Zero();
  jac.rightCols<3>().diagonal().setConstant(1.0 / gamma);
  jac -= (dgamma / (gamma * gamma)) * u.tail<3>() * dh.transpose();
  return jac;
}

struct EdgeLinearization {
  TangentVectord error;
  EdgeJacobians jacobians;
};

EdgeLinearization linearizeEdge(const PlanarDualQuaterniond& x_i,
                                const PlanarDualQuaterniond& x_j,
                                const PlanarDualQuaterniond& z) {
  const PlanarDualQuaterniond z_inv = z.inverse();
  const PlanarDualQuaterniond x_i_inv = x_i.inverse();
  // Raw products, no renormalization, so the Jacobians differentiate exactly
  // the function that is evaluated.
  const Eigen::Matrix4d left_w = z_inv.leftMatrix() * x_i_inv.leftMatrix();
  Eigen::Vector4d u = left_w * x_j.coeffs();
  const double sign = PlanarDualQuaterniond(u).isCanonical() ? 1.0 : -1.0;
  u *= sign;

  const Eigen::Matrix<double, 3, 4> d_log = sign * logIdentityJacobian(u);
  const Eigen::Vector4d conj_diag(1.0, -1.0, -1.0, -1.0);

  EdgeLinearization out;
  out.error = u.tail<3>() / sinc(std::atan2(u[1], u[0]));
  out.jacobians.wrt_to = d_log * left_w;
  out.jacobians.wrt_from =
      d_log * z_inv.leftMatrix() * x_j.rightMatrix() * conj_diag.asDiagonal();
  return out;
}

// Reduced Gauss-Newton system in tangent-basis coordinates. Node k maps to
// columns 3 * slot(k) .. 3 * slot(k) + 2; the anchor has no slot.
class ReducedSystem {
 public:
  ReducedSystem(const PoseGraph& graph, std::size_t anchor) : anchor_(anchor) {
    const std::size_t n = graph.size();
    slot_.assign(n, -1);
    Eigen::Index next = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != anchor_) slot_[k] = next++;
    }
    dimension_ = 3 * next;
  }

  Eigen::Index dimension() const { return dimension_; }
  Eigen::Index slot(std::size_t node) const { return slot_[node]; }

  // Fills `hessian` (reduced, anchor removed) and returns the full reduced
  // gradient over all nodes (3n), which includes the anchor block.
  Eigen::VectorXd assemble(const PoseGraph& graph, double damping,
                           Eigen::SparseMatrix<double>& hessian) const {
    const std::size_t n = graph.size();
    Eigen::VectorXd gradient = Eigen::VectorXd::Zero(3 * static_cast<Eigen::Index>(n));
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(graph.edges.size() * 36 + static_cast<std::size_t>(dimension_));

    auto add_block = [&](Eigen::Index row, Eigen::Index col, const Eigen::Matrix3d& block) {
      for (int c = 0; c < 3; ++c) {
        for (int r = 0; r < 3; ++r) {
          triplets.emplace_back(3 * row + r, 3 * col + c, block(r, c));
        }
      }
    };

    for (const Edge& edge : graph.edges) {
      const PlanarDualQuaterniond& x_i = graph.nodes[edge.from];
      const PlanarDualQuaterniond& x_j = graph.nodes[edge.to];
      const EdgeLinearization lin = linearizeEdge(x_i, x_j, edge.measurement);
      const Eigen::Matrix3d j_i = lin.jacobians.wrt_from * tangentBasis(x_i);
      const Eigen::Matrix3d j_j = lin.jacobians.wrt_to * tangentBasis(x_j);
      const Eigen::Vector3d weighted = edge.information * lin.error;

      gradient.segment<3>(3 * static_cast<Eigen::Index>(edge.from)) += j_i.transpose() * weighted;
      gradient.segment<3>(3 * static_cast<Eigen::Index>(edge.to)) += j_j.transpose() * weighted;

      const Eigen::Index s_i = slot_[edge.from];
      const Eigen::Index s_j = slot_[edge.to];
      if (s_i >= 0) add_block(s_i, s_i, j_i.transpose() * edge.information * j_i);
      if (s_j >= 0) add_block(s_j, s_j, j_j.transpose() * edge.information * j_j);
      if (s_i >= 0 && s_j >= 0) {
        const Eigen::Matrix3d off = j_i.transpose() * edge.information * j_j;
        add_block(s_i, s_j, off);
        add_block(s_j, s_i, off.transpose());
      }
    }
    for (Eigen::Index k = 0; k < dimension_; ++k) triplets.emplace_back(k, k, damping);

    hessian.resize(dimension_, dimension_);
    hessian.setFromTriplets(triplets.begin(), triplets.end());
    return gradient;
  }

 private:
  std::size_t anchor_;
  std::vector<Eigen::Index> slot_;
  Eigen::Index dimension_ = 0;
};

using Cholesky = Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                                      Eigen::AMDOrdering<int>>;

// Owns the factorization so that the symbolic analysis is shared across
// iterations of one solve.
class GaussNewton {
 public:
  GaussNewton(const PoseGraph& graph, const SolverConfig& config)
      : config_(config), system_(graph, config.anchor_node) {}

  // Assembles the system at `graph`; returns the Riemannian gradient norm.
  double linearize(const PoseGraph& graph) {
    gradient_ = system_.assemble(graph, config_.damping, hessian_);
    return gradient_.norm();
  }

  // Solves the system from the last linearize() call and retracts.
  StepResult solveAndRetract(const PoseGraph& graph) {
    StepResult result;
    result.gradient_norm = gradient_.norm();
    result.graph = graph;

    Eigen::VectorXd rhs(system_.dimension());
    for (std::size_t k = 0; k < graph.size(); ++k) {
      const Eigen::Index s = system_.slot(k);
      if (s >= 0) rhs.segment<3>(3 * s) = -gradient_.segment<3>(3 * static_cast<Eigen::Index>(k));
    }

    Eigen::VectorXd delta;
    if (!solve(rhs, delta)) {
      result.solved = false;
      return result;
    }
    result.step_norm = delta.norm();

    for (std::size_t k = 0; k < graph.size(); ++k) {
      const Eigen::Index s = system_.slot(k);
      if (s < 0) continue;
      const PlanarDualQuaterniond& x = graph.nodes[k];
      const AmbientTangentVectord alpha = tangentBasis(x) * delta.segment<3>(3 * s);
      result.graph.nodes[k] = expAt(x, alpha);
    }
    return result;
  }

  StepResult step(const PoseGraph& graph) {
    linearize(graph);
    return solveAndRetract(graph);
  }

 private:
  bool solve(const Eigen::VectorXd& rhs, Eigen::VectorXd& delta) {
    if (!analyzed_) {
      cholesky_.analyzePattern(hessian_);
      analyzed_ = true;
    }
    double extra = 0.0;
    const double scale = std::max(1.0, hessian_.diagonal().cwiseAbs().mean());
    for (int attempt = 0; attempt <= config_.linear_solve_retries; ++attempt) {
      if (attempt > 0) {
        const double base = config_.damping + extra;
        const double next = base > 0.0 ? 10.0 * base : 1e-8 * scale;
        extra = next - config_.damping;
        for (Eigen::Index k = 0; k < hessian_.rows(); ++k) {
          hessian_.coeffRef(k, k) += next - base;
        }
      }
      cholesky_.factorize(hessian_);
      if (cholesky_.info() != Eigen::Success) continue;
      delta = cholesky_.solve(rhs);
      if (cholesky_.info() == Eigen::Success && delta.allFinite()) return true;
    }
    return false;
  }

  SolverConfig config_;
  ReducedSystem system_;
  Eigen::SparseMatrix<double> hessian_;
  Eigen::VectorXd gradient_;
  Cholesky cholesky_;
  bool analyzed_ = false;
};

}  // namespace

EdgeJacobians edgeJacobians(const PlanarDualQuaterniond& x_i,
                            const PlanarDualQuaterniond& x_j,
                            const PlanarDualQuaterniond& z) {
  return linearizeEdge(x_i, x_j, z).jacobians;
}

Eigen::VectorXd riemannianGradient(const PoseGraph& graph) {
  Eigen::VectorXd gradient = Eigen::VectorXd::Zero(4 * static_cast<Eigen::Index>(graph.size()));
  for (const Edge& edge : graph.edges) {
    const PlanarDualQuaterniond& x_i = graph.nodes[edge.from];
    const PlanarDualQuaterniond& x_j = graph.nodes[edge.to];
    const EdgeLinearization lin = linearizeEdge(x_i, x_j, edge.measurement);
    const Eigen::Vector3d weighted = edge.information * lin.error;
    gradient.segment<4>(4 * static_cast<Eigen::Index>(edge.from)) +=
        tangentProjection(x_i) * lin.jacobians.wrt_from.transpose() * weighted;
    gradient.segment<4>(4 * static_cast<Eigen::Index>(edge.to)) +=
        tangentProjection(x_j) * lin.jacobians.wrt_to.transpose() * weighted;
  }
  return gradient;
}

Eigen::SparseMatrix<double> hessianBlocks(const PoseGraph& graph) {
  const auto dim = 4 * static_cast<Eigen::Index>(graph.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.edges.size() * 64);
  auto add_block = [&](std::size_t row, std::size_t col, const Eigen::Matrix4d& block) {
    for (int c = 0; c < 4; ++c) {
      for (int r = 0; r < 4; ++r) {
        triplets.emplace_back(4 * static_cast<Eigen::Index>(row) + r,
                              4 * static_cast<Eigen::Index>(col) + c, block(r, c));
      }
    }
  };
  for (const Edge& edge : graph.edges) {
    const PlanarDualQuaterniond& x_i = graph.nodes[edge.from];
    const PlanarDualQuaterniond& x_j = graph.nodes[edge.to];
    const EdgeJacobians jac = linearizeEdge(x_i, x_j, edge.measurement).jacobians;
    const Eigen::Matrix<double, 3, 4> a = jac.wrt_from * tangentProjection(x_i).transpose();
    const Eigen::Matrix<double, 3, 4> b = jac.wrt_to * tangentProjection(x_j).transpose();
    const Eigen::Matrix3d& omega = edge.information;
    add_block(edge.from, edge.from, a.transpose() * omega * a);
    add_block(edge.from, edge.to, a.transpose() * omega * b);
    add_block(edge.to, edge.from, b.transpose() * omega * a);
    add_block(edge.to, edge.to, b.transpose() * omega * b);
  }
  Eigen::SparseMatrix<double> hessian(dim, dim);
  hessian.setFromTriplets(triplets.begin(), triplets.end());
  return hessian;
}

StepResult gnStep(const PoseGraph& graph, const SolverConfig& config) {
  checkConfig(config, graph);
  GaussNewton solver(graph, config);
  return solver.step(graph);
}

OptimizeResult optimize(const PoseGraph& graph, const SolverConfig& config) {
  checkConfig(config, graph);
  using Clock = std::chrono::steady_clock;

  OptimizeResult result{graph, {}};
  result.report.initial_cost = totalCost(graph);
  GaussNewton solver(graph, config);

  const bool fixed = config.fixed_iterations.has_value();
  const int iterations = fixed ? *config.fixed_iterations : config.max_iterations;
  result.report.termination = TerminationReason::IterationLimit;

  for (int k = 0; k < iterations; ++k) {
    const auto start = Clock::now();
    const double gradient_norm = solver.linearize(result.graph);
    if (!fixed && gradient_norm < config.gradient_tolerance) {
      result.report.termination = TerminationReason::GradientConverged;
      break;
    }
    StepResult step = solver.solveAndRetract(result.graph);
    if (!step.solved) {
      result.report.termination = TerminationReason::LinearSolveFailure;
      break;
    }
    result.graph = std::move(step.graph);

    IterationRecord record;
    record.iteration = k + 1;
    record.cost = totalCost(result.graph);
    record.gradient_norm = step.gradient_norm;
    record.step_norm = step.step_norm;
    if (config.record_timing) {
      record.millis =
          std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    }
    result.report.iterations.push_back(record);
  }
  return result;
}

TangentVectord adaptErrorSmallAngle(const Eigen::Vector3d& delta) {
  const double alpha = delta[0] / 2.0;
  const double beta = std::cos(alpha) / sinc(alpha);
  Eigen::Matrix3d m;
  m << 1.0, 0.0, 0.0,
       0.0, beta, alpha,
       0.0, -alpha, beta;
  return 0.5 * m * delta;
}

}  // namespace dqpgo
