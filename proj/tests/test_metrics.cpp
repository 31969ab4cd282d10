#include "dqpgo/metrics.hpp"

#include "dqpgo/graph_io.hpp"
#include "dqpgo/optimizer.hpp"

#include "support.hpp"

#include <doctest.h>

#include <Eigen/Geometry>

using namespace dqpgo;
using test::kPi;

TEST_CASE("g2o cost") {
  test::Random rng(71);
  const PoseGraph exact = rng.graph(10, 5, 0.0);
  CHECK(g2oCost(exact) < 1e-20);
  CHECK(totalCost(exact) < 1e-20);

  const PoseGraph noisy = rng.graph(10, 5, 0.3);
  CHECK(g2oCost(noisy) > 1e-6);
  CHECK(totalCost(noisy) > 1e-6);

  for (double delta : {0.1, -0.7, 2.5}) {
    PoseGraph g;
    g.nodes = {PlanarDualQuaterniond::Identity(), fromPose(delta, Eigen::Vector2d(0, 0))};
    g.edges.push_back({0, 1, PlanarDualQuaterniond::Identity(), InformationMatrix::Identity()});
    CHECK(g2oCost(g) == doctest::Approx(delta * delta).epsilon(1e-12));
  }
}

TEST_CASE("g2o cost translation residual uses the measurement frame") {
  PoseGraph g;
  g.nodes = {fromPose(0.5, Eigen::Vector2d(1, 2)), fromPose(1.0, Eigen::Vector2d(3, 1))};
  const PlanarDualQuaterniond z = fromPose(0.4, Eigen::Vector2d(2, -1));
  g.edges.push_back({0, 1, z, InformationMatrix::Identity()});
  const Pose2d rel = (g.nodes[0].inverse() * g.nodes[1]).pose();
  const Eigen::Matrix2d r_z = Eigen::Rotation2Dd(0.4).toRotationMatrix();
  const Eigen::Vector2d dt = r_z.transpose() * (Eigen::Vector2d(2, -1) - rel.t);
  const double dtheta = rel.theta - 0.4;
  CHECK(g2oCost(g) == doctest::Approx(dtheta * dtheta + dt.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("CSAIL with identity information, 10 iterations") {
  const PoseGraph g = withIdentityInformation(readGraphFile(test::dataPath("CSAIL.graph")));
  SolverConfig cfg;
  cfg.fixed_iterations = 10;
  CHECK(g2oCost(optimize(g, cfg).graph) == doctest::Approx(1.07e-1).epsilon(0.05));
}

TEST_CASE("rpe examples") {
  test::Random rng(72);
  const PoseGraph truth = rng.graph(12, 6, 0.2);
  const RpeResult same = rpe(truth, truth);
  CHECK(same.translational < 1e-12);
  CHECK(same.rotational < 1e-12);

  PoseGraph moved = truth;
  const PlanarDualQuaterniond t = rng.pose(30.0);
  for (auto& x : moved.nodes) x = t * x;
  CHECK(rpe(moved, truth).translational < 1e-10);
  CHECK(rpe(moved, truth).rotational < 1e-10);

  PoseGraph one;
  const PlanarDualQuaterniond x = rng.pose();
  one.nodes = {PlanarDualQuaterniond::Identity(), x};
  one.edges.push_back({0, 1, x, InformationMatrix::Identity()});
  PoseGraph est = one;
  est.nodes[1] = x * fromPose(kPi / 18, Eigen::Vector2d(0.3, 0.4)).inverse();
  const RpeResult r = rpe(est, one);
  CHECK(r.translational == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.rotational == doctest::Approx(10.0).epsilon(1e-12));

  PoseGraph small = truth;
  small.nodes.pop_back();
  CHECK_THROWS_AS(rpe(small, truth), std::invalid_argument);
}

TEST_CASE("rpe invariances") {
  test::Random rng(73);
  for (int k = 0; k < 50; ++k) {
    const PoseGraph truth = rng.graph(15, 8, 0.0);
    PoseGraph est = truth;
    for (std::size_t i = 1; i < est.size(); ++i) est.nodes[i] = est.nodes[i] * rng.perturbation(0.4);
    const RpeResult base = rpe(est, truth);

    PoseGraph est_moved = est, truth_moved = truth;
    const PlanarDualQuaterniond a = rng.pose(40.0), b = rng.pose(40.0);
    for (auto& x : est_moved.nodes) x = a * x;
    for (auto& x : truth_moved.nodes) x = b * x;
    const RpeResult r1 = rpe(est_moved, truth);
    const RpeResult r2 = rpe(est, truth_moved);
    CHECK(std::abs(r1.translational - base.translational) < 1e-10);
    CHECK(std::abs(r1.rotational - base.rotational) < 1e-10);
    CHECK(std::abs(r2.translational - base.translational) < 1e-10);
    CHECK(std::abs(r2.rotational - base.rotational) < 1e-10);

    PoseGraph swapped_est = truth;
    swapped_est.edges = est.edges;
    PoseGraph swapped_truth = est;
    swapped_truth.edges = est.edges;
    CHECK(std::abs(rpe(swapped_est, swapped_truth).rotational - base.rotational) < 1e-10);
  }
}

TEST_CASE("sequential-only rpe") {
  PoseGraph truth;
  truth.nodes.assign(3, PlanarDualQuaterniond::Identity());
  truth.edges = {{0, 1, {}, InformationMatrix::Identity()},
                 {1, 2, {}, InformationMatrix::Identity()},
                 {0, 2, {}, InformationMatrix::Identity()}};
  PoseGraph est = truth;
  est.nodes[2] = fromPose(0.0, Eigen::Vector2d(0.3, 0.4));
  CHECK(rpe(est, truth, true).translational == doctest::Approx(std::sqrt(0.25 / 2)));
  CHECK(rpe(est, truth).translational == doctest::Approx(std::sqrt(0.5 / 3)));
}
