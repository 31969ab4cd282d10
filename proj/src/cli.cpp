#include "dqpgo/cli.hpp"

#include "dqpgo/graph_io.hpp"
#include "dqpgo/initialization.hpp"
#include "dqpgo/metrics.hpp"
#include "dqpgo/optimizer.hpp"
#include "dqpgo/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

namespace dqpgo::cli {

namespace {

struct Options {
  std::string input;
  std::string format = "auto";
  std::string output;
  std::string report;
  std::string estimate;
  std::string truth;
  std::string metrics;
  std::string init = "as-given";
  std::string info = "file";
  std::string type;
  std::optional<int> fixed_iters;
  int max_iters = 100;
  double grad_tol = 1e-6;
  std::size_t anchor = 0;
  double damping = 0.0;
  std::vector<double> sigma;
  std::uint64_t seed = 0;
  bool sequential_only = false;
  bool consistent = false;
  bool no_timing = false;
};

struct App {
  std::unique_ptr<CLI::App> root;
  CLI::App* optimize = nullptr;
  CLI::App* perturb = nullptr;
  CLI::App* eval = nullptr;
  CLI::App* export_traj = nullptr;
};

// Input errors that map to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void addInput(CLI::App* cmd, Options& o) {
  cmd->add_option("-i,--input", o.input, "Input pose graph (g2o or TORO)")->required();
  cmd->add_option("--format", o.format, "Input format")
      ->check(CLI::IsMember({"auto", "g2o", "toro"}))
      ->capture_default_str();
}

void addNoise(CLI::App* cmd, Options& o) {
  cmd->add_option("--sigma", o.sigma,
                  "Noise covariance over [dtheta, dx, dy]: 6 upper-triangle or 9 row-major "
                  "values")
      ->expected(6, 9);
  cmd->add_option("--seed", o.seed, "Noise seed")->capture_default_str();
  cmd->add_flag("--sequential-only", o.sequential_only,
                "Perturb only sequential edges <k, k+1>");
}

App makeApp(Options& o) {
  App app;
  app.root = std::make_unique<CLI::App>("Planar pose-graph optimization on unit dual quaternions",
                                        "dqpgo");
  app.root->require_subcommand(1);
  app.root->set_help_all_flag("--help-all", "Help for every subcommand");

  auto* opt = app.root->add_subcommand("optimize", "Initialize and optimize a pose graph");
  addInput(opt, o);
  opt->add_option("-o,--output", o.output, "Write the optimized graph (g2o)");
  opt->add_option("--report", o.report, "Write per-iteration CSV (iter,cost,grad_norm,step_norm,millis)");
  opt->add_option("--init", o.init, "Initial poses")
      ->check(CLI::IsMember({"odometry", "chordal", "as-given"}))
      ->capture_default_str();
  opt->add_option("--info", o.info, "Edge weights: identity or as read from the file")
      ->check(CLI::IsMember({"identity", "file"}))
      ->capture_default_str();
  opt->add_option("--fixed-iters", o.fixed_iters,
                  "Run exactly N iterations, ignoring the gradient tolerance")
      ->check(CLI::NonNegativeNumber);
  opt->add_option("--max-iters", o.max_iters, "Iteration limit")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  opt->add_option("--grad-tol", o.grad_tol, "Stop when the gradient norm falls below this")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  opt->add_option("--anchor", o.anchor, "Index of the fixed node")->capture_default_str();
  opt->add_option("--damping", o.damping, "Diagonal added to the reduced Hessian")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  addNoise(opt, o);
  opt->add_flag("--no-timing", o.no_timing, "Write 0 for millis so reports are reproducible");
  app.optimize = opt;

  auto* per = app.root->add_subcommand("perturb", "Add seeded Gaussian noise to every measurement");
  addInput(per, o);
  per->add_option("-o,--output", o.output, "Write the perturbed graph (g2o)")->required();
  addNoise(per, o);
  per->get_option("--sigma")->required();
  per->add_flag("--consistent", o.consistent,
                "Replace measurements by the relative poses of the input nodes first");
  app.perturb = per;

  auto* ev = app.root->add_subcommand("eval", "Relative pose error and costs against a truth graph");
  ev->add_option("-e,--estimate", o.estimate, "Estimated graph")->required();
  ev->add_option("-t,--truth", o.truth, "Ground-truth graph")->required();
  ev->add_option("--format", o.format, "Input format")
      ->check(CLI::IsMember({"auto", "g2o", "toro"}))
      ->capture_default_str();
  ev->add_option("--metrics", o.metrics, "Write metric,value CSV");
  ev->add_flag("--sequential-only", o.sequential_only, "Use only sequential edges <k, k+1>");
  app.eval = ev;

  auto* ex = app.root->add_subcommand("export-traj", "Write node positions as CSV or SVG");
  addInput(ex, o);
  ex->add_option("-o,--output", o.output, "Output file")->required();
  ex->add_option("--type", o.type, "csv or svg (default: from the output extension)")
      ->check(CLI::IsMember({"csv", "svg"}));
  app.export_traj = ex;

  return app;
}

std::string num(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

PoseGraph load(const std::string& path, const std::string& format) {
  if (!std::filesystem::is_regular_file(path)) throw InputError("no such file: " + path);
  try {
    return readGraphFile(path, parseGraphFormat(format));
  } catch (const std::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::ofstream openOut(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

PoseGraph applyNoise(const PoseGraph& graph, const Options& o, std::ostream& out) {
  NoiseSpec spec;
  try {
    spec.sigma = covarianceFromValues(o.sigma);
    spec.seed = o.seed;
    spec.sequential_only = o.sequential_only;
    PerturbResult r = perturb(graph, spec);
    for (const std::string& d : r.diagnostics) out << "warning: " << d << '\n';
    return std::move(r.graph);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("sigma: ") + e.what());
  }
}

void printSigma(std::ostream& out, const Eigen::Matrix3d& s) {
  out << "sigma =\n";
  for (int r = 0; r < 3; ++r) {
    out << "  " << num(s(r, 0)) << ' ' << num(s(r, 1)) << ' ' << num(s(r, 2)) << '\n';
  }
}

int cmdOptimize(const Options& o, std::ostream& out, std::ostream& err) {
  PoseGraph graph = load(o.input, o.format);
  if (o.info == "identity") graph = withIdentityInformation(std::move(graph));
  if (!o.sigma.empty()) graph = applyNoise(graph, o, out);
  if (o.anchor >= graph.size()) throw InputError("anchor index out of range");

  if (o.init == "odometry") {
    graph = odometryInitialize(graph, o.anchor);
  } else if (o.init == "chordal") {
    graph = chordalInitialize(graph, o.anchor);
  }

  SolverConfig config;
  config.max_iterations = o.max_iters;
  config.gradient_tolerance = o.grad_tol;
  config.fixed_iterations = o.fixed_iters;
  if (o.fixed_iters) config.max_iterations = std::max(o.max_iters, *o.fixed_iters);
  config.anchor_node = o.anchor;
  config.damping = o.damping;
  config.record_timing = !o.no_timing;
  try {
    checkConfig(config, graph);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }

  const OptimizeResult result = optimize(graph, config);
  const SolverReport& report = result.report;

  if (!o.report.empty()) {
    std::ofstream csv = openOut(o.report);
    csv << "iter,cost,grad_norm,step_norm,millis\n";
    csv << 0 << ',' << num(report.initial_cost) << ",,,\n";
    for (const IterationRecord& r : report.iterations) {
      csv << r.iteration << ',' << num(r.cost) << ',' << num(r.gradient_norm) << ','
          << num(r.step_norm) << ',' << num(r.millis) << '\n';
    }
  }

  const bool failed = report.termination == TerminationReason::LinearSolveFailure;
  if (failed) {
    err << "error: linear solve failed after " << report.iterations.size() << " iterations\n";
  } else if (!o.output.empty()) {
    std::ofstream g = openOut(o.output);
    writeGraph(g, result.graph, GraphFormat::G2o);
  }

  out << "final_cost=" << num(totalCost(result.graph)) << " g2o_cost=" << num(g2oCost(result.graph))
      << '\n';
  out << "iterations=" << report.iterations.size()
      << " termination=" << toString(report.termination) << '\n';
  return failed ? kSolverFailure : kOk;
}

int cmdPerturb(const Options& o, std::ostream& out) {
  PoseGraph graph = load(o.input, o.format);
  if (o.consistent) graph = withConsistentMeasurements(std::move(graph));
  const PoseGraph noisy = applyNoise(graph, o, out);
  std::ofstream g = openOut(o.output);
  writeGraph(g, noisy, GraphFormat::G2o);
  printSigma(out, covarianceFromValues(o.sigma));
  out << "seed = " << o.seed << '\n';
  return kOk;
}

int cmdEval(const Options& o, std::ostream& out) {
  const PoseGraph estimate = load(o.estimate, o.format);
  const PoseGraph truth = load(o.truth, o.format);
  if (estimate.size() != truth.size()) {
    throw InputError("estimate has " + std::to_string(estimate.size()) + " nodes, truth has " +
                     std::to_string(truth.size()));
  }
  const RpeResult r = rpe(estimate, truth, o.sequential_only);
  const std::vector<std::pair<std::string, double>> rows = {
      {"e_t", r.translational},
      {"e_r_deg", r.rotational},
      {"cost", totalCost(estimate)},
      {"g2o_cost", g2oCost(estimate)},
  };

  out << std::left << std::setw(10) << "metric" << "value\n";
  for (const auto& [name, value] : rows) out << std::setw(10) << name << num(value) << '\n';
  out << std::right;

  if (!o.metrics.empty()) {
    std::ofstream csv = openOut(o.metrics);
    csv << "metric,value\n";
    for (const auto& [name, value] : rows) csv << name << ',' << num(value) << '\n';
  }
  return kOk;
}

void writeSvg(std::ostream& out, const PoseGraph& graph) {
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(0.0);
  Eigen::Vector2d hi = Eigen::Vector2d::Constant(0.0);
  std::vector<Eigen::Vector2d> p;
  p.reserve(graph.size());
  for (std::size_t k = 0; k < graph.size(); ++k) {
    const Eigen::Vector2d t = graph.nodes[k].translation();
    p.emplace_back(t.x(), -t.y());  // SVG y points down
    if (k == 0) lo = hi = p.back();
    lo = lo.cwiseMin(p.back());
    hi = hi.cwiseMax(p.back());
  }
  const double extent = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-9});
  const double margin = 0.03 * extent;
  const double stroke = extent / 600.0;

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\""
      << num(lo.x() - margin) << ' ' << num(lo.y() - margin) << ' '
      << num(hi.x() - lo.x() + 2 * margin) << ' ' << num(hi.y() - lo.y() + 2 * margin)
      << "\" width=\"800\" height=\"800\">\n";

  std::string closures;
  for (const Edge& e : graph.edges) {
    if (e.to == e.from + 1 || e.from == e.to + 1) continue;
    closures += "M" + num(p[e.from].x()) + ' ' + num(p[e.from].y()) + " L" +
                num(p[e.to].x()) + ' ' + num(p[e.to].y()) + ' ';
  }
  if (!closures.empty()) {
    closures.pop_back();
    out << "  <path fill=\"none\" stroke=\"#d0603a\" stroke-opacity=\"0.5\" stroke-width=\""
        << num(stroke / 2) << "\" d=\"" << closures << "\"/>\n";
  }
  out << "  <polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"" << num(stroke)
      << "\" points=\"";
  for (std::size_t k = 0; k < p.size(); ++k) {
    out << (k ? " " : "") << num(p[k].x()) << ',' << num(p[k].y());
  }
  out << "\"/>\n</svg>\n";
}

int cmdExport(const Options& o) {
  const PoseGraph graph = load(o.input, o.format);
  std::string type = o.type;
  if (type.empty()) {
    type = std::filesystem::path(o.output).extension() == ".svg" ? "svg" : "csv";
  }
  std::ofstream file = openOut(o.output);
  if (type == "svg") {
    writeSvg(file, graph);
  } else {
    file << "id,x,y,theta\n";
    for (std::size_t k = 0; k < graph.size(); ++k) {
      const Pose2d pose = graph.nodes[k].pose();
      file << graph.idOf(k) << ',' << num(pose.t.x()) << ',' << num(pose.t.y()) << ','
           << num(pose.theta) << '\n';
    }
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  App app = makeApp(o);
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.root->parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.root->exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.root->exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.root->exit(e, out, err);
    return kInputError;
  }

  try {
    if (app.optimize->parsed()) return cmdOptimize(o, out, err);
    if (app.perturb->parsed()) return cmdPerturb(o, out);
    if (app.eval->parsed()) return cmdEval(o, out);
    if (app.export_traj->parsed()) return cmdExport(o);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kSolverFailure;
  }
  return kInputError;
}

std::string helpText(const std::string& subcommand) {
  Options o;
  App app = makeApp(o);
  if (subcommand.empty()) return app.root->help();
  return app.root->get_subcommand(subcommand)->help();
}

}  // namespace dqpgo::cli
