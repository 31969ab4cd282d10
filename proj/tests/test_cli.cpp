#include "dqpgo/cli.hpp"

#include "dqpgo/graph_io.hpp"
#include "dqpgo/metrics.hpp"
#include "dqpgo/synth.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cstdlib>
#include <regex>
#include <sstream>

using namespace dqpgo;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "dqpgo");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

double summaryValue(const std::string& out, const std::string& key) {
  const std::regex re(key + "=([^ \\n]+)");
  std::smatch m;
  REQUIRE(std::regex_search(out, m, re));
  return std::stod(m[1]);
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> result;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) result.push_back(line);
  return result;
}

}  // namespace

TEST_CASE("help snapshots") {
  for (const std::string sub : {"", "optimize", "perturb", "eval", "export-traj"}) {
    const fs::path snapshot =
        fs::path(DQPGO_SNAPSHOT_DIR) / ("help_" + (sub.empty() ? std::string("main") : sub) + ".txt");
    const std::string text = cli::helpText(sub);
    if (std::getenv("DQPGO_UPDATE_SNAPSHOTS")) {
      std::ofstream(snapshot, std::ios::binary) << text;
    }
    INFO("snapshot ", snapshot.string());
    CHECK(text == test::readFile(snapshot));
  }

  const Run help = invoke({"optimize", "--help"});
  CHECK(help.code == 0);
  for (const char* flag : {"--fixed-iters", "--grad-tol", "--max-iters", "--anchor", "--init",
                           "--info", "--sigma", "--seed", "--report", "--output"}) {
    CHECK(help.out.find(flag) != std::string::npos);
  }
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"frobnicate"}).code == 2);
  CHECK(invoke({"optimize"}).code == 2);
  CHECK(invoke({"optimize", "-i", test::fixturePath("two_node.g2o"), "--init", "magic"}).code == 2);
}

TEST_CASE("optimize a noise-free ring") {
  const fs::path dir = test::scratchDir("cli_ring");
  const RingGraphs ring = makeRing(20, 10.0, 5, 1);
  PoseGraph start = ring.truth;
  test::Random rng(81);
  for (std::size_t k = 1; k < start.size(); ++k) start.nodes[k] = start.nodes[k] * rng.perturbation(0.2);
  writeGraphFile((dir / "ring.g2o").string(), start);

  const Run r = invoke({"optimize", "--input", (dir / "ring.g2o").string(), "--fixed-iters", "10",
                     "--output", (dir / "out.g2o").string(), "--report",
                     (dir / "report.csv").string()});
  CHECK(r.code == 0);
  CHECK(summaryValue(r.out, "final_cost") < 1e-12);
  const auto report = lines(test::readFile(dir / "report.csv"));
  REQUIRE(report.size() == 12);
  CHECK(report[0] == "iter,cost,grad_norm,step_norm,millis");
  CHECK(test::maxPoseDifference(readGraphFile((dir / "out.g2o").string()), ring.truth) < 1e-8);

  const Run odo = invoke({"optimize", "--input", (dir / "ring.g2o").string(), "--init", "odometry",
                       "--fixed-iters", "3"});
  CHECK(summaryValue(odo.out, "final_cost") < 1e-12);
  const Run chord = invoke({"optimize", "--input", (dir / "ring.g2o").string(), "--init", "chordal",
                         "--fixed-iters", "3", "--anchor", "4"});
  CHECK(summaryValue(chord.out, "final_cost") < 1e-12);
}

TEST_CASE("optimize M3500 with identity information") {
  const Run r = invoke({"optimize", "--input", test::dataPath("M3500.g2o"), "--info", "identity",
                     "--fixed-iters", "10"});
  CHECK(r.code == 0);
  CHECK(summaryValue(r.out, "g2o_cost") == doctest::Approx(3.02).epsilon(0.05));
}

TEST_CASE("missing input writes nothing") {
  const fs::path dir = test::scratchDir("cli_missing");
  const Run r = invoke({"optimize", "--input", (dir / "nope.g2o").string(), "--output",
                     (dir / "out.g2o").string(), "--report", (dir / "r.csv").string()});
  CHECK(r.code == 2);
  CHECK(fs::is_empty(dir));
  CHECK(r.err.find("nope.g2o") != std::string::npos);
  CHECK(invoke({"eval", "-e", (dir / "a").string(), "-t", (dir / "b").string()}).code == 2);
  CHECK(invoke({"export-traj", "-i", (dir / "a").string(), "-o", (dir / "b.csv").string()}).code == 2);
  CHECK(fs::is_empty(dir));
}

TEST_CASE("perturb") {
  const fs::path dir = test::scratchDir("cli_perturb");
  const std::string m3500 = test::dataPath("M3500.g2o");
  const std::vector<std::string> base = {"perturb", "-i", m3500, "--seed", "5", "--sigma",
                                         "0.0224", "0", "0", "0.0224", "0", "0.0224"};
  std::vector<std::string> a = base, b = base;
  a.insert(a.end(), {"-o", (dir / "a.g2o").string()});
  b.insert(b.end(), {"-o", (dir / "b.g2o").string()});
  const Run ra = invoke(a);
  CHECK(ra.code == 0);
  CHECK(ra.out.find("0.0224") != std::string::npos);
  CHECK(invoke(b).code == 0);
  CHECK(test::readFile(dir / "a.g2o") == test::readFile(dir / "b.g2o"));

  const PoseGraph p = readGraphFile((dir / "a.g2o").string());
  CHECK(p.edges.size() == 5453);
  for (const Edge& e : p.edges) CHECK(e.information == p.edges[0].information);
  CHECK(p.edges[0].information(0, 0) == doctest::Approx(1.0 / 0.0224));

  const Run city = invoke({"perturb", "-i", m3500, "-o", (dir / "c.g2o").string(), "--sigma", "0.001",
                        "0", "0", "0", "0.001", "0", "0", "0", "0.002"});
  CHECK(city.code == 0);
  const PoseGraph c = readGraphFile((dir / "c.g2o").string());
  CHECK(c.edges[0].information(2, 2) == doctest::Approx(500));

  const Run bad = invoke({"perturb", "-i", m3500, "-o", (dir / "d.g2o").string(), "--sigma", "1", "2",
                       "0", "1", "0", "1"});
  CHECK(bad.code == 2);
  CHECK_FALSE(fs::exists(dir / "d.g2o"));
  CHECK(invoke({"perturb", "-i", m3500, "-o", (dir / "e.g2o").string(), "--sigma", "1", "2"}).code ==
        2);
}

TEST_CASE("eval") {
  const fs::path dir = test::scratchDir("cli_eval");
  const std::string csail = test::dataPath("CSAIL.graph");
  const Run same = invoke({"eval", "-e", csail, "-t", csail, "--metrics", (dir / "m.csv").string()});
  CHECK(same.code == 0);
  const auto rows = lines(test::readFile(dir / "m.csv"));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "metric,value");
  CHECK(rows[1].rfind("e_t,", 0) == 0);
  CHECK(std::stod(rows[1].substr(4)) < 1e-12);
  CHECK(std::stod(rows[2].substr(8)) < 1e-12);

  CHECK(invoke({"optimize", "-i", csail, "--fixed-iters", "2", "-o", (dir / "opt.g2o").string()}).code == 0);
  const std::string opt = (dir / "opt.g2o").string();
  invoke({"eval", "-e", opt, "-t", csail, "--metrics", (dir / "ab.csv").string()});
  invoke({"eval", "-e", csail, "-t", opt, "--metrics", (dir / "ba.csv").string()});
  CHECK(lines(test::readFile(dir / "ab.csv"))[2] == lines(test::readFile(dir / "ba.csv"))[2]);

  CHECK(invoke({"eval", "-e", csail, "-t", test::dataPath("FR079.graph")}).code == 2);
}

TEST_CASE("perturb, optimize and eval on a seeded ring") {
  const fs::path dir = test::scratchDir("cli_pipeline");
  const RingGraphs ring = makeRing(60, 20.0, 15, 2);
  const std::string truth = (dir / "truth.g2o").string();
  writeGraphFile(truth, ring.truth);
  const std::string noisy = (dir / "noisy.g2o").string();
  CHECK(invoke({"perturb", "-i", truth, "-o", noisy, "--seed", "3", "--sigma", "0.002", "0", "0",
             "0.01", "0", "0.01"})
            .code == 0);
  const std::string odo = (dir / "odo.g2o").string();
  const std::string opt = (dir / "opt.g2o").string();
  CHECK(invoke({"optimize", "-i", noisy, "--init", "odometry", "--fixed-iters", "0", "-o", odo}).code == 0);
  CHECK(invoke({"optimize", "-i", noisy, "--init", "odometry", "--fixed-iters", "10", "-o", opt}).code == 0);
  const std::string m_odo = (dir / "odo.csv").string(), m_opt = (dir / "opt.csv").string();
  invoke({"eval", "-e", odo, "-t", truth, "--metrics", m_odo});
  invoke({"eval", "-e", opt, "-t", truth, "--metrics", m_opt});
  const double e_odo = std::stod(lines(test::readFile(m_odo))[1].substr(4));
  const double e_opt = std::stod(lines(test::readFile(m_opt))[1].substr(4));
  CHECK(e_opt < e_odo);
}

TEST_CASE("export-traj") {
  const fs::path dir = test::scratchDir("cli_export");
  const std::string two = test::fixturePath("two_node.g2o");
  CHECK(invoke({"export-traj", "-i", two, "-o", (dir / "t.csv").string()}).code == 0);
  const auto rows = lines(test::readFile(dir / "t.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "id,x,y,theta");
  CHECK(rows[2] == "1,1,0,0");

  const std::string csail = test::dataPath("CSAIL.graph");
  CHECK(invoke({"export-traj", "-i", csail, "-o", (dir / "c.csv").string()}).code == 0);
  const PoseGraph g = readGraphFile(csail);
  const auto c = lines(test::readFile(dir / "c.csv"));
  REQUIRE(c.size() == g.size() + 1);
  for (std::size_t k = 0; k < g.size(); k += 97) {
    std::istringstream row(c[k + 1]);
    std::string id, x, y;
    std::getline(row, id, ',');
    std::getline(row, x, ',');
    std::getline(row, y, ',');
    CHECK(std::stod(x) == g.nodes[k].translation().x());
    CHECK(std::stod(y) == g.nodes[k].translation().y());
  }

  CHECK(invoke({"export-traj", "-i", csail, "-o", (dir / "c.svg").string()}).code == 0);
  const std::string svg = test::readFile(dir / "c.svg");
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("<path") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(invoke({"export-traj", "-i", two, "-o", (dir / "t.out").string(), "--type", "svg"}).code == 0);
}
