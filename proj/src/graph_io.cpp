#include "dqpgo/graph_io.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string_view>

namespace dqpgo {

GraphFormat parseGraphFormat(const std::string& name) {
  if (name == "auto") return GraphFormat::Auto;
  if (name == "g2o") return GraphFormat::G2o;
  if (name == "toro") return GraphFormat::Toro;
  throw std::invalid_argument("unknown graph format '" + name + "'");
}

namespace {

struct RawVertex {
  long id;
  double x, y, theta;
  std::size_t line;
};

struct RawEdge {
  long from, to;
  double dx, dy, dtheta;
  InformationMatrix information;
  std::size_t line;
};

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    if (end > pos) tokens.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return tokens;
}

double toDouble(std::string_view token, std::size_t line) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError(line, "invalid number '" + std::string(token) + "'");
  }
  return value;
}

long toId(std::string_view token, std::size_t line) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, "invalid vertex id '" + std::string(token) + "'");
  }
  return value;
}

// Upper triangles in the file's native order, permuted to [dtheta, dt_x, dt_y].
InformationMatrix g2oInformation(const double* v) {
  // I11 I12 I13 I22 I23 I33 over (x, y, theta)
  return informationFromUpperTriangle(v[5], v[2], v[4], v[0], v[1], v[3]);
}

InformationMatrix toroInformation(const double* v) {
  // Ixx Ixy Iyy Itt Ixt Iyt
  return informationFromUpperTriangle(v[3], v[4], v[5], v[0], v[1], v[2]);
}

bool isPositiveDefinite(const InformationMatrix& m) {
  return Eigen::LLT<InformationMatrix>(m).info() == Eigen::Success &&
         m.diagonal().minCoeff() > 0.0;
}

}  // namespace

PoseGraph parseGraph(std::istream& in, GraphFormat hint) {
  std::vector<RawVertex> vertices;
  std::vector<RawEdge> edges;

  std::string text;
  std::size_t line_number = 0;
  while (std::getline(in, text)) {
    ++line_number;
    const auto tokens = tokenize(text);
    if (tokens.empty() || tokens[0].front() == '#') continue;

    const std::string_view tag = tokens[0];
    const bool g2o_vertex = tag == "VERTEX_SE2";
    const bool toro_vertex = tag == "VERTEX2";
    const bool g2o_edge = tag == "EDGE_SE2";
    const bool toro_edge = tag == "EDGE2";
    if (tag == "FIX") continue;
    if (!(g2o_vertex || toro_vertex || g2o_edge || toro_edge)) {
      throw ParseError(line_number, "unsupported record '" + std::string(tag) + "'");
    }
    const bool is_g2o = g2o_vertex || g2o_edge;
    if ((hint == GraphFormat::G2o && !is_g2o) || (hint == GraphFormat::Toro && is_g2o)) {
      throw ParseError(line_number, "record '" + std::string(tag) +
                                        "' does not match the requested format");
    }

    if (g2o_vertex || toro_vertex) {
      if (tokens.size() != 5) {
        throw ParseError(line_number, "vertex record needs 4 fields");
      }
      vertices.push_back({toId(tokens[1], line_number), toDouble(tokens[2], line_number),
                          toDouble(tokens[3], line_number), toDouble(tokens[4], line_number),
                          line_number});
      continue;
    }

    if (tokens.size() != 6 && tokens.size() != 12) {
      throw ParseError(line_number, "edge record needs 5 or 11 fields");
    }
    RawEdge edge{toId(tokens[1], line_number), toId(tokens[2], line_number),
                 toDouble(tokens[3], line_number), toDouble(tokens[4], line_number),
                 toDouble(tokens[5], line_number), InformationMatrix::Identity(),
                 line_number};
    if (tokens.size() == 12) {
      double upper[6];
      for (int k = 0; k < 6; ++k) upper[k] = toDouble(tokens[6 + k], line_number);
      edge.information = is_g2o ? g2oInformation(upper) : toroInformation(upper);
      if (!isPositiveDefinite(edge.information)) {
        throw ParseError(line_number, "edge " + std::string(tokens[1]) + " -> " +
                                          std::string(tokens[2]) +
                                          ": information matrix is not positive definite");
      }
    }
    edges.push_back(edge);
  }

  if (vertices.empty()) throw ParseError(0, "graph has no vertices");

  std::sort(vertices.begin(), vertices.end(),
            [](const RawVertex& a, const RawVertex& b) { return a.id < b.id; });
  std::map<long, std::size_t> index_of;
  PoseGraph graph;
  graph.nodes.reserve(vertices.size());
  graph.ids.reserve(vertices.size());
  bool dense = true;
  for (const RawVertex& v : vertices) {
    if (!index_of.emplace(v.id, graph.nodes.size()).second) {
      throw ParseError(v.line, "duplicate vertex id " + std::to_string(v.id));
    }
    dense = dense && v.id == static_cast<long>(graph.nodes.size());
    graph.ids.push_back(v.id);
    graph.nodes.push_back(PlanarDualQuaterniond::FromPose(v.theta, {v.x, v.y}));
  }
  if (dense) graph.ids.clear();

  graph.edges.reserve(edges.size());
  for (const RawEdge& e : edges) {
    const auto from = index_of.find(e.from);
    const auto to = index_of.find(e.to);
    if (from == index_of.end() || to == index_of.end()) {
      throw ParseError(e.line, "edge references a vertex without a VERTEX record");
    }
    if (from->second == to->second) {
      throw ParseError(e.line, "edge is a self-loop");
    }
    graph.edges.push_back({from->second, to->second,
                           PlanarDualQuaterniond::FromPose(e.dtheta, {e.dx, e.dy}),
                           e.information});
  }

  if (!isConnected(graph)) throw ParseError(0, "graph is not connected");
  return graph;
}

PoseGraph readGraphFile(const std::string& path, GraphFormat hint) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return parseGraph(in, hint);
}

void writeGraph(std::ostream& out, const PoseGraph& graph, GraphFormat format) {
  const bool toro = format == GraphFormat::Toro;
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << std::setprecision(17);

  for (std::size_t k = 0; k < graph.size(); ++k) {
    const Pose2d p = graph.nodes[k].pose();
    out << (toro ? "VERTEX2 " : "VERTEX_SE2 ") << graph.idOf(k) << ' ' << p.t.x() << ' '
        << p.t.y() << ' ' << p.theta << '\n';
  }
  for (const Edge& e : graph.edges) {
    const Pose2d z = e.measurement.pose();
    const InformationMatrix& o = e.information;
    out << (toro ? "EDGE2 " : "EDGE_SE2 ") << graph.idOf(e.from) << ' ' << graph.idOf(e.to)
        << ' ' << z.t.x() << ' ' << z.t.y() << ' ' << z.theta;
    if (toro) {
      out << ' ' << o(1, 1) << ' ' << o(1, 2) << ' ' << o(2, 2) << ' ' << o(0, 0) << ' '
          << o(0, 1) << ' ' << o(0, 2) << '\n';
    } else {
      out << ' ' << o(1, 1) << ' ' << o(1, 2) << ' ' << o(0, 1) << ' ' << o(2, 2) << ' '
          << o(0, 2) << ' ' << o(0, 0) << '\n';
    }
  }

  out.flags(old_flags);
  out.precision(old_precision);
}

void writeGraphFile(const std::string& path, const PoseGraph& graph, GraphFormat format) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  writeGraph(out, graph, format);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace dqpgo
