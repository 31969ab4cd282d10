#pragma once

#include "dqpgo/pose_graph.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace dqpgo {

// Supported encodings:
//   g2o:  VERTEX_SE2 id x y theta
//         EDGE_SE2 i j dx dy dtheta I11 I12 I13 I22 I23 I33   (x, y, theta order)
//   TORO: VERTEX2 id x y theta
//         EDGE2 i j dx dy dtheta Ixx Ixy Iyy Itt Ixt Iyt
// Both information layouts are permuted into [dtheta, dt_x, dt_y] on read.
enum class GraphFormat { Auto, G2o, Toro };

GraphFormat parseGraphFormat(const std::string& name);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads a planar pose graph. Blank lines, trailing whitespace and lines
/// starting with '#' are ignored. Vertex ids are sorted and remapped to
/// dense indices. Throws ParseError on malformed records, duplicate vertex
/// ids, edges to unknown vertices, non-PD information, disconnected or
/// empty graphs.
PoseGraph parseGraph(std::istream& in, GraphFormat hint = GraphFormat::Auto);
PoseGraph readGraphFile(const std::string& path, GraphFormat hint = GraphFormat::Auto);

/// Writes with 17 significant digits so that parse(write(g)) is exact.
void writeGraph(std::ostream& out, const PoseGraph& graph,
                GraphFormat format = GraphFormat::G2o);
void writeGraphFile(const std::string& path, const PoseGraph& graph,
                    GraphFormat format = GraphFormat::G2o);

}  // namespace dqpgo
