#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace kplate {

/// Thrown for malformed input data (bad ids, degenerate geometry, parse errors).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point a, Point b) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

using Triangle = std::array<int, 3>;
/// Vertex pair with first < second.
using EdgeKey = std::array<int, 2>;

inline EdgeKey make_edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

/// How a triangle came into existence. Green and blue triangles are closure
/// elements; the next adaptive pass replaces them by their parent again.
enum class RefinementTag : std::uint8_t { none, red, green, blue };

struct ClosureParent {
  Triangle vertices{};
  RefinementTag origin = RefinementTag::none;
};

/// Conforming triangulation of a polygonal domain.
///
/// Triangles are stored counter-clockwise. Local edge k of a triangle joins
/// vertices k and k+1 (mod 3). Edges are numbered in order of first
/// appearance when sweeping the triangles, so numbering is deterministic.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles);

  /// Full constructor used by refinement; carries closure bookkeeping.
  Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::vector<RefinementTag> tags,
       std::vector<int> closure_parent, std::vector<ClosureParent> closure_parents,
       std::map<EdgeKey, int> midpoints);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<EdgeKey>& edges() const { return edges_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  /// Incident triangles of an edge; second entry is -1 on the boundary.
  const std::array<int, 2>& edge_triangles(int edge) const { return edge_triangles_.at(edge); }
  /// Global edge ids of the local edges of a triangle.
  const std::array<int, 3>& triangle_edges(int tri) const { return triangle_edges_.at(tri); }

  bool is_boundary_edge(int edge) const { return edge_triangles_.at(edge)[1] < 0; }
  bool is_boundary_vertex(int vertex) const { return boundary_vertex_.at(vertex) != 0; }

  /// Edge id for a vertex pair, or -1.
  int find_edge(int a, int b) const;

  RefinementTag tag(int tri) const { return tags_.at(tri); }
  int closure_parent(int tri) const { return closure_parent_.at(tri); }
  const std::vector<RefinementTag>& tags() const { return tags_; }
  const std::vector<int>& closure_parent_ids() const { return closure_parent_; }
  const std::vector<ClosureParent>& closure_parents() const { return closure_parents_; }
  const std::map<EdgeKey, int>& midpoints() const { return midpoints_; }

  double signed_area(int tri) const;
  double area() const;
  /// Smallest interior angle over all triangles, radians.
  double min_angle() const;

 private:
  void build_topology();

  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<EdgeKey> edges_;
  std::vector<std::array<int, 2>> edge_triangles_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<char> boundary_vertex_;
  std::unordered_map<std::uint64_t, int> edge_lookup_;

  std::vector<RefinementTag> tags_;
  std::vector<int> closure_parent_;
  std::vector<ClosureParent> closure_parents_;
  std::map<EdgeKey, int> midpoints_;
};

/// Per-edge geometric data as seen from one triangle.
struct EdgeFrame {
  double length = 0.0;
  Point normal;   ///< unit outward normal
  Point tangent;  ///< unit tangent, counter-clockwise along the boundary of the triangle
  Point midpoint;
};

struct ElementGeometry {
  int triangle = -1;
  std::array<Point, 3> vertices{};
  double diameter = 0.0;  ///< longest edge
  double area = 0.0;
  std::array<EdgeFrame, 3> edges{};  ///< local edge k runs from vertex k to vertex k+1

  Point centroid() const;
  /// Affine map from the reference triangle (0,0),(1,0),(0,1).
  Point map_from_reference(double xi, double eta) const;
};

ElementGeometry element_geometry(const Mesh& mesh, int tri);
/// Geometry of a free-standing triangle; throws if it is not counter-clockwise.
ElementGeometry element_geometry(const std::array<Point, 3>& vertices);

/// [0,1]^2 split into n x n squares, each cut along its (0,0)-(1,1) diagonal.
Mesh build_structured_unit_square(int n);

/// Red refinement of every triangle. Closure history is discarded.
Mesh uniform_refine(const Mesh& mesh);

/// Red-green-blue refinement. Marked triangles are red-refined; the closure
/// uses green (one split edge) or blue (two split edges) triangles, with the
/// longest edge as refinement edge. Closure triangles of earlier passes are
/// replaced by their parents first, and an edge is never split twice
/// relative to an unrefined neighbour.
Mesh rgb_refine(const Mesh& mesh, std::span<const int> marked);

/// Local index k such that edge (k, k+1) is the refinement edge: longest
/// edge, ties broken by the lexicographically smaller vertex-id pair.
int refinement_edge(const std::vector<Point>& vertices, const Triangle& tri);

/// Bucket grid over the bounding box for locating the triangle containing a point.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh, int buckets_per_side = 0);
  /// Containing triangle (closed, with a small tolerance), or -1 outside the mesh.
  int locate(Point p) const;

 private:
  const Mesh* mesh_;
  Point lower_;
  double cell_x_ = 1.0;
  double cell_y_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

}  // namespace kplate
