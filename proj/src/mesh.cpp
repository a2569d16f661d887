#include "kplate/mesh.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace kplate {

namespace {

std::uint64_t pack(int a, int b) {
  const EdgeKey k = make_edge_key(a, b);
  return (static_cast<std::uint64_t>(k[0]) << 32) | static_cast<std::uint32_t>(k[1]);
}

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& k) const { return std::hash<std::uint64_t>{}(pack(k[0], k[1])); }
};

double triangle_signed_area(Point a, Point b, Point c) { return 0.5 * cross(b - a, c - a); }

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  tags_.assign(triangles_.size(), RefinementTag::none);
  closure_parent_.assign(triangles_.size(), -1);
  build_topology();
}

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::vector<RefinementTag> tags,
           std::vector<int> closure_parent, std::vector<ClosureParent> closure_parents,
           std::map<EdgeKey, int> midpoints)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      tags_(std::move(tags)),
      closure_parent_(std::move(closure_parent)),
      closure_parents_(std::move(closure_parents)),
      midpoints_(std::move(midpoints)) {
  if (tags_.size() != triangles_.size() || closure_parent_.size() != triangles_.size())
    throw InvalidArgument("mesh bookkeeping arrays do not match triangle count");
  build_topology();
}

void Mesh::build_topology() {
  const int nv = static_cast<int>(vertices_.size());
  if (triangles_.empty()) throw InvalidArgument("mesh has no triangles");
  edges_.clear();
  edge_triangles_.clear();
  triangle_edges_.assign(triangles_.size(), {-1, -1, -1});
  edge_lookup_.clear();
  edge_lookup_.reserve(triangles_.size() * 2);

  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const Triangle& tri = triangles_[t];
    for (int v : tri)
      if (v < 0 || v >= nv) throw InvalidArgument("triangle " + std::to_string(t) + " references a missing vertex");
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw InvalidArgument("triangle " + std::to_string(t) + " repeats a vertex");
    if (signed_area(static_cast<int>(t)) <= 0.0)
      throw InvalidArgument("triangle " + std::to_string(t) + " is not counter-clockwise");
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k];
      const int b = tri[(k + 1) % 3];
      auto [it, inserted] = edge_lookup_.try_emplace(pack(a, b), static_cast<int>(edges_.size()));
      if (inserted) {
        edges_.push_back(make_edge_key(a, b));
        edge_triangles_.push_back({static_cast<int>(t), -1});
      } else {
        auto& owners = edge_triangles_[it->second];
        if (owners[1] >= 0) throw InvalidArgument("edge shared by more than two triangles");
        owners[1] = static_cast<int>(t);
      }
      triangle_edges_[t][k] = it->second;
    }
  }

  boundary_vertex_.assign(vertices_.size(), 0);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edge_triangles_[e][1] < 0) {
      boundary_vertex_[edges_[e][0]] = 1;
      boundary_vertex_[edges_[e][1]] = 1;
    }
  }
}

int Mesh::find_edge(int a, int b) const {
  auto it = edge_lookup_.find(pack(a, b));
  return it == edge_lookup_.end() ? -1 : it->second;
}

double Mesh::signed_area(int tri) const {
  const Triangle& t = triangles_.at(tri);
  return triangle_signed_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
}

double Mesh::area() const {
  double sum = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) sum += signed_area(static_cast<int>(t));
  return sum;
}

double Mesh::min_angle() const {
  double result = std::numbers::pi;
  for (const Triangle& t : triangles_) {
    for (int k = 0; k < 3; ++k) {
      const Point p = vertices_[t[k]];
      const Point a = vertices_[t[(k + 1) % 3]] - p;
      const Point b = vertices_[t[(k + 2) % 3]] - p;
      result = std::min(result, std::atan2(std::abs(cross(a, b)), dot(a, b)));
    }
  }
  return result;
}

Point ElementGeometry::centroid() const {
  return (1.0 / 3.0) * (vertices[0] + vertices[1] + vertices[2]);
}

Point ElementGeometry::map_from_reference(double xi, double eta) const {
  return vertices[0] + xi * (vertices[1] - vertices[0]) + eta * (vertices[2] - vertices[0]);
}

ElementGeometry element_geometry(const std::array<Point, 3>& vertices) {
  ElementGeometry g;
  g.vertices = vertices;
  g.area = triangle_signed_area(vertices[0], vertices[1], vertices[2]);
  if (!(g.area > 0.0)) throw InvalidArgument("triangle is degenerate or clockwise");
  for (int k = 0; k < 3; ++k) {
    const Point a = vertices[k];
    const Point b = vertices[(k + 1) % 3];
    EdgeFrame& e = g.edges[k];
    e.length = norm(b - a);
    e.tangent = (1.0 / e.length) * (b - a);
    e.normal = {e.tangent.y, -e.tangent.x};
    e.midpoint = 0.5 * (a + b);
    g.diameter = std::max(g.diameter, e.length);
  }
  if (g.area < 1e-14 * g.diameter * g.diameter) throw InvalidArgument("triangle is degenerate");
  return g;
}

ElementGeometry element_geometry(const Mesh& mesh, int tri) {
  if (tri < 0 || static_cast<std::size_t>(tri) >= mesh.num_triangles())
    throw InvalidArgument("triangle id " + std::to_string(tri) + " out of range");
  const Triangle& t = mesh.triangles()[tri];
  const auto& v = mesh.vertices();
  ElementGeometry g = element_geometry({v[t[0]], v[t[1]], v[t[2]]});
  g.triangle = tri;
  return g;
}

Mesh build_structured_unit_square(int n) {
  if (n < 1) throw InvalidArgument("subdivision count must be at least 1");
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
  std::vector<Triangle> triangles;
  triangles.reserve(static_cast<std::size_t>(2 * n * n));
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return Mesh(std::move(vertices), std::move(triangles));
}

int refinement_edge(const std::vector<Point>& vertices, const Triangle& tri) {
  int best = 0;
  double best_len = -1.0;
  EdgeKey best_key{};
  for (int k = 0; k < 3; ++k) {
    const int a = tri[k];
    const int b = tri[(k + 1) % 3];
    const double len = norm(vertices[b] - vertices[a]);
    const EdgeKey key = make_edge_key(a, b);
    const double tol = 1e-12 * std::max(len, best_len);
    if (len > best_len + tol || (std::abs(len - best_len) <= tol && key < best_key)) {
      best = k;
      best_len = len;
      best_key = key;
    }
  }
  return best;
}

namespace {

/// Shared state while producing a refined mesh.
struct RefinementBuilder {
  std::vector<Point> vertices;
  std::map<EdgeKey, int> midpoints;
  std::vector<Triangle> triangles;
  std::vector<RefinementTag> tags;
  std::vector<int> closure_parent;
  std::vector<ClosureParent> parents;

  int midpoint(int a, int b) {
    const EdgeKey key = make_edge_key(a, b);
    auto it = midpoints.find(key);
    if (it != midpoints.end()) return it->second;
    const int id = static_cast<int>(vertices.size());
    vertices.push_back(0.5 * (vertices[a] + vertices[b]));
    midpoints.emplace(key, id);
    return id;
  }

  void emit(const Triangle& t, RefinementTag tag, int parent) {
    triangles.push_back(t);
    tags.push_back(tag);
    closure_parent.push_back(parent);
  }

  void red(const Triangle& t) {
    const int m01 = midpoint(t[0], t[1]);
    const int m12 = midpoint(t[1], t[2]);
    const int m20 = midpoint(t[2], t[0]);
    emit({t[0], m01, m20}, RefinementTag::red, -1);
    emit({m01, t[1], m12}, RefinementTag::red, -1);
    emit({m20, m12, t[2]}, RefinementTag::red, -1);
    emit({m01, m12, m20}, RefinementTag::red, -1);
  }

  /// `split[k]` tells whether local edge k is bisected. Exactly the
  /// refinement edge plus at most one more edge may be set.
  void closure(const Triangle& t, RefinementTag origin, int ref, const std::array<bool, 3>& split) {
    const int parent = static_cast<int>(parents.size());
    parents.push_back({t, origin});
    // Rotate so the refinement edge is (v0, v1).
    const Triangle v{t[ref], t[(ref + 1) % 3], t[(ref + 2) % 3]};
    const bool split12 = split[(ref + 1) % 3];
    const bool split20 = split[(ref + 2) % 3];
    const int m01 = midpoint(v[0], v[1]);
    if (!split12 && !split20) {
      emit({v[0], m01, v[2]}, RefinementTag::green, parent);
      emit({m01, v[1], v[2]}, RefinementTag::green, parent);
    } else if (split12) {
      const int m12 = midpoint(v[1], v[2]);
      emit({v[0], m01, v[2]}, RefinementTag::blue, parent);
      emit({m01, v[1], m12}, RefinementTag::blue, parent);
      emit({m01, m12, v[2]}, RefinementTag::blue, parent);
    } else {
      const int m20 = midpoint(v[2], v[0]);
      emit({m01, v[1], v[2]}, RefinementTag::blue, parent);
      emit({v[0], m01, m20}, RefinementTag::blue, parent);
      emit({m01, v[2], m20}, RefinementTag::blue, parent);
    }
  }

  Mesh finish() {
    return Mesh(std::move(vertices), std::move(triangles), std::move(tags), std::move(closure_parent),
                std::move(parents), std::move(midpoints));
  }
};

}  // namespace

Mesh uniform_refine(const Mesh& mesh) {
  RefinementBuilder b{mesh.vertices(), mesh.midpoints(), {}, {}, {}, {}};
  for (const Triangle& t : mesh.triangles()) b.red(t);
  return b.finish();
}

Mesh rgb_refine(const Mesh& mesh, std::span<const int> marked) {
  if (marked.empty()) return mesh;
  const int nt = static_cast<int>(mesh.num_triangles());
  for (int t : marked)
    if (t < 0 || t >= nt) throw InvalidArgument("marked triangle id " + std::to_string(t) + " out of range");

  // Regular mesh: current triangles with closure children replaced by their parents.
  struct Regular {
    Triangle vertices;
    RefinementTag origin;
    bool marked;
  };
  std::vector<Regular> regular;
  std::vector<int> leaf_to_regular(static_cast<std::size_t>(nt), -1);
  std::vector<int> parent_to_regular(mesh.closure_parents().size(), -1);
  for (int t = 0; t < nt; ++t) {
    const int p = mesh.closure_parent(t);
    if (p < 0) {
      leaf_to_regular[t] = static_cast<int>(regular.size());
      regular.push_back({mesh.triangles()[t], mesh.tag(t), false});
    } else {
      if (parent_to_regular[p] < 0) {
        parent_to_regular[p] = static_cast<int>(regular.size());
        regular.push_back({mesh.closure_parents()[p].vertices, mesh.closure_parents()[p].origin, false});
      }
      leaf_to_regular[t] = parent_to_regular[p];
    }
  }
  for (int t : marked) regular[leaf_to_regular[t]].marked = true;

  RefinementBuilder b{mesh.vertices(), mesh.midpoints(), {}, {}, {}, {}};
  auto edge_of = [&](std::size_t i, int k) {
    const Triangle& v = regular[i].vertices;
    return make_edge_key(v[k], v[(k + 1) % 3]);
  };

  std::vector<char> red;
  std::vector<int> ref_edge;
  std::unordered_set<EdgeKey, EdgeKeyHash> split_edges;
  while (true) {
    const std::size_t nr = regular.size();
    std::unordered_set<EdgeKey, EdgeKeyHash> regular_edges;
    for (std::size_t i = 0; i < nr; ++i)
      for (int k = 0; k < 3; ++k) regular_edges.insert(edge_of(i, k));

    // True if regular edges lie strictly inside `e`.
    const auto refined = [&](const auto& self, const EdgeKey& e) -> bool {
      auto it = b.midpoints.find(e);
      if (it == b.midpoints.end()) return false;
      const EdgeKey left = make_edge_key(e[0], it->second);
      const EdgeKey right = make_edge_key(it->second, e[1]);
      return regular_edges.contains(left) || regular_edges.contains(right) || self(self, left) ||
             self(self, right);
    };

    // Hanging edges of the regular mesh: the neighbour already split them.
    // Each half of a hanging edge remembers the coarse triangle that owns it.
    split_edges.clear();
    std::vector<std::pair<EdgeKey, int>> half_edge_owner;
    for (std::size_t i = 0; i < nr; ++i) {
      for (int k = 0; k < 3; ++k) {
        const EdgeKey e = edge_of(i, k);
        auto it = b.midpoints.find(e);
        if (it == b.midpoints.end()) continue;
        const EdgeKey left = make_edge_key(e[0], it->second);
        const EdgeKey right = make_edge_key(it->second, e[1]);
        if (refined(refined, e)) {
          split_edges.insert(e);
          half_edge_owner.push_back({left, static_cast<int>(i)});
          half_edge_owner.push_back({right, static_cast<int>(i)});
        }
      }
    }

    red.assign(nr, 0);
    for (std::size_t i = 0; i < nr; ++i) red[i] = regular[i].marked ? 1 : 0;
    ref_edge.resize(nr);
    for (std::size_t i = 0; i < nr; ++i) ref_edge[i] = refinement_edge(b.vertices, regular[i].vertices);

    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < nr; ++i) {
        if (red[i]) {
          for (int k = 0; k < 3; ++k) changed |= split_edges.insert(edge_of(i, k)).second;
          continue;
        }
        int count = 0;
        for (int k = 0; k < 3; ++k) count += split_edges.contains(edge_of(i, k)) ? 1 : 0;
        if (count == 3) {
          red[i] = 1;
          changed = true;
        } else if (count >= 1) {
          changed |= split_edges.insert(edge_of(i, ref_edge[i])).second;
        }
      }
    }

    // Splitting half of a hanging edge would leave two levels of hanging
    // nodes. The coarse owner is red-refined first and the closure redone.
    std::vector<char> forced(nr, 0);
    bool any = false;
    for (const auto& [half, owner] : half_edge_owner) {
      if ((split_edges.contains(half) || refined(refined, half)) && !forced[owner]) {
        forced[owner] = 1;
        any = true;
      }
    }
    if (!any) break;
    std::vector<Regular> next;
    next.reserve(nr + 3 * static_cast<std::size_t>(std::count(forced.begin(), forced.end(), 1)));
    for (std::size_t i = 0; i < nr; ++i) {
      if (!forced[i]) {
        next.push_back(regular[i]);
        continue;
      }
      const Triangle& t = regular[i].vertices;
      const int m01 = b.midpoint(t[0], t[1]);
      const int m12 = b.midpoint(t[1], t[2]);
      const int m20 = b.midpoint(t[2], t[0]);
      for (const Triangle& c : {Triangle{t[0], m01, m20}, Triangle{m01, t[1], m12}, Triangle{m20, m12, t[2]},
                                Triangle{m01, m12, m20}})
        next.push_back({c, RefinementTag::red, false});
    }
    regular = std::move(next);
  }

  for (std::size_t i = 0; i < regular.size(); ++i) {
    const Regular& r = regular[i];
    if (red[i]) {
      b.red(r.vertices);
      continue;
    }
    std::array<bool, 3> split{};
    int count = 0;
    for (int k = 0; k < 3; ++k) {
      split[k] = split_edges.contains(edge_of(i, k));
      count += split[k] ? 1 : 0;
    }
    if (count == 0)
      b.emit(r.vertices, r.origin, -1);
    else
      b.closure(r.vertices, r.origin, ref_edge[i], split);
  }
  return b.finish();
}

PointLocator::PointLocator(const Mesh& mesh, int buckets_per_side) : mesh_(&mesh) {
  const auto& v = mesh.vertices();
  Point lo = v.front();
  Point hi = v.front();
  for (const Point& p : v) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  if (buckets_per_side <= 0)
    buckets_per_side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_triangles()) / 2.0)));
  nx_ = ny_ = buckets_per_side;
  lower_ = lo;
  cell_x_ = std::max(hi.x - lo.x, 1e-300) / nx_;
  cell_y_ = std::max(hi.y - lo.y, 1e-300) / ny_;
  buckets_.assign(static_cast<std::size_t>(nx_ * ny_), {});
  auto clamp_x = [this](double x) { return std::clamp(static_cast<int>((x - lower_.x) / cell_x_), 0, nx_ - 1); };
  auto clamp_y = [this](double y) { return std::clamp(static_cast<int>((y - lower_.y) / cell_y_), 0, ny_ - 1); };
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangles()[t];
    double x0 = v[tri[0]].x, x1 = x0, y0 = v[tri[0]].y, y1 = y0;
    for (int k = 1; k < 3; ++k) {
      x0 = std::min(x0, v[tri[k]].x);
      x1 = std::max(x1, v[tri[k]].x);
      y0 = std::min(y0, v[tri[k]].y);
      y1 = std::max(y1, v[tri[k]].y);
    }
    for (int j = clamp_y(y0); j <= clamp_y(y1); ++j)
      for (int i = clamp_x(x0); i <= clamp_x(x1); ++i) buckets_[static_cast<std::size_t>(j * nx_ + i)].push_back(static_cast<int>(t));
  }
}

int PointLocator::locate(Point p) const {
  const int i = static_cast<int>(std::floor((p.x - lower_.x) / cell_x_));
  const int j = static_cast<int>(std::floor((p.y - lower_.y) / cell_y_));
  const int ci = std::clamp(i, 0, nx_ - 1);
  const int cj = std::clamp(j, 0, ny_ - 1);
  if (std::abs(i - ci) > 1 || std::abs(j - cj) > 1) return -1;
  const auto& v = mesh_->vertices();
  int best = -1;
  double best_margin = -1e-10;
  for (int t : buckets_[static_cast<std::size_t>(cj * nx_ + ci)]) {
    const Triangle& tri = mesh_->triangles()[t];
    const double area2 = cross(v[tri[1]] - v[tri[0]], v[tri[2]] - v[tri[0]]);
    double margin = 1.0;
    for (int k = 0; k < 3; ++k) {
      const double bary = cross(v[tri[(k + 2) % 3]] - v[tri[(k + 1) % 3]], p - v[tri[(k + 1) % 3]]) / area2;
      margin = std::min(margin, bary);
    }
    if (margin > best_margin) {
      best_margin = margin;
      best = t;
    }
  }
  return best;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "vertices " << mesh.num_vertices() << '\n';
  out << std::setprecision(17);
  for (const Point& p : mesh.vertices()) out << p.x << ' ' << p.y << '\n';
  out << "triangles " << mesh.num_triangles() << '\n';
  for (const Triangle& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

Mesh read_mesh(std::istream& in) {
  auto header = [&in](const char* expected) {
    std::string word;
    long long count = -1;
    if (!(in >> word >> count) || word != expected || count < 0)
      throw InvalidArgument(std::string("mesh file: expected '") + expected + " <count>' header");
    return static_cast<std::size_t>(count);
  };
  std::vector<Point> vertices(header("vertices"));
  for (Point& p : vertices)
    if (!(in >> p.x >> p.y)) throw InvalidArgument("mesh file: truncated vertex list");
  std::vector<Triangle> triangles(header("triangles"));
  for (Triangle& t : triangles)
    if (!(in >> t[0] >> t[1] >> t[2])) throw InvalidArgument("mesh file: truncated triangle list");
  return Mesh(std::move(vertices), std::move(triangles));
}

}  // namespace kplate
