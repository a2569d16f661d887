#include "kplate/argyris.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numbers>

namespace kplate {

namespace {

struct MultiIndex {
  int i;
  int j;
};

/// Exponents of the degree-5 monomials.
constexpr std::array<MultiIndex, kLocalDofs> kMonomials = [] {
  std::array<MultiIndex, kLocalDofs> m{};
  int n = 0;
  for (int d = 0; d <= 5; ++d)
    for (int j = 0; j <= d; ++j) m[n++] = {d - j, j};
  return m;
}();

/// Multi-indices of the derivative rows, in `deriv::*` order.
constexpr std::array<MultiIndex, kNumDerivatives> kDerivatives{{{0, 0},
                                                                 {1, 0},
                                                                 {0, 1},
                                                                 {2, 0},
                                                                 {1, 1},
                                                                 {0, 2},
                                                                 {3, 0},
                                                                 {2, 1},
                                                                 {1, 2},
                                                                 {0, 3},
                                                                 {4, 0},
                                                                 {3, 1},
                                                                 {2, 2},
                                                                 {1, 3},
                                                                 {0, 4}}};

constexpr double falling(int n, int k) {
  double r = 1.0;
  for (int m = 0; m < k; ++m) r *= n - m;
  return r;
}

/// Derivatives with respect to the scaled coordinates (xi, eta).
Eigen::Matrix<double, kNumDerivatives, kLocalDofs> scaled_monomial_table(double xi, double eta) {
  std::array<double, 6> px{};
  std::array<double, 6> py{};
  px[0] = py[0] = 1.0;
  for (int k = 1; k < 6; ++k) {
    px[k] = px[k - 1] * xi;
    py[k] = py[k - 1] * eta;
  }
  Eigen::Matrix<double, kNumDerivatives, kLocalDofs> t;
  for (int r = 0; r < kNumDerivatives; ++r) {
    const auto [a, b] = kDerivatives[r];
    for (int m = 0; m < kLocalDofs; ++m) {
      const auto [i, j] = kMonomials[m];
      t(r, m) = (i >= a && j >= b) ? falling(i, a) * falling(j, b) * px[i - a] * py[j - b] : 0.0;
    }
  }
  return t;
}

template <class Row>
double row_directional(const Row& row, Point d) {
  return d.x * row(deriv::x) + d.y * row(deriv::y);
}

template <class Row>
double row_directional2(const Row& row, Point a, Point b) {
  return a.x * b.x * row(deriv::xx) + (a.x * b.y + a.y * b.x) * row(deriv::xy) + a.y * b.y * row(deriv::yy);
}

}  // namespace

double directional(const Jet& jet, Point d) { return d.x * jet[deriv::x] + d.y * jet[deriv::y]; }

double directional2(const Jet& jet, Point a, Point b) {
  return a.x * b.x * jet[deriv::xx] + (a.x * b.y + a.y * b.x) * jet[deriv::xy] + a.y * b.y * jet[deriv::yy];
}

DofLayout build_dof_layout(const Mesh& mesh) {
  DofLayout layout;
  layout.num_vertices = static_cast<int>(mesh.num_vertices());
  layout.num_edges = static_cast<int>(mesh.num_edges());
  layout.frames.assign(mesh.num_vertices(), VertexFrame{});
  layout.edge_normals.resize(mesh.num_edges());

  const auto& v = mesh.vertices();
  std::vector<char> framed(mesh.num_vertices(), 0);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto [lo, hi] = mesh.edges()[e];
    const Point t = (1.0 / norm(v[hi] - v[lo])) * (v[hi] - v[lo]);
    layout.edge_normals[e] = {t.y, -t.x};
    if (!mesh.is_boundary_edge(static_cast<int>(e))) continue;
    // Rotate the frame of a boundary vertex by the smallest angle that puts
    // the boundary tangent on a frame axis.
    constexpr double quarter = 0.5 * std::numbers::pi;
    double angle = std::fmod(std::atan2(t.y, t.x), quarter);
    if (angle < 0.0) angle += quarter;
    if (angle < 1e-12 || quarter - angle < 1e-12) angle = 0.0;
    const VertexFrame frame{{std::cos(angle), std::sin(angle)}, {-std::sin(angle), std::cos(angle)}};
    for (int vertex : {lo, hi}) {
      if (framed[vertex]) continue;
      framed[vertex] = 1;
      layout.frames[vertex] = frame;
    }
  }

  layout.element_dofs.resize(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangles()[t];
    auto& dofs = layout.element_dofs[t];
    for (int k = 0; k < 3; ++k)
      for (int c = 0; c < kVertexDofs; ++c) dofs[kVertexDofs * k + c] = layout.vertex_dof(tri[k], c);
    for (int k = 0; k < 3; ++k) dofs[3 * kVertexDofs + k] = layout.edge_dof(mesh.triangle_edges(static_cast<int>(t))[k]);
  }
  return layout;
}

ArgyrisElement::ArgyrisElement(const ElementGeometry& geometry, const std::array<VertexFrame, 3>& frames,
                               const std::array<Point, 3>& edge_normals)
    : geometry_(geometry),
      frames_(frames),
      edge_normals_(edge_normals),
      center_(geometry.centroid()),
      scale_(geometry.diameter) {
  if (!(geometry.area > 1e-14 * scale_ * scale_)) throw InvalidArgument("degenerate triangle");

  // Functionals applied to scaled monomials; derivative functionals of order
  // k come out multiplied by h^k, which keeps the matrix well conditioned.
  LocalMatrix v;
  Eigen::Matrix<double, kLocalDofs, 1> row_scale;
  for (int k = 0; k < 3; ++k) {
    const Point p = geometry.vertices[k];
    const auto t = scaled_monomial_table((p.x - center_.x) / scale_, (p.y - center_.y) / scale_);
    const VertexFrame& f = frames[k];
    for (int m = 0; m < kLocalDofs; ++m) {
      const auto col = t.col(m);
      v(6 * k + 0, m) = col(deriv::u);
      v(6 * k + 1, m) = row_directional(col, f.a);
      v(6 * k + 2, m) = row_directional(col, f.b);
      v(6 * k + 3, m) = row_directional2(col, f.a, f.a);
      v(6 * k + 4, m) = row_directional2(col, f.a, f.b);
      v(6 * k + 5, m) = row_directional2(col, f.b, f.b);
    }
    row_scale.segment<6>(6 * k) << 1.0, scale_, scale_, scale_ * scale_, scale_ * scale_, scale_ * scale_;
  }
  for (int k = 0; k < 3; ++k) {
    const Point p = geometry.edges[k].midpoint;
    const auto t = scaled_monomial_table((p.x - center_.x) / scale_, (p.y - center_.y) / scale_);
    for (int m = 0; m < kLocalDofs; ++m) v(18 + k, m) = row_directional(t.col(m), edge_normals[k]);
    row_scale(18 + k) = scale_;
  }
  // V_phys = S^{-1} V, so V_phys^{-1} = V^{-1} S.
  const Eigen::PartialPivLU<LocalMatrix> lu(v);
  coeffs_ = lu.inverse() * row_scale.asDiagonal();
}

Eigen::Matrix<double, kNumDerivatives, kLocalDofs> ArgyrisElement::monomial_table(Point p) const {
  auto t = scaled_monomial_table((p.x - center_.x) / scale_, (p.y - center_.y) / scale_);
  const double inv = 1.0 / scale_;
  std::array<double, 5> factor{1.0, inv, inv * inv, inv * inv * inv, inv * inv * inv * inv};
  for (int r = 0; r < kNumDerivatives; ++r) t.row(r) *= factor[kDerivatives[r].i + kDerivatives[r].j];
  return t;
}

DerivativeTable ArgyrisElement::evaluate(Point p) const { return monomial_table(p) * coeffs_; }

Jet ArgyrisElement::evaluate(const LocalVector& coeffs, Point p) const {
  const Eigen::Matrix<double, kLocalDofs, 1> mono = coeffs_ * coeffs;
  const Eigen::Matrix<double, kNumDerivatives, 1> values = monomial_table(p) * mono;
  Jet jet{};
  for (int r = 0; r < kNumDerivatives; ++r) jet[r] = values(r);
  return jet;
}

LocalVector ArgyrisElement::apply_functionals(const std::function<Jet(Point)>& field) const {
  LocalVector out;
  for (int k = 0; k < 3; ++k) {
    const Jet j = field(geometry_.vertices[k]);
    const VertexFrame& f = frames_[k];
    out.segment<6>(6 * k) << j[deriv::u], directional(j, f.a), directional(j, f.b), directional2(j, f.a, f.a),
        directional2(j, f.a, f.b), directional2(j, f.b, f.b);
  }
  for (int k = 0; k < 3; ++k) out(18 + k) = directional(field(geometry_.edges[k].midpoint), edge_normals_[k]);
  return out;
}

ArgyrisElement make_element(const Mesh& mesh, const DofLayout& layout, int tri) {
  const ElementGeometry g = element_geometry(mesh, tri);
  const Triangle& t = mesh.triangles()[tri];
  const auto& edges = mesh.triangle_edges(tri);
  return ArgyrisElement(g, {layout.frames[t[0]], layout.frames[t[1]], layout.frames[t[2]]},
                        {layout.edge_normals[edges[0]], layout.edge_normals[edges[1]], layout.edge_normals[edges[2]]});
}

ElementBasis element_basis(const ArgyrisElement& element, const QuadratureRule& rule) {
  ElementBasis basis;
  basis.rule = map_rule(rule, element.geometry());
  basis.tables.reserve(rule.size());
  for (const Point& p : basis.rule.points) basis.tables.push_back(element.evaluate(p));
  return basis;
}

LocalVector gather(const DofLayout& layout, int tri, const Eigen::VectorXd& dofs) {
  LocalVector local;
  const auto& ids = layout.element_dofs.at(tri);
  for (int j = 0; j < kLocalDofs; ++j) local(j) = dofs(ids[j]);
  return local;
}

Eigen::VectorXd interpolate(const Mesh& mesh, const DofLayout& layout, const std::function<Jet(Point)>& field) {
  Eigen::VectorXd dofs(layout.num_dofs());
  for (int v = 0; v < layout.num_vertices; ++v) {
    const Jet j = field(mesh.vertices()[v]);
    const VertexFrame& f = layout.frames[v];
    dofs.segment<6>(layout.vertex_dof(v, 0)) << j[deriv::u], directional(j, f.a), directional(j, f.b),
        directional2(j, f.a, f.a), directional2(j, f.a, f.b), directional2(j, f.b, f.b);
  }
  for (int e = 0; e < layout.num_edges; ++e) {
    const auto [a, b] = mesh.edges()[e];
    const Point mid = 0.5 * (mesh.vertices()[a] + mesh.vertices()[b]);
    dofs(layout.edge_dof(e)) = directional(field(mid), layout.edge_normals[e]);
  }
  return dofs;
}

}  // namespace kplate
