#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <vector>

#include "kplate/mesh.hpp"
#include "kplate/quadrature.hpp"

namespace kplate {

inline constexpr int kLocalDofs = 21;
inline constexpr int kVertexDofs = 6;
/// Partial derivatives of order 0..4 at a point.
inline constexpr int kNumDerivatives = 15;

/// Storage order of partial derivatives, one entry per multi-index.
namespace deriv {
enum : int { u, x, y, xx, xy, yy, xxx, xxy, xyy, yyy, xxxx, xxxy, xxyy, xyyy, yyyy };
}

using Jet = std::array<double, kNumDerivatives>;
/// Row r = derivative `deriv::*`, column j = shape function j.
using DerivativeTable = Eigen::Matrix<double, kNumDerivatives, kLocalDofs>;
using LocalVector = Eigen::Matrix<double, kLocalDofs, 1>;
using LocalMatrix = Eigen::Matrix<double, kLocalDofs, kLocalDofs>;

/// Orthonormal frame in which the six vertex functionals are taken:
/// u, d_a u, d_b u, d_aa u, d_ab u, d_bb u.
struct VertexFrame {
  Point a{1.0, 0.0};
  Point b{0.0, 1.0};
};

/// Global numbering of the Argyris space: six DOFs per vertex followed by
/// one normal-derivative DOF per edge.
///
/// Interior vertices use the Cartesian frame. Boundary vertices use a frame
/// aligned with a boundary edge so that the clamped conditions become plain
/// DOF deletions; on axis-parallel boundaries that frame is Cartesian too.
/// The edge normal is the low-to-high vertex tangent rotated clockwise, so
/// both incident triangles agree on it.
struct DofLayout {
  int num_vertices = 0;
  int num_edges = 0;
  std::vector<VertexFrame> frames;
  std::vector<Point> edge_normals;
  std::vector<std::array<int, kLocalDofs>> element_dofs;

  int num_dofs() const { return kVertexDofs * num_vertices + num_edges; }
  int vertex_dof(int vertex, int component) const { return kVertexDofs * vertex + component; }
  int edge_dof(int edge) const { return kVertexDofs * num_vertices + edge; }
};

DofLayout build_dof_layout(const Mesh& mesh);

/// Quintic Argyris shape functions of one physical triangle.
///
/// Shape functions are expanded in monomials of the scaled local coordinates
/// ((x, y) - centroid) / h_K; the coefficients come from inverting the
/// 21x21 matrix of DOF functionals applied to those monomials.
class ArgyrisElement {
 public:
  ArgyrisElement(const ElementGeometry& geometry, const std::array<VertexFrame, 3>& frames,
                 const std::array<Point, 3>& edge_normals);

  const ElementGeometry& geometry() const { return geometry_; }
  const std::array<VertexFrame, 3>& frames() const { return frames_; }
  const std::array<Point, 3>& edge_normals() const { return edge_normals_; }

  /// All derivatives up to order four of all 21 shape functions at `p`.
  DerivativeTable evaluate(Point p) const;
  /// Derivatives of the local field sum_j coeffs[j] * phi_j at `p`.
  Jet evaluate(const LocalVector& coeffs, Point p) const;

  /// The 21 DOF functionals applied to a function given by its jets at the
  /// vertices and edge midpoints.
  LocalVector apply_functionals(const std::function<Jet(Point)>& field) const;

  /// Matrix of monomial coefficients (scaled local coordinates).
  const LocalMatrix& coefficients() const { return coeffs_; }

 private:
  Eigen::Matrix<double, kNumDerivatives, kLocalDofs> monomial_table(Point p) const;

  ElementGeometry geometry_;
  std::array<VertexFrame, 3> frames_;
  std::array<Point, 3> edge_normals_;
  Point center_;
  double scale_;
  LocalMatrix coeffs_;
};

ArgyrisElement make_element(const Mesh& mesh, const DofLayout& layout, int tri);

/// Shape-function derivatives tabulated at the points of a mapped rule.
struct ElementBasis {
  MappedRule rule;
  std::vector<DerivativeTable> tables;
};

ElementBasis element_basis(const ArgyrisElement& element, const QuadratureRule& rule);

/// Gather the local coefficients of a global DOF vector.
LocalVector gather(const DofLayout& layout, int tri, const Eigen::VectorXd& dofs);

/// DOF vector whose functionals match those of `field`. The callable must
/// return at least value, gradient and Hessian.
Eigen::VectorXd interpolate(const Mesh& mesh, const DofLayout& layout, const std::function<Jet(Point)>& field);

/// Directional first and second derivatives from a jet.
double directional(const Jet& jet, Point dir);
double directional2(const Jet& jet, Point a, Point b);

/// Default rules: degree 10 on triangles and 10 Gauss points on edges.
inline constexpr int kAssemblyDegree = 10;
inline constexpr int kEdgePoints = 10;

}  // namespace kplate
