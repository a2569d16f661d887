#pragma once

#include <vector>

#include "kplate/mesh.hpp"

namespace kplate {

/// Quadrature rule on the reference triangle (0,0),(1,0),(0,1) or on [0,1].
/// For triangles `points` hold reference coordinates and the weights sum to
/// the reference area 1/2; for edges only `points[i].x` is used and the
/// weights sum to 1.
struct QuadratureRule {
  std::vector<Point> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// Physical points and weights of a reference rule mapped onto a triangle.
struct MappedRule {
  std::vector<Point> points;
  std::vector<double> weights;
};

inline constexpr int kMaxTriangleDegree = 20;
inline constexpr int kMaxEdgeDegree = 39;

/// Gauss-Legendre rule with `n` points on [0,1].
QuadratureRule gauss_legendre(int n);

/// Collapsed (Duffy) product of Gauss-Legendre rules, exact for total degree
/// `degree`. All weights are positive.
QuadratureRule triangle_quadrature(int degree);
QuadratureRule edge_quadrature(int degree);

MappedRule map_rule(const QuadratureRule& rule, const ElementGeometry& geometry);
/// Edge rule mapped to local edge `k` of the triangle (weights sum to the edge length).
MappedRule map_edge_rule(const QuadratureRule& rule, const ElementGeometry& geometry, int k);

}  // namespace kplate
