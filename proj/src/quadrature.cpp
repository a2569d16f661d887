#include "kplate/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace kplate {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("Gauss-Legendre rule needs at least one point");
  QuadratureRule rule;
  rule.degree = 2 * n - 1;
  rule.points.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  // Newton iteration on P_n from the Chebyshev-like initial guess.
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    // Map from [-1,1] to [0,1], ascending order.
    const int slot = n - 1 - i;
    rule.points[slot] = {0.5 * (x + 1.0), 0.0};
    rule.weights[slot] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

QuadratureRule triangle_quadrature(int degree) {
  if (degree < 1 || degree > kMaxTriangleDegree)
    throw InvalidArgument("unsupported triangle quadrature degree " + std::to_string(degree));
  // x = u, y = (1-u) v, dx dy = (1-u) du dv: degree+1 in u, degree in v.
  const QuadratureRule gu = gauss_legendre((degree + 3) / 2);
  const QuadratureRule gv = gauss_legendre((degree + 2) / 2);
  QuadratureRule rule;
  rule.degree = degree;
  for (std::size_t i = 0; i < gu.size(); ++i) {
    const double u = gu.points[i].x;
    for (std::size_t j = 0; j < gv.size(); ++j) {
      const double v = gv.points[j].x;
      rule.points.push_back({u, (1.0 - u) * v});
      rule.weights.push_back(gu.weights[i] * gv.weights[j] * (1.0 - u));
    }
  }
  return rule;
}

QuadratureRule edge_quadrature(int degree) {
  if (degree < 1 || degree > kMaxEdgeDegree)
    throw InvalidArgument("unsupported edge quadrature degree " + std::to_string(degree));
  QuadratureRule rule = gauss_legendre((degree + 2) / 2);
  rule.degree = degree;
  return rule;
}

MappedRule map_rule(const QuadratureRule& rule, const ElementGeometry& geometry) {
  MappedRule mapped;
  mapped.points.reserve(rule.size());
  mapped.weights.reserve(rule.size());
  const double jac = 2.0 * geometry.area;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    mapped.points.push_back(geometry.map_from_reference(rule.points[q].x, rule.points[q].y));
    mapped.weights.push_back(rule.weights[q] * jac);
  }
  return mapped;
}

MappedRule map_edge_rule(const QuadratureRule& rule, const ElementGeometry& geometry, int k) {
  const Point a = geometry.vertices[k];
  const Point b = geometry.vertices[(k + 1) % 3];
  const double len = geometry.edges[k].length;
  MappedRule mapped;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double t = rule.points[q].x;
    mapped.points.push_back(a + t * (b - a));
    mapped.weights.push_back(rule.weights[q] * len);
  }
  return mapped;
}

}  // namespace kplate
