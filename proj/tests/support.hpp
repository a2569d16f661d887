#pragma once

// Independent helpers for the test suites: exact bivariate polynomials and
// brute-force mesh checks that do not reuse the library's topology code.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "kplate/argyris.hpp"
#include "kplate/mesh.hpp"

namespace testing_support {

using kplate::Jet;
using kplate::Point;

/// sum c[i][j] x^i y^j with i + j <= degree.
struct Poly {
  int degree = 0;
  std::map<std::pair<int, int>, double> c;

  static Poly random(int degree, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Poly p;
    p.degree = degree;
    for (int i = 0; i <= degree; ++i)
      for (int j = 0; i + j <= degree; ++j) p.c[{i, j}] = u(rng);
    return p;
  }

  static Poly monomial(int i, int j, double coeff = 1.0) {
    Poly p;
    p.degree = i + j;
    p.c[{i, j}] = coeff;
    return p;
  }

  /// d^a/dx^a d^b/dy^b at p.
  double derivative(int a, int b, Point p) const {
    double s = 0.0;
    for (const auto& [ij, coeff] : c) {
      const auto [i, j] = ij;
      if (i < a || j < b) continue;
      double f = coeff;
      for (int k = 0; k < a; ++k) f *= i - k;
      for (int k = 0; k < b; ++k) f *= j - k;
      s += f * std::pow(p.x, i - a) * std::pow(p.y, j - b);
    }
    return s;
  }

  double operator()(Point p) const { return derivative(0, 0, p); }

  Jet jet(Point p) const {
    static constexpr std::array<std::array<int, 2>, kplate::kNumDerivatives> order{{{0, 0},
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
    Jet j{};
    for (int k = 0; k < kplate::kNumDerivatives; ++k) j[k] = derivative(order[k][0], order[k][1], p);
    return j;
  }
};

inline double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

/// Exact integral of x^a y^b over the reference triangle (0,0),(1,0),(0,1).
inline double reference_monomial_integral(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

/// Every edge of the triangle list, counted by brute-force pairing.
inline std::map<std::pair<int, int>, int> edge_multiplicity(const kplate::Mesh& mesh) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : mesh.triangles())
    for (int k = 0; k < 3; ++k) {
      const int a = t[k];
      const int b = t[(k + 1) % 3];
      ++count[{std::min(a, b), std::max(a, b)}];
    }
  return count;
}

/// Number of vertices lying strictly inside some triangle edge.
inline int count_hanging_nodes(const kplate::Mesh& mesh) {
  int hanging = 0;
  const auto& v = mesh.vertices();
  const auto edges = edge_multiplicity(mesh);
  for (const auto& [e, mult] : edges) {
    const Point a = v[e.first];
    const Point b = v[e.second];
    const Point d = b - a;
    const double len2 = kplate::dot(d, d);
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (static_cast<int>(k) == e.first || static_cast<int>(k) == e.second) continue;
      const Point r = v[k] - a;
      const double t = kplate::dot(r, d) / len2;
      if (t <= 1e-12 || t >= 1.0 - 1e-12) continue;
      if (std::abs(kplate::cross(d, r)) <= 1e-12 * len2) ++hanging;
    }
  }
  return hanging;
}

/// Edges used once must lie on the boundary of the unit square.
inline bool single_edges_on_unit_square_boundary(const kplate::Mesh& mesh) {
  const auto& v = mesh.vertices();
  for (const auto& [e, mult] : edge_multiplicity(mesh)) {
    if (mult > 2) return false;
    if (mult == 2) continue;
    const Point a = v[e.first];
    const Point b = v[e.second];
    const bool vertical = a.x == b.x && (a.x == 0.0 || a.x == 1.0);
    const bool horizontal = a.y == b.y && (a.y == 0.0 || a.y == 1.0);
    if (!vertical && !horizontal) return false;
  }
  return true;
}

inline bool is_conforming_unit_square(const kplate::Mesh& mesh) {
  return count_hanging_nodes(mesh) == 0 && single_edges_on_unit_square_boundary(mesh);
}

/// Uniform random point inside a triangle.
inline Point random_point_in(const std::array<Point, 3>& t, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r1 = u(rng);
  double r2 = u(rng);
  if (r1 + r2 > 1.0) {
    r1 = 1.0 - r1;
    r2 = 1.0 - r2;
  }
  return t[0] + r1 * (t[1] - t[0]) + r2 * (t[2] - t[0]);
}

}  // namespace testing_support
