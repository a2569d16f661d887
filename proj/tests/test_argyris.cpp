#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "kplate/argyris.hpp"
#include "support.hpp"

using namespace kplate;
using testing_support::Poly;
using testing_support::random_point_in;

namespace {

/// The 21 functionals of one element applied to column j of tabulated shape functions.
LocalVector functionals_of_column(const ArgyrisElement& el, int j) {
  LocalVector out;
  const auto& g = el.geometry();
  for (int k = 0; k < 3; ++k) {
    const DerivativeTable t = el.evaluate(g.vertices[k]);
    const VertexFrame& f = el.frames()[k];
    const double ux = t(deriv::x, j), uy = t(deriv::y, j);
    const double uxx = t(deriv::xx, j), uxy = t(deriv::xy, j), uyy = t(deriv::yy, j);
    auto d1 = [&](Point a) { return a.x * ux + a.y * uy; };
    auto d2 = [&](Point a, Point b) { return a.x * b.x * uxx + (a.x * b.y + a.y * b.x) * uxy + a.y * b.y * uyy; };
    out.segment<6>(6 * k) << t(deriv::u, j), d1(f.a), d1(f.b), d2(f.a, f.a), d2(f.a, f.b), d2(f.b, f.b);
  }
  for (int k = 0; k < 3; ++k) {
    const DerivativeTable t = el.evaluate(g.edges[k].midpoint);
    const Point n = el.edge_normals()[k];
    out(18 + k) = n.x * t(deriv::x, j) + n.y * t(deriv::y, j);
  }
  return out;
}

ArgyrisElement rotated_element() {
  const double c = std::cos(0.3), s = std::sin(0.3);
  const VertexFrame rot{{c, s}, {-s, c}};
  const ElementGeometry g = element_geometry({Point{0.1, 0.2}, Point{0.9, 0.35}, Point{0.4, 0.8}});
  std::array<Point, 3> normals{};
  for (int k = 0; k < 3; ++k) normals[k] = k == 1 ? -1.0 * g.edges[k].normal : g.edges[k].normal;
  return ArgyrisElement(g, {VertexFrame{}, rot, VertexFrame{}}, normals);
}

Jet smooth_field(Point p) {
  // u = exp(x) sin(2y)
  const double e = std::exp(p.x), s = std::sin(2 * p.y), c = std::cos(2 * p.y);
  Jet j{};
  j[deriv::u] = e * s;
  j[deriv::x] = e * s;
  j[deriv::y] = 2 * e * c;
  j[deriv::xx] = e * s;
  j[deriv::xy] = 2 * e * c;
  j[deriv::yy] = -4 * e * s;
  j[deriv::xxx] = e * s;
  j[deriv::xxy] = 2 * e * c;
  j[deriv::xyy] = -4 * e * s;
  j[deriv::yyy] = -8 * e * c;
  j[deriv::xxxx] = e * s;
  j[deriv::xxxy] = 2 * e * c;
  j[deriv::xxyy] = -4 * e * s;
  j[deriv::xyyy] = -8 * e * c;
  j[deriv::yyyy] = 16 * e * s;
  return j;
}

/// Squared H2 seminorm of interpolation error on a mesh.
double h2_error_squared(const Mesh& mesh) {
  const DofLayout layout = build_dof_layout(mesh);
  const Eigen::VectorXd dofs = interpolate(mesh, layout, smooth_field);
  const QuadratureRule rule = triangle_quadrature(14);
  double err = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const ArgyrisElement el = make_element(mesh, layout, static_cast<int>(t));
    const LocalVector c = gather(layout, static_cast<int>(t), dofs);
    const MappedRule r = map_rule(rule, el.geometry());
    for (std::size_t q = 0; q < r.weights.size(); ++q) {
      const Jet uh = el.evaluate(c, r.points[q]);
      const Jet u = smooth_field(r.points[q]);
      const double exx = uh[deriv::xx] - u[deriv::xx];
      const double exy = uh[deriv::xy] - u[deriv::xy];
      const double eyy = uh[deriv::yy] - u[deriv::yy];
      err += r.weights[q] * (exx * exx + 2 * exy * exy + eyy * eyy);
    }
  }
  return err;
}

}  // namespace

TEST_CASE("global DOF counts and sharing") {
  CHECK(build_dof_layout(build_structured_unit_square(1)).num_dofs() == 29);
  CHECK(build_dof_layout(build_structured_unit_square(2)).num_dofs() == 70);

  const Mesh m = build_structured_unit_square(3);
  const DofLayout layout = build_dof_layout(m);
  std::set<int> used;
  for (const auto& dofs : layout.element_dofs) used.insert(dofs.begin(), dofs.end());
  CHECK(used.size() == static_cast<std::size_t>(layout.num_dofs()));
  // Two triangles sharing an edge reference the same edge DOF and the same vertex DOFs.
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    const auto [t0, t1] = m.edge_triangles(static_cast<int>(e));
    if (t1 < 0) continue;
    const auto has = [&](int tri, int dof) {
      const auto& d = layout.element_dofs[tri];
      return std::find(d.begin(), d.end(), dof) != d.end();
    };
    const int edof = layout.edge_dof(static_cast<int>(e));
    CHECK(has(t0, edof));
    CHECK(has(t1, edof));
    for (int v : m.edges()[e])
      for (int c = 0; c < kVertexDofs; ++c) {
        CHECK(has(t0, layout.vertex_dof(v, c)));
        CHECK(has(t1, layout.vertex_dof(v, c)));
      }
  }
}

TEST_CASE("edge normals are unit and follow the low-to-high tangent rotated clockwise") {
  const Mesh m = uniform_refine(build_structured_unit_square(2));
  const DofLayout layout = build_dof_layout(m);
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    const auto [lo, hi] = m.edges()[e];
    const Point t = m.vertices()[hi] - m.vertices()[lo];
    const Point n = layout.edge_normals[e];
    CHECK(norm(n) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(dot(n, t) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(cross(t, n) < 0.0);
  }
  for (const VertexFrame& f : layout.frames) {
    CHECK(dot(f.a, f.b) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(cross(f.a, f.b) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("shape functions are dual to the DOF functionals") {
  const ArgyrisElement el = rotated_element();
  for (int j = 0; j < kLocalDofs; ++j) {
    const LocalVector f = functionals_of_column(el, j);
    for (int i = 0; i < kLocalDofs; ++i) CHECK(std::abs(f(i) - (i == j ? 1.0 : 0.0)) <= 1e-10);
  }
  // The value functional at vertex 0: 1 there, 0 at the other vertices.
  const DerivativeTable t0 = el.evaluate(el.geometry().vertices[0]);
  const DerivativeTable t1 = el.evaluate(el.geometry().vertices[1]);
  CHECK(t0(deriv::u, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(t1(deriv::u, 0)) <= 1e-12);
}

TEST_CASE("quintic polynomials are reproduced exactly with all derivatives") {
  std::mt19937_64 rng(7);
  const ArgyrisElement el = rotated_element();
  for (int trial = 0; trial < 5; ++trial) {
    const Poly p = trial == 0 ? Poly::monomial(5, 0) : Poly::random(5, rng);
    const LocalVector c = el.apply_functionals([&](Point x) { return p.jet(x); });
    for (int s = 0; s < 50; ++s) {
      const Point x = random_point_in(el.geometry().vertices, rng);
      const Jet got = el.evaluate(c, x);
      const Jet want = p.jet(x);
      for (int r = 0; r < kNumDerivatives; ++r) CHECK(std::abs(got[r] - want[r]) <= 1e-9 * (1.0 + std::abs(want[r])));
    }
  }
}

TEST_CASE("global interpolation of a quintic is exact on every element") {
  std::mt19937_64 rng(8);
  const Poly p = Poly::random(5, rng);
  const Mesh m = rgb_refine(build_structured_unit_square(3), std::vector<int>{4, 9});
  const DofLayout layout = build_dof_layout(m);
  const Eigen::VectorXd dofs = interpolate(m, layout, [&](Point x) { return p.jet(x); });
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const ArgyrisElement el = make_element(m, layout, static_cast<int>(t));
    const LocalVector c = gather(layout, static_cast<int>(t), dofs);
    for (int s = 0; s < 5; ++s) {
      const Point x = random_point_in(el.geometry().vertices, rng);
      const Jet got = el.evaluate(c, x);
      const Jet want = p.jet(x);
      for (int r = 0; r < 6; ++r) CHECK(std::abs(got[r] - want[r]) <= 1e-8 * (1.0 + std::abs(want[r])));
    }
  }
}

TEST_CASE("value shape functions form a partition of unity") {
  std::mt19937_64 rng(9);
  const ArgyrisElement el = rotated_element();
  for (int s = 0; s < 30; ++s) {
    const Point x = random_point_in(el.geometry().vertices, rng);
    const DerivativeTable t = el.evaluate(x);
    for (int r = 0; r < kNumDerivatives; ++r) {
      const double sum = t(r, 0) + t(r, 6) + t(r, 12);
      CHECK(std::abs(sum - (r == deriv::u ? 1.0 : 0.0)) <= 1e-8);
    }
  }
}

TEST_CASE("fourth derivatives are affine and derivatives match finite differences") {
  std::mt19937_64 rng(10);
  const ArgyrisElement el = rotated_element();
  const auto& v = el.geometry().vertices;
  const Point a = random_point_in(v, rng);
  const Point b = random_point_in(v, rng);
  const DerivativeTable ta = el.evaluate(a), tb = el.evaluate(b), tm = el.evaluate(0.5 * (a + b));
  for (int r = deriv::xxxx; r <= deriv::yyyy; ++r)
    for (int j = 0; j < kLocalDofs; ++j)
      CHECK(std::abs(tm(r, j) - 0.5 * (ta(r, j) + tb(r, j))) <= 1e-7 * (1.0 + std::abs(tm(r, j))));

  // Row pairs (f, f_x) and (f, f_y), central differences.
  const double h = 1e-5;
  const Point c = el.geometry().centroid();
  const DerivativeTable tc = el.evaluate(c);
  const DerivativeTable px = el.evaluate(c + Point{h, 0}), mx = el.evaluate(c - Point{h, 0});
  const DerivativeTable py = el.evaluate(c + Point{0, h}), my = el.evaluate(c - Point{0, h});
  const std::array<std::array<int, 3>, 5> chain{{{deriv::u, deriv::x, deriv::y},
                                                 {deriv::x, deriv::xx, deriv::xy},
                                                 {deriv::yy, deriv::xyy, deriv::yyy},
                                                 {deriv::xxy, deriv::xxxy, deriv::xxyy},
                                                 {deriv::xyy, deriv::xxyy, deriv::xyyy}}};
  for (const auto& [f, fx, fy] : chain)
    for (int j = 0; j < kLocalDofs; ++j) {
      const double scale = 1.0 + std::abs(tc(fx, j)) + std::abs(tc(fy, j));
      CHECK(std::abs((px(f, j) - mx(f, j)) / (2 * h) - tc(fx, j)) <= 1e-5 * scale);
      CHECK(std::abs((py(f, j) - my(f, j)) / (2 * h) - tc(fy, j)) <= 1e-5 * scale);
    }
}

TEST_CASE("random global fields are C1 across interior edges") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd;
  const Mesh m = rgb_refine(build_structured_unit_square(3), std::vector<int>{5, 11});
  const DofLayout layout = build_dof_layout(m);
  Eigen::VectorXd dofs(layout.num_dofs());
  for (int i = 0; i < dofs.size(); ++i) dofs(i) = nd(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    const auto [t0, t1] = m.edge_triangles(static_cast<int>(e));
    if (t1 < 0) continue;
    const ArgyrisElement e0 = make_element(m, layout, t0), e1 = make_element(m, layout, t1);
    const LocalVector c0 = gather(layout, t0, dofs), c1 = gather(layout, t1, dofs);
    const auto [a, b] = m.edges()[e];
    for (int s = 0; s < 4; ++s) {
      const double w = u(rng);
      const Point x = (1 - w) * m.vertices()[a] + w * m.vertices()[b];
      const Jet j0 = e0.evaluate(c0, x), j1 = e1.evaluate(c1, x);
      for (int r : {int(deriv::u), int(deriv::x), int(deriv::y)})
        CHECK(std::abs(j0[r] - j1[r]) <= 1e-8 * (1.0 + std::abs(j0[r])));
    }
  }
}

TEST_CASE("interpolation error in the H2 seminorm decays like h^4") {
  const Mesh m4 = build_structured_unit_square(4);
  const Mesh m8 = uniform_refine(m4);
  const Mesh m16 = uniform_refine(m8);
  const double e4 = std::sqrt(h2_error_squared(m4));
  const double e8 = std::sqrt(h2_error_squared(m8));
  const double e16 = std::sqrt(h2_error_squared(m16));
  CHECK(std::log2(e4 / e8) >= 3.7);
  CHECK(std::log2(e8 / e16) >= 3.8);
  CHECK(std::log2(e8 / e16) <= 4.3);
}

TEST_CASE("directional derivative helpers") {
  Jet j{};
  j[deriv::x] = 2.0;
  j[deriv::y] = -1.0;
  j[deriv::xx] = 3.0;
  j[deriv::xy] = 0.5;
  j[deriv::yy] = -2.0;
  CHECK(directional(j, {0.6, 0.8}) == doctest::Approx(0.4));
  // a^T H b with a = (1,0), b = (0,1).
  CHECK(directional2(j, {1, 0}, {0, 1}) == doctest::Approx(0.5));
  CHECK(directional2(j, {0.6, 0.8}, {0.6, 0.8}) == doctest::Approx(0.36 * 3 + 2 * 0.48 * 0.5 - 0.64 * 2));
}

TEST_CASE("degenerate elements are rejected") {
  ElementGeometry g;
  g.vertices = {Point{0, 0}, Point{1, 0}, Point{2, 0}};
  g.diameter = 2.0;
  g.area = 0.0;
  CHECK_THROWS_AS(ArgyrisElement(g, {}, {}), InvalidArgument);
}
