#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "kplate/assembly.hpp"
#include "support.hpp"

using namespace kplate;
using testing_support::random_point_in;

namespace {

std::shared_ptr<const Discretization> square_space(int n) {
  return std::make_shared<const Discretization>(std::make_shared<const Mesh>(build_structured_unit_square(n)));
}

ObstacleProblem contact_problem(double eps) {
  ObstacleProblem p;
  p.plate = PlateModel(1.0, 0.3, 1.0);
  p.load = [](Point x) { return -10.0 + 3.0 * x.x; };
  p.obstacle = [](Point x) { return -0.001 - 0.01 * x.y; };
  p.compliance = eps;
  p.stabilisation = 1e-3;
  return p;
}

/// Contact pattern with every other quadrature point active.
ContactState alternating(const Discretization& space) {
  ContactState s = empty_contact(space);
  for (std::size_t t = 0; t < s.in_contact.size(); ++t)
    for (std::size_t q = 0; q < s.in_contact[t].size(); ++q) s.in_contact[t][q] = (t + q) % 2 == 0 ? 1 : 0;
  return s;
}

/// Nitsche system obtained by eliminating the multiplier pointwise from the
/// stabilised mixed form, assembled densely over all DOFs and then restricted.
LinearSystem dense_mixed_oracle(const ObstacleProblem& p, const ContactState& contact, const Discretization& space) {
  const int n = space.num_dofs();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  const double d = p.plate.bending_stiffness();
  const double nu = p.plate.poisson();
  for (std::size_t t = 0; t < space.elements().size(); ++t) {
    const ElementQuadrature& e = space.elements()[t];
    const auto& dofs = space.layout().element_dofs[t];
    const double h = p.stabilisation * std::pow(e.diameter(), 4);
    for (std::size_t q = 0; q < e.points.size(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      const double w = e.weights[q];
      const double f = p.load(e.points[q]);
      Eigen::VectorXd phi = Eigen::VectorXd::Zero(n), aphi = phi, xx = phi, xy = phi, yy = phi;
      for (int j = 0; j < kLocalDofs; ++j) {
        phi(dofs[j]) += e.value(qi, j);
        aphi(dofs[j]) += d * e.bilaplacian(qi, j);
        xx(dofs[j]) += e.dxx(qi, j);
        xy(dofs[j]) += e.dxy(qi, j);
        yy(dofs[j]) += e.dyy(qi, j);
      }
      // a(w, v) = D int (1 - nu) Hess w : Hess v + nu Lap w Lap v
      k += w * d *
           ((1 - nu) * (xx * xx.transpose() + 2 * xy * xy.transpose() + yy * yy.transpose()) +
            nu * (xx + yy) * (xx + yy).transpose());
      k -= w * h * aphi * aphi.transpose();
      r += w * f * (phi - h * aphi);
      if (contact.in_contact[t][q]) {
        // lambda = (g - B w - H f) / (eps + H) with B = phi - H A phi.
        const double beta = 1.0 / (p.compliance + h);
        const Eigen::VectorXd b = phi - h * aphi;
        const double g = (*p.obstacle)(e.points[q]);
        k += w * beta * b * b.transpose();
        r += w * beta * (g - h * f) * b;
      }
    }
  }
  const ConstraintPartition& c = space.constraints();
  LinearSystem out;
  Eigen::MatrixXd kr(c.num_free(), c.num_free());
  for (int i = 0; i < c.num_free(); ++i)
    for (int j = 0; j < c.num_free(); ++j) kr(i, j) = k(c.free_dofs[i], c.free_dofs[j]);
  out.matrix = kr.sparseView();
  out.rhs = c.restrict(r);
  return out;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("clamped constraints leave 18 free DOFs on the 2x2 square") {
  const auto space = square_space(2);
  const Mesh& m = space->mesh();
  // Interior vertex: 6, each interior edge: 1, each non-corner boundary vertex: u_nn only.
  int expected = 0;
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    const Point p = m.vertices()[v];
    const bool corner = (p.x == 0 || p.x == 1) && (p.y == 0 || p.y == 1);
    if (!m.is_boundary_vertex(static_cast<int>(v)))
      expected += 6;
    else if (!corner)
      expected += 1;
  }
  for (std::size_t e = 0; e < m.num_edges(); ++e) expected += m.is_boundary_edge(static_cast<int>(e)) ? 0 : 1;
  CHECK(expected == 18);
  CHECK(space->constraints().num_free() == 18);
  CHECK(space->constraints().num_constrained() == 70 - 18);
  CHECK(space->num_dofs() == 70);
}

TEST_CASE("free fields satisfy the clamped conditions on the boundary") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (const Mesh& mesh : {build_structured_unit_square(3),
                           rgb_refine(build_structured_unit_square(3), std::vector<int>{0, 7, 12})}) {
    const Discretization space(std::make_shared<const Mesh>(mesh));
    Eigen::VectorXd free(space.constraints().num_free());
    for (int i = 0; i < free.size(); ++i) free(i) = nd(rng);
    const Eigen::VectorXd dofs = space.constraints().expand(free);
    CHECK(space.constraints().restrict(dofs) == free);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
      if (!mesh.is_boundary_edge(static_cast<int>(e))) continue;
      const int tri = mesh.edge_triangles(static_cast<int>(e))[0];
      const ArgyrisElement& el = space.elements()[tri].element;
      const auto [a, b] = mesh.edges()[e];
      for (int s = 0; s < 5; ++s) {
        const double w = u(rng);
        const Point x = (1 - w) * mesh.vertices()[a] + w * mesh.vertices()[b];
        const Jet j = el.evaluate(gather(space.layout(), tri, dofs), x);
        CHECK(std::abs(j[deriv::u]) <= 1e-10);
        CHECK(std::abs(j[deriv::x]) <= 1e-10);
        CHECK(std::abs(j[deriv::y]) <= 1e-10);
      }
    }
  }
}

TEST_CASE("reaction force formula") {
  ObstacleProblem p;
  p.compliance = 0.5;
  p.stabilisation = 1.0;
  CHECK(reaction_force(p, 1.0, 1.0, 0.0, 0.0, 0.0) == doctest::Approx(1.0 / 1.5));
  CHECK(reaction_force(p, 1.0, -1.0, 0.0, 0.0, 0.0) == 0.0);
  // (g - w + H (A - f)) / (eps + H) with H = 16.
  CHECK(reaction_force(p, 2.0, 0.1, 0.5, 0.2, 0.7) == doctest::Approx((0.1 - 0.2 + 16 * 0.2) / 16.5));
  p.compliance = 0.0;
  p.stabilisation = 1e-5;
  CHECK(reaction_force(p, 0.1, 0.0, -10.0, -1e-3, 0.0) == doctest::Approx((1e-3 + 1e-9 * 10) / 1e-9));
}

TEST_CASE("contact state of a deep obstacle is empty") {
  const auto space = square_space(3);
  ObstacleProblem p = contact_problem(1e-3);
  p.obstacle = [](Point) { return -1e3; };
  const ContactState s = contact_state(p, *space, Eigen::VectorXd::Zero(space->num_dofs()));
  CHECK(s.count() == 0);
  p.obstacle = [](Point) { return 1.0; };
  const ContactState full = contact_state(p, *space, Eigen::VectorXd::Zero(space->num_dofs()));
  std::size_t total = 0;
  for (const auto& e : space->elements()) total += e.points.size();
  CHECK(full.count() == total);
  p.obstacle.reset();
  CHECK(contact_state(p, *space, Eigen::VectorXd::Zero(space->num_dofs())).count() == 0);
}

TEST_CASE("Nitsche system matches the eliminated mixed form") {
  const auto space = square_space(2);
  for (double eps : {0.0, 1e-3, 0.5}) {
    const ObstacleProblem p = contact_problem(eps);
    for (const ContactState& c : {empty_contact(*space), alternating(*space)}) {
      const LinearSystem sys = assemble_nitsche(p, c, *space);
      const LinearSystem oracle = dense_mixed_oracle(p, c, *space);
      const Eigen::MatrixXd a = sys.matrix, b = oracle.matrix;
      CHECK(max_abs(a - b) <= 1e-9 * max_abs(b));
      CHECK((sys.rhs - oracle.rhs).cwiseAbs().maxCoeff() <= 1e-9 * oracle.rhs.cwiseAbs().maxCoeff());
      CHECK(max_abs(a - a.transpose()) <= 1e-12 * max_abs(a));
    }
  }
}

TEST_CASE("Nitsche matrix is positive definite for the default alpha only") {
  const auto space = square_space(2);
  const auto min_eigenvalue = [&](double alpha, const ContactState& c) {
    ObstacleProblem p = contact_problem(1e-3);
    p.stabilisation = alpha;
    const Eigen::MatrixXd a = assemble_nitsche(p, c, *space).matrix;
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues().minCoeff();
  };
  CHECK(min_eigenvalue(1e-5, empty_contact(*space)) > 0.0);
  CHECK(min_eigenvalue(1e-5, alternating(*space)) > 0.0);
  // The stabilisation must stay below the inverse-estimate constant.
  CHECK(min_eigenvalue(1e-2, empty_contact(*space)) < 0.0);
}

TEST_CASE("energy matrix of a 3x3 mesh agrees with the dense oracle without stabilisation") {
  const auto space = square_space(3);
  ObstacleProblem p = contact_problem(0.0);
  p.stabilisation = 1e-300;
  const Eigen::MatrixXd k = assemble_energy(p.plate, *space);
  const Eigen::MatrixXd oracle = dense_mixed_oracle(p, empty_contact(*space), *space).matrix;
  CHECK(max_abs(k - oracle) <= 1e-10 * max_abs(oracle));
}

TEST_CASE("right-hand side is linear in load and obstacle; matrix does not depend on them") {
  const auto space = square_space(2);
  const ContactState c = alternating(*space);
  ObstacleProblem p1 = contact_problem(1e-2), p2 = contact_problem(1e-2), mix = contact_problem(1e-2);
  p2.load = [](Point x) { return std::sin(x.x) * x.y; };
  p2.obstacle = [](Point x) { return x.x * x.x - 0.3; };
  mix.load = [&](Point x) { return p1.load(x) + 2.0 * p2.load(x); };
  mix.obstacle = [&](Point x) { return (*p1.obstacle)(x) + 2.0 * (*p2.obstacle)(x); };
  const LinearSystem s1 = assemble_nitsche(p1, c, *space), s2 = assemble_nitsche(p2, c, *space),
                     sm = assemble_nitsche(mix, c, *space);
  CHECK((sm.rhs - s1.rhs - 2.0 * s2.rhs).cwiseAbs().maxCoeff() <= 1e-10 * sm.rhs.cwiseAbs().maxCoeff());
  CHECK(max_abs(Eigen::MatrixXd(s1.matrix) - Eigen::MatrixXd(s2.matrix)) == 0.0);
}

TEST_CASE("system is continuous as the compliance tends to zero") {
  const auto space = square_space(2);
  const ContactState c = alternating(*space);
  const LinearSystem rigid = assemble_nitsche(contact_problem(0.0), c, *space);
  const Eigen::MatrixXd r = rigid.matrix;
  double previous = INFINITY;
  for (double eps : {1e-6, 1e-9, 1e-12}) {
    const LinearSystem soft = assemble_nitsche(contact_problem(eps), c, *space);
    const double diff = max_abs(Eigen::MatrixXd(soft.matrix) - r) / max_abs(r);
    CHECK(diff < previous);
    previous = diff;
  }
  CHECK(previous <= 1e-8);
}

TEST_CASE("sparse solver") {
  LinearSystem id;
  id.matrix.resize(3, 3);
  id.matrix.setIdentity();
  id.rhs = Eigen::Vector3d(1, -2, 3);
  CHECK((solve(id) - id.rhs).norm() == 0.0);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd g(50, 50);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) g(i, j) = nd(rng);
  const Eigen::MatrixXd spd = g * g.transpose() + 50.0 * Eigen::MatrixXd::Identity(50, 50);
  LinearSystem s;
  s.matrix = spd.sparseView();
  s.rhs = Eigen::VectorXd::NullaryExpr(50, [&]() { return nd(rng); });
  const Eigen::VectorXd x = solve(s);
  CHECK((spd * x - s.rhs).norm() <= 1e-10 * s.rhs.norm());

  LinearSystem singular;
  singular.matrix.resize(2, 2);
  singular.matrix.insert(0, 0) = 1.0;
  singular.rhs = Eigen::Vector2d(1, 1);
  CHECK_THROWS_AS(solve(singular), SolverError);
  LinearSystem mismatched = id;
  mismatched.rhs = Eigen::Vector2d(1, 1);
  CHECK_THROWS_AS(solve(mismatched), SolverError);
}

TEST_CASE("stabilised Galerkin orthogonality for a manufactured clamped solution") {
  // u* = (x(1-x) y(1-y))^2, f = A(u*), no obstacle.
  const PlateModel plate(1.0, 0.3, 1.0);
  const double d = plate.bending_stiffness();
  auto p = [](double t) { return std::array<double, 5>{t * t * (1 - t) * (1 - t), 2 * t - 6 * t * t + 4 * t * t * t,
                                                       2 - 12 * t + 12 * t * t, -12 + 24 * t, 24.0}; };
  auto exact = [&](Point x) {
    const auto a = p(x.x), b = p(x.y);
    Jet j{};
    j[deriv::u] = a[0] * b[0];
    j[deriv::xx] = a[2] * b[0];
    j[deriv::xy] = a[1] * b[1];
    j[deriv::yy] = a[0] * b[2];
    j[deriv::xxxx] = a[4] * b[0];
    j[deriv::xxyy] = a[2] * b[2];
    j[deriv::yyyy] = a[0] * b[4];
    return j;
  };
  ObstacleProblem prob;
  prob.plate = plate;
  prob.stabilisation = 1e-3;
  prob.load = [&](Point x) { return biharmonic(plate, exact(x)); };

  const auto space = std::make_shared<const Discretization>(
      std::make_shared<const Mesh>(rgb_refine(build_structured_unit_square(3), std::vector<int>{4})));
  const LinearSystem sys = assemble_nitsche(prob, empty_contact(*space), *space);
  const Eigen::VectorXd uh = solve(sys);

  // a_h(u*, phi_i) by quadrature on the exact jets.
  const ConstraintPartition& c = space->constraints();
  Eigen::VectorXd au = Eigen::VectorXd::Zero(c.num_free());
  for (std::size_t t = 0; t < space->elements().size(); ++t) {
    const ElementQuadrature& e = space->elements()[t];
    const double h = prob.stabilisation * std::pow(e.diameter(), 4);
    for (std::size_t q = 0; q < e.points.size(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      const Jet u = exact(e.points[q]);
      for (int j = 0; j < kLocalDofs; ++j) {
        const int row = c.free_index[space->layout().element_dofs[t][j]];
        if (row < 0) continue;
        Jet v{};
        v[deriv::xx] = e.dxx(qi, j);
        v[deriv::xy] = e.dxy(qi, j);
        v[deriv::yy] = e.dyy(qi, j);
        au(row) += e.weights[q] * (energy_density(plate, u, v) - h * biharmonic(plate, u) * d * e.bilaplacian(qi, j));
      }
    }
  }
  const Eigen::MatrixXd k = sys.matrix;
  const Eigen::VectorXd residual = au - k * uh;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(c.num_free(), [&]() { return nd(rng); });
    CHECK(std::abs(v.dot(residual)) <= 1e-10 * v.norm() * au.norm());
  }
}
