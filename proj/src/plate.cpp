#include "kplate/plate.hpp"

#include <string>

namespace kplate {

PlateModel::PlateModel(double young, double poisson, double thickness)
    : young_(young), poisson_(poisson), thickness_(thickness) {
  if (!(young > 0.0)) throw InvalidArgument("Young's modulus must be positive");
  if (!(poisson >= 0.0 && poisson < 0.5)) throw InvalidArgument("Poisson ratio must lie in [0, 0.5)");
  if (!(thickness > 0.0)) throw InvalidArgument("plate thickness must be positive");
  stiffness_ = young * thickness * thickness * thickness / (12.0 * (1.0 - poisson * poisson));
}

Sym2 hessian_of(const Jet& jet) { return {jet[deriv::xx], jet[deriv::xy], jet[deriv::yy]}; }

Sym2 moment_tensor(const PlateModel& model, const Sym2& hessian) {
  const double d = model.thickness();
  const double nu = model.poisson();
  // Curvature is -Hess u; C(A) = E/(1+nu) (A + nu/(1-nu) tr(A) I).
  const double c = -d * d * d / 12.0 * model.young() / (1.0 + nu);
  const double trace = nu / (1.0 - nu) * (hessian.xx + hessian.yy);
  return {c * (hessian.xx + trace), c * hessian.xy, c * (hessian.yy + trace)};
}

double biharmonic(const PlateModel& model, const Jet& jet) {
  return model.bending_stiffness() * (jet[deriv::xxxx] + 2.0 * jet[deriv::xxyy] + jet[deriv::yyyy]);
}

namespace {

/// dM/dx and dM/dy, using linearity of M in the Hessian.
std::pair<Sym2, Sym2> moment_gradient(const PlateModel& model, const Jet& jet) {
  const Sym2 hx{jet[deriv::xxx], jet[deriv::xxy], jet[deriv::xyy]};
  const Sym2 hy{jet[deriv::xxy], jet[deriv::xyy], jet[deriv::yyy]};
  return {moment_tensor(model, hx), moment_tensor(model, hy)};
}

}  // namespace

Point shear_force(const PlateModel& model, const Jet& jet) {
  const auto [mx, my] = moment_gradient(model, jet);
  return {mx.xx + my.xy, mx.xy + my.yy};
}

EdgeForces edge_forces(const PlateModel& model, const Jet& jet, Point n, Point s) {
  const Sym2 m = moment_tensor(model, hessian_of(jet));
  const auto [mx, my] = moment_gradient(model, jet);
  const Sym2 ms{s.x * mx.xx + s.y * my.xx, s.x * mx.xy + s.y * my.xy, s.x * mx.yy + s.y * my.yy};
  EdgeForces f;
  f.normal_moment = m.contract(n, n);
  f.twisting_moment = m.contract(s, n);
  f.normal_shear = dot(shear_force(model, jet), n);
  f.kirchhoff_shear = f.normal_shear + ms.contract(s, n);
  return f;
}

double energy_density(const PlateModel& model, const Jet& w, const Jet& v) {
  const Sym2 m = moment_tensor(model, hessian_of(w));
  return -(m.xx * v[deriv::xx] + 2.0 * m.xy * v[deriv::xy] + m.yy * v[deriv::yy]);
}

JumpProfile edge_jumps(const Mesh& mesh, const DofLayout& layout, const PlateModel& model, const Eigen::VectorXd& dofs,
                       int edge, int num_points) {
  if (edge < 0 || static_cast<std::size_t>(edge) >= mesh.num_edges())
    throw InvalidArgument("edge id " + std::to_string(edge) + " out of range");
  if (mesh.is_boundary_edge(edge)) throw InvalidArgument("jumps are only defined on interior edges");
  const auto [t0, t1] = mesh.edge_triangles(edge);
  const ArgyrisElement e0 = make_element(mesh, layout, t0);
  const ArgyrisElement e1 = make_element(mesh, layout, t1);
  const LocalVector c0 = gather(layout, t0, dofs);
  const LocalVector c1 = gather(layout, t1, dofs);

  int k0 = 0;
  while (mesh.triangle_edges(t0)[k0] != edge) ++k0;
  const Point n = e0.geometry().edges[k0].normal;
  const Point s = e0.geometry().edges[k0].tangent;

  const auto [a, b] = mesh.edges()[edge];
  const Point pa = mesh.vertices()[a];
  const Point pb = mesh.vertices()[b];
  const QuadratureRule rule = gauss_legendre(num_points);
  const double length = norm(pb - pa);

  JumpProfile out;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Point p = pa + rule.points[q].x * (pb - pa);
    const EdgeForces f0 = edge_forces(model, e0.evaluate(c0, p), n, s);
    const EdgeForces f1 = edge_forces(model, e1.evaluate(c1, p), -1.0 * n, -1.0 * s);
    out.points.push_back(p);
    out.weights.push_back(rule.weights[q] * length);
    out.moment_jump.push_back(f0.normal_moment - f1.normal_moment);
    out.shear_jump.push_back(f0.kirchhoff_shear + f1.kirchhoff_shear);
  }
  return out;
}

double energy_inner_product(const Mesh& mesh, const DofLayout& layout, const PlateModel& model,
                            const Eigen::VectorXd& w, const Eigen::VectorXd& v) {
  const QuadratureRule rule = triangle_quadrature(kAssemblyDegree);
  double sum = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
    const ArgyrisElement element = make_element(mesh, layout, t);
    const LocalVector cw = gather(layout, t, w);
    const LocalVector cv = gather(layout, t, v);
    const MappedRule mapped = map_rule(rule, element.geometry());
    for (std::size_t q = 0; q < mapped.points.size(); ++q) {
      sum += mapped.weights[q] *
             energy_density(model, element.evaluate(cw, mapped.points[q]), element.evaluate(cv, mapped.points[q]));
    }
  }
  return sum;
}

}  // namespace kplate
