#pragma once

#include <Eigen/Core>

#include <vector>

#include "kplate/argyris.hpp"
#include "kplate/mesh.hpp"

namespace kplate {

/// Isotropic Kirchhoff-Love plate material.
class PlateModel {
 public:
  /// Young's modulus, Poisson ratio in [0, 0.5), thickness.
  PlateModel(double young, double poisson, double thickness);

  double young() const { return young_; }
  double poisson() const { return poisson_; }
  double thickness() const { return thickness_; }
  /// Bending stiffness E d^3 / (12 (1 - nu^2)).
  double bending_stiffness() const { return stiffness_; }

 private:
  double young_;
  double poisson_;
  double thickness_;
  double stiffness_;
};

/// Symmetric 2x2 tensor.
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  /// a . T b
  double contract(Point a, Point b) const { return a.x * (xx * b.x + xy * b.y) + a.y * (xy * b.x + yy * b.y); }
};

/// A displacement jet at a location.
struct PointState {
  Point at;
  Jet jet{};
};

/// Bending moment M = (d^3/12) C(-Hess u) for a Hessian (xx, xy, yy).
Sym2 moment_tensor(const PlateModel& model, const Sym2& hessian);
Sym2 hessian_of(const Jet& jet);

/// A(u) = D (u_xxxx + 2 u_xxyy + u_yyyy).
double biharmonic(const PlateModel& model, const Jet& jet);

/// Shear force Q = Div M(u).
Point shear_force(const PlateModel& model, const Jet& jet);

struct EdgeForces {
  double normal_moment = 0.0;    ///< M_nn
  double twisting_moment = 0.0;  ///< M_ns
  double normal_shear = 0.0;     ///< Q_n
  double kirchhoff_shear = 0.0;  ///< V_n = Q_n + d(M_ns)/ds
};

/// Edge quantities for normal `n` and tangent `s`.
EdgeForces edge_forces(const PlateModel& model, const Jet& jet, Point n, Point s);

/// Pointwise M:K integrand of a(w, v).
double energy_density(const PlateModel& model, const Jet& w, const Jet& v);

struct JumpProfile {
  std::vector<Point> points;
  std::vector<double> weights;
  std::vector<double> moment_jump;  ///< [[M_nn]]
  std::vector<double> shear_jump;   ///< [[V_n]]
};

/// Jumps of M_nn and V_n across interior edge `edge`, at `num_points` Gauss
/// points. Each side uses its own outward normal.
JumpProfile edge_jumps(const Mesh& mesh, const DofLayout& layout, const PlateModel& model, const Eigen::VectorXd& dofs,
                       int edge, int num_points);

/// a(w, v) = sum_K int_K M(w) : K(v).
double energy_inner_product(const Mesh& mesh, const DofLayout& layout, const PlateModel& model,
                            const Eigen::VectorXd& w, const Eigen::VectorXd& v);

}  // namespace kplate
