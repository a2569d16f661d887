#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "kplate/argyris.hpp"
#include "kplate/mesh.hpp"
#include "kplate/problem.hpp"

namespace kplate {

/// Linear solver breakdown (singular or badly conditioned system).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Free/constrained split of the global DOFs. Constrained values are zero.
struct ConstraintPartition {
  std::vector<int> free_index;  ///< global -> free id, -1 when constrained
  std::vector<int> free_dofs;   ///< free id -> global

  int num_free() const { return static_cast<int>(free_dofs.size()); }
  int num_constrained() const { return static_cast<int>(free_index.size() - free_dofs.size()); }
  Eigen::VectorXd expand(const Eigen::VectorXd& free) const;
  Eigen::VectorXd restrict(const Eigen::VectorXd& global) const;
};

/// Clamped conditions u = du/dn = 0. At a boundary vertex the value, the
/// gradient and the second derivatives u_ss, u_sn along each incident
/// boundary edge are fixed (all of the Hessian at a corner); on a boundary
/// edge the midpoint normal derivative is fixed.
ConstraintPartition apply_clamped_bcs(const DofLayout& layout, const Mesh& mesh);

/// Shape-function data of one element at the triangle quadrature points.
/// Rows are quadrature points, columns local shape functions.
struct ElementQuadrature {
  ArgyrisElement element;
  std::vector<Point> points;
  std::vector<double> weights;
  Eigen::Matrix<double, Eigen::Dynamic, kLocalDofs> value;
  Eigen::Matrix<double, Eigen::Dynamic, kLocalDofs> dxx;
  Eigen::Matrix<double, Eigen::Dynamic, kLocalDofs> dxy;
  Eigen::Matrix<double, Eigen::Dynamic, kLocalDofs> dyy;
  Eigen::Matrix<double, Eigen::Dynamic, kLocalDofs> bilaplacian;  ///< Delta^2 phi (without D)

  double diameter() const { return element.geometry().diameter; }
  double area() const { return element.geometry().area; }
  double size(const ObstacleProblem& problem) const { return problem.element_size(diameter(), area()); }
};

/// A mesh together with its Argyris space, clamped constraints and
/// tabulated element data. Immutable after construction.
class Discretization {
 public:
  explicit Discretization(std::shared_ptr<const Mesh> mesh, int degree = kAssemblyDegree);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  const DofLayout& layout() const { return layout_; }
  const ConstraintPartition& constraints() const { return constraints_; }
  const std::vector<ElementQuadrature>& elements() const { return elements_; }
  int quadrature_degree() const { return degree_; }
  /// Total number of global DOFs (6 per vertex plus one per edge).
  int num_dofs() const { return layout_.num_dofs(); }

 private:
  std::shared_ptr<const Mesh> mesh_;
  DofLayout layout_;
  ConstraintPartition constraints_;
  std::vector<ElementQuadrature> elements_;
  int degree_;
};

/// Contact indicator and reaction F(w) at every triangle quadrature point.
struct ContactState {
  std::vector<std::vector<char>> in_contact;
  std::vector<std::vector<double>> reaction;

  bool operator==(const ContactState& other) const { return in_contact == other.in_contact; }
  std::size_t count() const;
};

/// F(w) = (g - w + alpha H^4 (A(w) - f))_+ / (eps + alpha H^4) with H = h_K.
double reaction_force(const ObstacleProblem& problem, double size, double obstacle, double load,
                      double displacement, double biharmonic_value);

ContactState contact_state(const ObstacleProblem& problem, const Discretization& space, const Eigen::VectorXd& dofs);
ContactState empty_contact(const Discretization& space);

struct LinearSystem {
  Eigen::SparseMatrix<double> matrix;  ///< over free DOFs
  Eigen::VectorXd rhs;
};

/// Unstabilised energy form a(., .) over the free DOFs.
Eigen::SparseMatrix<double> assemble_energy(const PlateModel& plate, const Discretization& space);

/// Stabilised Nitsche system a_h(., .; w) u = l_h(.; w) for a frozen contact state.
LinearSystem assemble_nitsche(const ObstacleProblem& problem, const ContactState& contact, const Discretization& space);

/// Sparse LDL^T solve with iterative refinement; the relative residual must
/// reach `tolerance`, otherwise SolverError carries a pivot-ratio diagnostic.
Eigen::VectorXd solve(const LinearSystem& system, double tolerance = 1e-10);

}  // namespace kplate
