#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "kplate/assembly.hpp"
#include "kplate/problem.hpp"

namespace kplate {

/// Displacement u_h over the Argyris space of one mesh, plus the state of
/// the contact iteration that produced it.
struct DiscreteSolution {
  std::shared_ptr<const Discretization> space;
  ObstacleProblem problem;
  Eigen::VectorXd dofs;  ///< all global DOFs (constrained ones are zero)
  int iterations = 0;
  bool converged = false;
  bool cycled = false;  ///< the contact pattern repeated without meeting the tolerance
  double final_increment = 0.0;

  const Mesh& mesh() const { return space->mesh(); }
  int num_dofs() const { return space->num_dofs(); }
  int num_free_dofs() const { return space->constraints().num_free(); }

  /// Jet of u_h restricted to triangle `tri`.
  Jet evaluate(int tri, Point p) const;
  /// Reaction lambda_h = F(u_h) at a point of triangle `tri`.
  double reaction(int tri, Point p) const;
};

/// Contact fixed-point iteration: start from the solution without contact,
/// then re-solve the Nitsche system with the contact set of the previous
/// iterate until the energy-norm increment drops to the tolerance.
DiscreteSolution solve_contact(const ObstacleProblem& problem, std::shared_ptr<const Discretization> space);
DiscreteSolution solve_contact(const ObstacleProblem& problem, std::shared_ptr<const Mesh> mesh);

struct ReactionField {
  std::vector<std::vector<double>> values;  ///< lambda_h per element and quadrature point
  std::vector<double> contact_fraction;     ///< contact area / element area
  double contact_area = 0.0;
};

ReactionField reaction_field(const DiscreteSolution& solution);

/// Energy norm sqrt(a(w, w)) of a global DOF vector.
double energy_norm(const PlateModel& plate, const Discretization& space, const Eigen::VectorXd& dofs);

/// Samples on a uniform (n+1) x (n+1) grid over the mesh bounding box.
struct FieldSamples {
  int resolution = 0;
  std::vector<Point> points;
  std::vector<double> displacement;
  std::vector<double> reaction;
  std::vector<char> inside;
};

FieldSamples sample_field(const DiscreteSolution& solution, int resolution);

/// `dofs <count>` followed by one value per line.
void write_solution(std::ostream& out, const DiscreteSolution& solution);
Eigen::VectorXd read_solution(std::istream& in);

}  // namespace kplate
