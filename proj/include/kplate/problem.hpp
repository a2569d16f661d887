#pragma once

#include <functional>
#include <optional>

#include "kplate/mesh.hpp"
#include "kplate/plate.hpp"

namespace kplate {

using ScalarField = std::function<double(Point)>;

/// Element size h_K entering the stabilisation, the reaction and the estimator.
enum class MeshSize {
  longest_edge,  ///< longest edge of K
  area,          ///< sqrt(2 |K|), the leg of a right isosceles triangle
};

/// Clamped plate pressed by a load against a rigid (compliance 0) or
/// elastic obstacle.
struct ObstacleProblem {
  PlateModel plate{1.0, 0.0, 1.0};
  ScalarField load = [](Point) { return 0.0; };  ///< f, force per area
  std::optional<ScalarField> obstacle;          ///< g; empty means no contact at all
  double compliance = 0.0;                      ///< epsilon >= 0
  double stabilisation = 1e-5;                  ///< alpha > 0
  double tolerance = 1e-10;                     ///< energy-norm stopping tolerance
  int max_iterations = 50;
  MeshSize mesh_size = MeshSize::longest_edge;

  /// h_K of a triangle with the given longest edge and area.
  double element_size(double longest_edge, double area) const;

  /// Throws InvalidArgument on a violated parameter range.
  void validate() const;
};

}  // namespace kplate
