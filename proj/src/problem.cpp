#include "kplate/problem.hpp"

#include <cmath>

namespace kplate {

void ObstacleProblem::validate() const {
  if (!(compliance >= 0.0)) throw InvalidArgument("obstacle compliance epsilon must be non-negative");
  if (!(stabilisation > 0.0)) throw InvalidArgument("stabilisation parameter alpha must be positive");
  if (!(tolerance > 0.0)) throw InvalidArgument("contact tolerance must be positive");
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be at least 1");
  if (!load) throw InvalidArgument("load function is not set");
}

double ObstacleProblem::element_size(double longest_edge, double area) const {
  return mesh_size == MeshSize::area ? std::sqrt(2.0 * area) : longest_edge;
}

}  // namespace kplate
