#include "kplate/obstacle.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

namespace kplate {

Jet DiscreteSolution::evaluate(int tri, Point p) const {
  const ElementQuadrature& e = space->elements().at(tri);
  return e.element.evaluate(gather(space->layout(), tri, dofs), p);
}

double DiscreteSolution::reaction(int tri, Point p) const {
  if (!problem.obstacle) return 0.0;
  const Jet j = evaluate(tri, p);
  const double diameter = space->elements()[tri].size(problem);
  return reaction_force(problem, diameter, (*problem.obstacle)(p), problem.load(p), j[deriv::u],
                        biharmonic(problem.plate, j));
}

double energy_norm(const PlateModel& plate, const Discretization& space, const Eigen::VectorXd& dofs) {
  const Eigen::SparseMatrix<double> k = assemble_energy(plate, space);
  const Eigen::VectorXd free = space.constraints().restrict(dofs);
  return std::sqrt(std::max(0.0, free.dot(k * free)));
}

DiscreteSolution solve_contact(const ObstacleProblem& problem, std::shared_ptr<const Mesh> mesh) {
  return solve_contact(problem, std::make_shared<const Discretization>(std::move(mesh)));
}

DiscreteSolution solve_contact(const ObstacleProblem& problem, std::shared_ptr<const Discretization> space) {
  problem.validate();
  const ConstraintPartition& partition = space->constraints();
  const Eigen::SparseMatrix<double> energy = assemble_energy(problem.plate, *space);

  DiscreteSolution result;
  result.space = space;
  result.problem = problem;

  Eigen::VectorXd u = solve(assemble_nitsche(problem, empty_contact(*space), *space));
  std::vector<ContactState> patterns;
  for (int k = 1; k <= problem.max_iterations; ++k) {
    ContactState contact = contact_state(problem, *space, partition.expand(u));
    // A pattern seen two or more iterations ago means the iteration cycles.
    for (std::size_t j = 0; j + 1 < patterns.size(); ++j) {
      if (patterns[j] == contact) {
        result.cycled = true;
        break;
      }
    }
    if (result.cycled) break;
    const Eigen::VectorXd next = solve(assemble_nitsche(problem, contact, *space));
    const Eigen::VectorXd step = next - u;
    result.final_increment = std::sqrt(std::max(0.0, step.dot(energy * step)));
    result.iterations = k;
    u = next;
    patterns.push_back(std::move(contact));
    if (result.final_increment <= problem.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.dofs = partition.expand(u);
  return result;
}

ReactionField reaction_field(const DiscreteSolution& solution) {
  const Discretization& space = *solution.space;
  const ContactState state = contact_state(solution.problem, space, solution.dofs);
  ReactionField field;
  field.values = state.reaction;
  for (std::size_t t = 0; t < space.elements().size(); ++t) {
    const ElementQuadrature& e = space.elements()[t];
    double area = 0.0;
    double contact = 0.0;
    for (std::size_t q = 0; q < e.points.size(); ++q) {
      area += e.weights[q];
      if (state.in_contact[t][q]) contact += e.weights[q];
    }
    field.contact_fraction.push_back(contact / area);
    field.contact_area += contact;
  }
  return field;
}

FieldSamples sample_field(const DiscreteSolution& solution, int resolution) {
  if (resolution < 1) throw InvalidArgument("sampling resolution must be positive");
  const Mesh& mesh = solution.mesh();
  const PointLocator locator(mesh);
  Point lo = mesh.vertices().front();
  Point hi = lo;
  for (const Point& p : mesh.vertices()) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  FieldSamples s;
  s.resolution = resolution;
  for (int j = 0; j <= resolution; ++j) {
    for (int i = 0; i <= resolution; ++i) {
      const Point p{lo.x + (hi.x - lo.x) * i / resolution, lo.y + (hi.y - lo.y) * j / resolution};
      const int tri = locator.locate(p);
      s.points.push_back(p);
      s.inside.push_back(tri >= 0 ? 1 : 0);
      if (tri < 0) {
        s.displacement.push_back(0.0);
        s.reaction.push_back(0.0);
        continue;
      }
      s.displacement.push_back(solution.evaluate(tri, p)[deriv::u]);
      s.reaction.push_back(solution.reaction(tri, p));
    }
  }
  return s;
}

void write_solution(std::ostream& out, const DiscreteSolution& solution) {
  out << "dofs " << solution.dofs.size() << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < solution.dofs.size(); ++i) out << solution.dofs(i) << '\n';
}

Eigen::VectorXd read_solution(std::istream& in) {
  std::string word;
  long long count = -1;
  if (!(in >> word >> count) || word != "dofs" || count < 0)
    throw InvalidArgument("solution file: expected 'dofs <count>' header");
  Eigen::VectorXd v(count);
  for (long long i = 0; i < count; ++i)
    if (!(in >> v(i))) throw InvalidArgument("solution file: truncated value list");
  return v;
}

}  // namespace kplate
