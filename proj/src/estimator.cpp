#include "kplate/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kplate {

namespace {

struct PointValues {
  double displacement;
  double biharmonic;
  double load;
  double obstacle;
  double reaction;
};

/// u_h, A(u_h), f, g and lambda_h at each quadrature point of an element.
std::vector<PointValues> element_values(const DiscreteSolution& solution, int tri) {
  const Discretization& space = *solution.space;
  const ElementQuadrature& e = space.elements().at(tri);
  const ObstacleProblem& problem = solution.problem;
  const LocalVector c = gather(space.layout(), tri, solution.dofs);
  const Eigen::VectorXd u = e.value * c;
  const Eigen::VectorXd bih = problem.plate.bending_stiffness() * (e.bilaplacian * c);
  std::vector<PointValues> out;
  out.reserve(e.points.size());
  for (std::size_t q = 0; q < e.points.size(); ++q) {
    const auto qi = static_cast<Eigen::Index>(q);
    const Point p = e.points[q];
    PointValues v{u(qi), bih(qi), problem.load(p), 0.0, 0.0};
    if (problem.obstacle) {
      v.obstacle = (*problem.obstacle)(p);
      v.reaction = reaction_force(problem, e.size(problem), v.obstacle, v.load, v.displacement, v.biharmonic);
    }
    out.push_back(v);
  }
  return out;
}

double interior_squared(const DiscreteSolution& solution, int tri, const std::vector<PointValues>& values) {
  const ElementQuadrature& e = solution.space->elements()[tri];
  double sum = 0.0;
  for (std::size_t q = 0; q < values.size(); ++q) {
    const double r = values[q].biharmonic - values[q].reaction - values[q].load;
    sum += e.weights[q] * r * r;
  }
  return std::pow(e.size(solution.problem), 4) * sum;
}

std::pair<double, double> obstacle_squared(const DiscreteSolution& solution, int tri,
                                           const std::vector<PointValues>& values) {
  if (!solution.problem.obstacle) return {0.0, 0.0};
  const ElementQuadrature& e = solution.space->elements()[tri];
  const double eps = solution.problem.compliance;
  double contact = 0.0;
  double penetration = 0.0;
  for (std::size_t q = 0; q < values.size(); ++q) {
    const PointValues& v = values[q];
    const double gap = v.displacement - v.obstacle + eps * v.reaction;
    contact += e.weights[q] * std::max(gap, 0.0) * v.reaction;
    penetration += e.weights[q] * std::pow(std::max(-gap, 0.0), 2);
  }
  return {contact, penetration / (eps + std::pow(e.size(solution.problem), 4))};
}

}  // namespace

double interior_residual(const DiscreteSolution& solution, int tri) {
  return std::sqrt(interior_squared(solution, tri, element_values(solution, tri)));
}

double edge_residual(const DiscreteSolution& solution, int edge) {
  const JumpProfile jumps = edge_jumps(solution.mesh(), solution.space->layout(), solution.problem.plate, solution.dofs,
                                       edge, kEdgePoints);
  double shear = 0.0;
  double moment = 0.0;
  double length = 0.0;
  for (std::size_t q = 0; q < jumps.weights.size(); ++q) {
    shear += jumps.weights[q] * jumps.shear_jump[q] * jumps.shear_jump[q];
    moment += jumps.weights[q] * jumps.moment_jump[q] * jumps.moment_jump[q];
    length += jumps.weights[q];
  }
  return std::sqrt(length * length * length * shear + length * moment);
}

std::pair<double, double> obstacle_terms(const DiscreteSolution& solution, int tri) {
  const auto [contact, penetration] = obstacle_squared(solution, tri, element_values(solution, tri));
  return {contact, std::sqrt(penetration)};
}

ErrorBreakdown estimate(const DiscreteSolution& solution) {
  const Mesh& mesh = solution.mesh();
  const std::size_t nt = mesh.num_triangles();
  ErrorBreakdown b;
  b.interior_squared.resize(nt);
  b.contact_term.resize(nt);
  b.penetration_squared.resize(nt);
  b.edge_squared.assign(mesh.num_edges(), 0.0);
  b.indicator.resize(nt);

  double eta2 = 0.0;
  double s2 = 0.0;
  for (std::size_t t = 0; t < nt; ++t) {
    const int tri = static_cast<int>(t);
    const auto values = element_values(solution, tri);
    b.interior_squared[t] = interior_squared(solution, tri, values);
    const auto [contact, penetration] = obstacle_squared(solution, tri, values);
    b.contact_term[t] = contact;
    b.penetration_squared[t] = penetration;
    eta2 += b.interior_squared[t];
    s2 += contact + penetration;
  }
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.is_boundary_edge(static_cast<int>(e))) continue;
    const double eta_e = edge_residual(solution, static_cast<int>(e));
    b.edge_squared[e] = eta_e * eta_e;
    eta2 += b.edge_squared[e];
  }
  for (std::size_t t = 0; t < nt; ++t) {
    double edges = 0.0;
    for (int e : mesh.triangle_edges(static_cast<int>(t))) edges += b.edge_squared[e];
    b.indicator[t] =
        std::sqrt(b.interior_squared[t] + 0.5 * edges + b.contact_term[t] + b.penetration_squared[t]);
  }
  b.eta = std::sqrt(eta2);
  b.s = std::sqrt(s2);
  return b;
}

std::vector<int> mark_elements(std::span<const double> indicators, double theta) {
  if (indicators.empty()) throw InvalidArgument("no indicators to mark");
  if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("marking parameter theta must lie in (0, 1)");
  const double threshold = theta * *std::max_element(indicators.begin(), indicators.end());
  std::vector<int> marked;
  for (std::size_t i = 0; i < indicators.size(); ++i)
    if (indicators[i] >= threshold) marked.push_back(static_cast<int>(i));
  return marked;
}

namespace {

template <class Refine>
RefinementHistory refinement_loop(const ObstacleProblem& problem, std::shared_ptr<const Mesh> mesh, int steps,
                                  const StepCallback& on_step, Refine&& refine) {
  if (steps < 1) throw InvalidArgument("number of refinement steps must be at least 1");
  if (!mesh) throw InvalidArgument("refinement loop needs an initial mesh");
  problem.validate();
  RefinementHistory history;
  for (int j = 0; j < steps; ++j) {
    RefinementStep step;
    step.mesh = mesh;
    try {
      step.solution = solve_contact(problem, std::make_shared<const Discretization>(mesh));
    } catch (const SolverError& err) {
      history.failure = "step " + std::to_string(j) + ": " + err.what();
      break;
    }
    step.errors = estimate(step.solution);
    step.num_dofs = step.solution.num_dofs();
    step.num_free_dofs = step.solution.num_free_dofs();
    step.marked = refine.mark(step.errors);
    mesh = std::make_shared<const Mesh>(refine.apply(*mesh, step.marked));
    if (on_step) on_step(step);
    history.steps.push_back(std::move(step));
  }
  history.final_mesh = mesh;
  return history;
}

}  // namespace

RefinementHistory adaptive_solve(const ObstacleProblem& problem, std::shared_ptr<const Mesh> initial, int steps,
                                 double theta, const StepCallback& on_step) {
  if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("marking parameter theta must lie in (0, 1)");
  struct {
    double theta;
    std::vector<int> mark(const ErrorBreakdown& e) const { return mark_elements(e.indicator, theta); }
    Mesh apply(const Mesh& m, const std::vector<int>& marked) const { return rgb_refine(m, marked); }
  } rgb{theta};
  return refinement_loop(problem, std::move(initial), steps, on_step, rgb);
}

RefinementHistory uniform_solve(const ObstacleProblem& problem, std::shared_ptr<const Mesh> initial, int levels,
                                const StepCallback& on_step) {
  struct {
    std::vector<int> mark(const ErrorBreakdown& e) const {
      std::vector<int> all(e.indicator.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
      return all;
    }
    Mesh apply(const Mesh& m, const std::vector<int>&) const { return uniform_refine(m); }
  } red;
  return refinement_loop(problem, std::move(initial), levels, on_step, red);
}

double convergence_slope(std::span<const double> n, std::span<const double> error) {
  if (n.size() != error.size() || n.size() < 2) throw InvalidArgument("slope needs at least two matching points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    mx += std::log(n[i]);
    my += std::log(error[i]);
  }
  mx /= static_cast<double>(n.size());
  my /= static_cast<double>(n.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double dx = std::log(n[i]) - mx;
    sxy += dx * (std::log(error[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace kplate
