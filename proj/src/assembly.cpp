#include "kplate/assembly.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kplate {

Eigen::VectorXd ConstraintPartition::expand(const Eigen::VectorXd& free) const {
  Eigen::VectorXd global = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(free_index.size()));
  for (int i = 0; i < num_free(); ++i) global(free_dofs[i]) = free(i);
  return global;
}

Eigen::VectorXd ConstraintPartition::restrict(const Eigen::VectorXd& global) const {
  Eigen::VectorXd free(num_free());
  for (int i = 0; i < num_free(); ++i) free(i) = global(free_dofs[i]);
  return free;
}

ConstraintPartition apply_clamped_bcs(const DofLayout& layout, const Mesh& mesh) {
  std::vector<char> constrained(static_cast<std::size_t>(layout.num_dofs()), 0);
  std::vector<std::vector<Point>> tangents(mesh.num_vertices());
  for (int e = 0; e < static_cast<int>(mesh.num_edges()); ++e) {
    if (!mesh.is_boundary_edge(e)) continue;
    const auto [a, b] = mesh.edges()[e];
    const Point d = mesh.vertices()[b] - mesh.vertices()[a];
    const Point t = (1.0 / norm(d)) * d;
    tangents[a].push_back(t);
    tangents[b].push_back(t);
    constrained[layout.edge_dof(e)] = 1;
  }
  for (int v = 0; v < layout.num_vertices; ++v) {
    if (tangents[v].empty()) continue;
    const VertexFrame& f = layout.frames[v];
    auto all_parallel = [&](Point axis) {
      return std::all_of(tangents[v].begin(), tangents[v].end(),
                         [axis](Point t) { return std::abs(cross(t, axis)) < 1e-10; });
    };
    // Value and gradient always; u_ss and u_sn fix two Hessian entries on a
    // straight boundary and the whole Hessian at a corner.
    std::array<bool, kVertexDofs> fix{true, true, true, true, true, true};
    if (all_parallel(f.a))
      fix[5] = false;
    else if (all_parallel(f.b))
      fix[3] = false;
    for (int c = 0; c < kVertexDofs; ++c)
      if (fix[c]) constrained[layout.vertex_dof(v, c)] = 1;
  }

  ConstraintPartition p;
  p.free_index.assign(constrained.size(), -1);
  for (std::size_t i = 0; i < constrained.size(); ++i) {
    if (constrained[i]) continue;
    p.free_index[i] = static_cast<int>(p.free_dofs.size());
    p.free_dofs.push_back(static_cast<int>(i));
  }
  return p;
}

Discretization::Discretization(std::shared_ptr<const Mesh> mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree) {
  if (!mesh_) throw InvalidArgument("discretization needs a mesh");
  layout_ = build_dof_layout(*mesh_);
  constraints_ = apply_clamped_bcs(layout_, *mesh_);
  const QuadratureRule rule = triangle_quadrature(degree);
  const auto nq = static_cast<Eigen::Index>(rule.size());
  elements_.reserve(mesh_->num_triangles());
  for (int t = 0; t < static_cast<int>(mesh_->num_triangles()); ++t) {
    ArgyrisElement element = make_element(*mesh_, layout_, t);
    const MappedRule mapped = map_rule(rule, element.geometry());
    ElementQuadrature data{std::move(element), mapped.points, mapped.weights, {}, {}, {}, {}, {}};
    data.value.resize(nq, kLocalDofs);
    data.dxx.resize(nq, kLocalDofs);
    data.dxy.resize(nq, kLocalDofs);
    data.dyy.resize(nq, kLocalDofs);
    data.bilaplacian.resize(nq, kLocalDofs);
    for (Eigen::Index q = 0; q < nq; ++q) {
      const DerivativeTable table = data.element.evaluate(data.points[q]);
      data.value.row(q) = table.row(deriv::u);
      data.dxx.row(q) = table.row(deriv::xx);
      data.dxy.row(q) = table.row(deriv::xy);
      data.dyy.row(q) = table.row(deriv::yy);
      data.bilaplacian.row(q) = table.row(deriv::xxxx) + 2.0 * table.row(deriv::xxyy) + table.row(deriv::yyyy);
    }
    elements_.push_back(std::move(data));
  }
}

std::size_t ContactState::count() const {
  std::size_t n = 0;
  for (const auto& element : in_contact) n += static_cast<std::size_t>(std::count(element.begin(), element.end(), 1));
  return n;
}

double reaction_force(const ObstacleProblem& problem, double size, double obstacle, double load,
                      double displacement, double biharmonic_value) {
  const double weight = problem.stabilisation * std::pow(size, 4);
  const double value = obstacle - displacement + weight * (biharmonic_value - load);
  return value > 0.0 ? value / (problem.compliance + weight) : 0.0;
}

ContactState empty_contact(const Discretization& space) {
  ContactState state;
  for (const ElementQuadrature& e : space.elements()) {
    state.in_contact.emplace_back(e.points.size(), 0);
    state.reaction.emplace_back(e.points.size(), 0.0);
  }
  return state;
}

ContactState contact_state(const ObstacleProblem& problem, const Discretization& space, const Eigen::VectorXd& dofs) {
  problem.validate();
  ContactState state = empty_contact(space);
  if (!problem.obstacle) return state;
  const double stiffness = problem.plate.bending_stiffness();
  for (std::size_t t = 0; t < space.elements().size(); ++t) {
    const ElementQuadrature& e = space.elements()[t];
    const LocalVector c = gather(space.layout(), static_cast<int>(t), dofs);
    const Eigen::VectorXd w = e.value * c;
    const Eigen::VectorXd bih = stiffness * (e.bilaplacian * c);
    for (std::size_t q = 0; q < e.points.size(); ++q) {
      const Point p = e.points[q];
      const auto qi = static_cast<Eigen::Index>(q);
      const double f = reaction_force(problem, e.size(problem), (*problem.obstacle)(p), problem.load(p), w(qi), bih(qi));
      state.reaction[t][q] = f;
      state.in_contact[t][q] = f > 0.0 ? 1 : 0;
    }
  }
  return state;
}

namespace {

void scatter(const LocalMatrix& local, const std::array<int, kLocalDofs>& dofs, const ConstraintPartition& partition,
             std::vector<Eigen::Triplet<double>>& triplets) {
  for (int i = 0; i < kLocalDofs; ++i) {
    const int row = partition.free_index[dofs[i]];
    if (row < 0) continue;
    for (int j = 0; j < kLocalDofs; ++j) {
      const int col = partition.free_index[dofs[j]];
      if (col >= 0) triplets.emplace_back(row, col, local(i, j));
    }
  }
}

LocalMatrix energy_matrix(const PlateModel& plate, const ElementQuadrature& e) {
  const double nu = plate.poisson();
  const double d = plate.thickness();
  const double c = d * d * d / 12.0 * plate.young() / (1.0 + nu);
  const double kappa = nu / (1.0 - nu);
  const auto w = Eigen::Map<const Eigen::VectorXd>(e.weights.data(), static_cast<Eigen::Index>(e.weights.size()));
  const auto wd = w.asDiagonal();
  LocalMatrix k = e.dxx.transpose() * wd * e.dxx + 2.0 * (e.dxy.transpose() * wd * e.dxy) + e.dyy.transpose() * wd * e.dyy;
  if (kappa != 0.0) {
    const Eigen::Matrix<double, Eigen::Dynamic, kLocalDofs> lap = e.dxx + e.dyy;
    k += kappa * (lap.transpose() * wd * lap);
  }
  return c * k;
}

Eigen::SparseMatrix<double> build(int n, std::vector<Eigen::Triplet<double>>& triplets) {
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace

Eigen::SparseMatrix<double> assemble_energy(const PlateModel& plate, const Discretization& space) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(space.elements().size() * kLocalDofs * kLocalDofs);
  for (std::size_t t = 0; t < space.elements().size(); ++t)
    scatter(energy_matrix(plate, space.elements()[t]), space.layout().element_dofs[t], space.constraints(), triplets);
  return build(space.constraints().num_free(), triplets);
}

LinearSystem assemble_nitsche(const ObstacleProblem& problem, const ContactState& contact, const Discretization& space) {
  problem.validate();
  const ConstraintPartition& partition = space.constraints();
  const double stiffness = problem.plate.bending_stiffness();
  const double eps = problem.compliance;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(space.elements().size() * kLocalDofs * kLocalDofs);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(partition.num_free());

  for (std::size_t t = 0; t < space.elements().size(); ++t) {
    const ElementQuadrature& e = space.elements()[t];
    const double weight = problem.stabilisation * std::pow(e.size(problem), 4);
    const double beta = 1.0 / (eps + weight);  // 1 / (eps + alpha H^4)
    const double gamma = weight * beta;        // alpha H^4 / (eps + alpha H^4)
    const double delta = eps * gamma;          // eps alpha H^4 / (eps + alpha H^4)

    LocalMatrix k = energy_matrix(problem.plate, e);
    LocalVector r = LocalVector::Zero();
    for (std::size_t q = 0; q < e.points.size(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      const double w = e.weights[q];
      const Point p = e.points[q];
      const double f = problem.load(p);
      const LocalVector phi = e.value.row(qi).transpose();
      const LocalVector aphi = stiffness * e.bilaplacian.row(qi).transpose();
      r += w * f * phi;
      if (contact.in_contact[t][q]) {
        const double g = (*problem.obstacle)(p);
        k.noalias() += (w * beta) * (phi * phi.transpose());
        k.noalias() -= (w * gamma) * (aphi * phi.transpose() + phi * aphi.transpose());
        k.noalias() -= (w * delta) * (aphi * aphi.transpose());
        r += w * (beta * g - gamma * f) * phi - w * (gamma * g + delta * f) * aphi;
      } else {
        k.noalias() -= (w * weight) * (aphi * aphi.transpose());
        r -= w * weight * f * aphi;
      }
    }
    const auto& dofs = space.layout().element_dofs[t];
    scatter(k, dofs, partition, triplets);
    for (int i = 0; i < kLocalDofs; ++i) {
      const int row = partition.free_index[dofs[i]];
      if (row >= 0) rhs(row) += r(i);
    }
  }
  return {build(partition.num_free(), triplets), std::move(rhs)};
}

Eigen::VectorXd solve(const LinearSystem& system, double tolerance) {
  const Eigen::Index n = system.matrix.rows();
  if (system.matrix.cols() != n || system.rhs.size() != n) throw SolverError("linear system has inconsistent sizes");
  if (n == 0) return Eigen::VectorXd();
  const double bnorm = system.rhs.norm();
  if (bnorm == 0.0) return Eigen::VectorXd::Zero(n);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(system.matrix);
  if (ldlt.info() != Eigen::Success) throw SolverError("sparse LDL^T factorisation failed");
  const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
  const double pivot_ratio = d.minCoeff() > 0.0 ? d.maxCoeff() / d.minCoeff() : INFINITY;

  Eigen::VectorXd x = ldlt.solve(system.rhs);
  double residual = (system.rhs - system.matrix * x).norm() / bnorm;
  for (int sweep = 0; sweep < 5 && residual > tolerance && std::isfinite(residual); ++sweep) {
    x += ldlt.solve(system.rhs - system.matrix * x);
    residual = (system.rhs - system.matrix * x).norm() / bnorm;
  }
  if (!(residual <= tolerance)) {
    std::ostringstream msg;
    msg << "linear solve did not reach relative residual " << tolerance << " (got " << residual
        << ", pivot ratio " << pivot_ratio << ")";
    throw SolverError(msg.str());
  }
  return x;
}

}  // namespace kplate
