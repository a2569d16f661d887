#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kplate/obstacle.hpp"

namespace kplate {

/// Residual error estimator split by element and interior edge.
struct ErrorBreakdown {
  std::vector<double> interior_squared;     ///< eta_K^2
  std::vector<double> contact_term;         ///< ((u_h - g + eps lambda_h)_+, lambda_h)_K
  std::vector<double> penetration_squared;  ///< S_{K,eps}^2
  std::vector<double> edge_squared;         ///< eta_E^2, zero on boundary edges
  std::vector<double> indicator;            ///< E_K
  double eta = 0.0;
  double s = 0.0;

  double total() const { return eta + s; }
};

/// eta_K = h_K^2 || A(u_h) - lambda_h - f ||_{0,K}
double interior_residual(const DiscreteSolution& solution, int tri);
/// eta_E^2 = h_E^3 ||[[V_n]]||^2 + h_E ||[[M_nn]]||^2 on an interior edge.
double edge_residual(const DiscreteSolution& solution, int edge);
/// (contact consistency term, S_{K,eps}) of one element.
std::pair<double, double> obstacle_terms(const DiscreteSolution& solution, int tri);

ErrorBreakdown estimate(const DiscreteSolution& solution);

/// Maximum strategy: every element with E_K >= theta * max E_K.
std::vector<int> mark_elements(std::span<const double> indicators, double theta);

struct RefinementStep {
  std::shared_ptr<const Mesh> mesh;
  DiscreteSolution solution;
  ErrorBreakdown errors;
  std::vector<int> marked;
  int num_dofs = 0;       ///< 6 per vertex plus one per edge
  int num_free_dofs = 0;  ///< after clamped constraints
};

struct RefinementHistory {
  std::vector<RefinementStep> steps;
  std::shared_ptr<const Mesh> final_mesh;  ///< mesh produced by the last refinement
  std::optional<std::string> failure;      ///< solver failure that ended the loop early
};

using StepCallback = std::function<void(const RefinementStep&)>;

/// Solve, estimate, mark and refine `steps` times (red-green-blue refinement).
RefinementHistory adaptive_solve(const ObstacleProblem& problem, std::shared_ptr<const Mesh> initial, int steps,
                                 double theta, const StepCallback& on_step = {});

/// Same loop with red refinement of every element; `levels` solves.
RefinementHistory uniform_solve(const ObstacleProblem& problem, std::shared_ptr<const Mesh> initial, int levels,
                                const StepCallback& on_step = {});

/// Least-squares slope of log(error) against log(n).
double convergence_slope(std::span<const double> n, std::span<const double> error);

}  // namespace kplate
