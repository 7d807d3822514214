#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "distoco/core.hpp"
#include "distoco/decision_set.hpp"
#include "distoco/problem.hpp"

namespace distoco {

struct SolverOptions {
  /// Projected-subgradient iterations for the penalty route.
  int max_iterations = 100000;
  /// Required max_j [g_j(x)]_+ of the returned point.
  double feasibility_tolerance = 1e-6;
  /// Exact-penalty weight; <= 0 selects 10 F2 sqrt(m) R(X).
  double penalty = 0.0;
  /// Cross-check the answer against a feasible grid when dim <= 3.
  bool grid_validation = true;
  int grid_points_per_axis = 41;
};

struct SolveResult {
  Vector x;
  double objective = 0.0;
  double max_violation = 0.0;  ///< max_j [g_j(x)]_+
  int iterations = 0;
  bool grid_checked = false;
};

/// Objective and constraints for the generic penalty route.
struct ConvexProgram {
  std::function<double(const Vector&)> objective;
  std::function<Vector(const Vector&)> objective_subgradient;
  /// One entry per constraint block; the penalty charges sum_b ||[g_b]_+||.
  std::vector<std::shared_ptr<const ConstraintOracle>> constraints;
};

/// min 0.5 x'Qx - b'x + c  s.t.  A x <= a,  x in a box.
/// Q must be positive definite. Dual coordinate ascent on a growing working
/// set of violated rows, followed by a line search toward `anchor` that
/// restores exact feasibility. Throws InfeasibleComparatorError if the
/// tolerance cannot be met.
SolveResult solve_qp(const QuadraticForm& objective, const AffineForm& rows,
                     const DecisionSet& set,
                     const std::optional<Vector>& anchor,
                     const SolverOptions& opts = {});

/// Exact-penalty projected subgradient:
///   min f(x) + penalty * sum_b ||[g_b(x)]_+||  over X,
/// diminishing normalized steps, best iterate kept, then feasibility
/// restoration toward `anchor` by bisection.
SolveResult solve_penalty(const ConvexProgram& program, const DecisionSet& set,
                          const std::optional<Vector>& anchor, double penalty,
                          const SolverOptions& opts = {});

/// max_b max_j [g_{b,j}(x)]_+
double max_violation(
    const std::vector<std::shared_ptr<const ConstraintOracle>>& constraints,
    const Eigen::Ref<const Vector>& x);

}  // namespace distoco
