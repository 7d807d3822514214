#include "distoco/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace distoco {

namespace {

// Visits every point of a regular grid over a box (dim <= 3).
template <typename Visit>
void for_each_grid_point(const DecisionSet& set, int per_axis, Visit visit) {
  const Index p = set.dim();
  Vector lo, hi;
  if (set.kind() == DecisionSet::Kind::kBox) {
    lo = set.lower();
    hi = set.upper();
  } else {
    lo = set.center().array() - set.radius();
    hi = set.center().array() + set.radius();
  }
  std::vector<int> idx(static_cast<std::size_t>(p), 0);
  Vector x(p);
  const int n = std::max(per_axis, 2);
  while (true) {
    for (Index k = 0; k < p; ++k) {
      x(k) = lo(k) + (hi(k) - lo(k)) * idx[static_cast<std::size_t>(k)] / (n - 1);
    }
    if (set.contains(x)) visit(x);
    Index k = 0;
    while (k < p && ++idx[static_cast<std::size_t>(k)] == n) {
      idx[static_cast<std::size_t>(k)] = 0;
      ++k;
    }
    if (k == p) break;
  }
}

double affine_violation(const AffineForm& rows,
                        const Eigen::Ref<const Vector>& x) {
  if (rows.A.rows() == 0) return 0.0;
  return std::max(0.0, (rows.A * x - rows.a).maxCoeff());
}

// Largest theta in [0, 1] with anchor + theta (x - anchor) satisfying every
// affine row, given that the anchor does.
Vector restore_affine(const AffineForm& rows, const Vector& anchor,
                      const Vector& x) {
  if (rows.A.rows() == 0) return x;
  const Vector dir = x - anchor;
  const Vector slope = rows.A * dir;
  const Vector slack = rows.a - rows.A * anchor;
  double theta = 1.0;
  for (Index j = 0; j < slope.size(); ++j) {
    if (slope(j) > 0.0 && slack(j) < slope(j) * theta) {
      theta = std::max(0.0, slack(j) / slope(j));
    }
  }
  return anchor + theta * dir;
}

}  // namespace

double max_violation(
    const std::vector<std::shared_ptr<const ConstraintOracle>>& constraints,
    const Eigen::Ref<const Vector>& x) {
  double worst = 0.0;
  for (const auto& c : constraints) {
    const Vector g = c->value(x);
    if (g.size() > 0) worst = std::max(worst, g.maxCoeff());
  }
  return worst;
}

SolveResult solve_qp(const QuadraticForm& objective, const AffineForm& rows,
                     const DecisionSet& set,
                     const std::optional<Vector>& anchor,
                     const SolverOptions& opts) {
  const Index p = set.dim();
  require(set.kind() == DecisionSet::Kind::kBox,
          "solve_qp: only box decision sets are supported");
  require(objective.Q.rows() == p && objective.Q.cols() == p &&
              objective.b.size() == p,
          "solve_qp: objective dimension mismatch");
  require(rows.A.cols() == p || rows.A.rows() == 0,
          "solve_qp: constraint dimension mismatch");
  require(rows.A.rows() == rows.a.size(), "solve_qp: row count mismatch");
  if (anchor) {
    require(set.contains(*anchor) &&
                affine_violation(rows, *anchor) <= 0.0,
            "solve_qp: anchor must be feasible");
  }

  Eigen::LLT<Matrix> llt(objective.Q);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("solve_qp: objective is not positive definite");
  }
  const Vector x_free = llt.solve(objective.b);

  // Candidate row r < m is A.row(r) x <= a(r); the next 2p rows are the box.
  const Index m = rows.A.rows();
  auto row_vector = [&](Index r) -> Vector {
    if (r < m) return rows.A.row(r).transpose();
    Vector e = Vector::Zero(p);
    const Index k = (r - m) % p;
    e(k) = (r - m) < p ? 1.0 : -1.0;
    return e;
  };
  auto row_bound = [&](Index r) -> double {
    if (r < m) return rows.a(r);
    const Index k = (r - m) % p;
    return (r - m) < p ? set.upper()(k) : -set.lower()(k);
  };

  std::vector<Index> working;
  std::vector<char> in_working(static_cast<std::size_t>(m + 2 * p), 0);
  Matrix G(p, 0);  // Q^-1 m_j per working row
  Matrix Mw(0, p);
  Vector h(0), lambda(0), diag(0);
  Vector x = x_free;
  int iterations = 0;
  constexpr int kMaxOuter = 1000;
  constexpr Index kBatch = 32;
  constexpr int kMaxSweeps = 200000;

  for (int outer = 0; outer < kMaxOuter; ++outer) {
    // Most violated rows not yet in the working set.
    std::vector<std::pair<double, Index>> violated;
    if (m > 0) {
      const Vector v = rows.A * x - rows.a;
      for (Index r = 0; r < m; ++r) {
        const double tol = 1e-13 * (1.0 + std::abs(rows.a(r)));
        if (v(r) > tol && !in_working[static_cast<std::size_t>(r)])
          violated.emplace_back(v(r), r);
      }
    }
    for (Index r = m; r < m + 2 * p; ++r) {
      const double v = row_vector(r).dot(x) - row_bound(r);
      if (v > 1e-13 * (1.0 + std::abs(row_bound(r))) &&
          !in_working[static_cast<std::size_t>(r)])
        violated.emplace_back(v, r);
    }
    if (violated.empty()) break;
    const Index take = std::min<Index>(kBatch, violated.size());
    std::partial_sort(violated.begin(), violated.begin() + take,
                      violated.end(), std::greater<>());

    const Index old = static_cast<Index>(working.size());
    const Index grown = old + take;
    G.conservativeResize(p, grown);
    Mw.conservativeResize(grown, p);
    h.conservativeResize(grown);
    lambda.conservativeResize(grown);
    diag.conservativeResize(grown);
    for (Index k = 0; k < take; ++k) {
      const Index r = violated[static_cast<std::size_t>(k)].second;
      const Vector mj = row_vector(r);
      working.push_back(r);
      in_working[static_cast<std::size_t>(r)] = 1;
      Mw.row(old + k) = mj.transpose();
      h(old + k) = row_bound(r);
      G.col(old + k) = llt.solve(mj);
      diag(old + k) = mj.dot(G.col(old + k));
      lambda(old + k) = 0.0;
    }

    // Dual coordinate ascent (Hildreth) on the working set.
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      double largest_move = 0.0;
      for (Index j = 0; j < grown; ++j) {
        if (diag(j) <= 0.0) continue;
        const double residual = Mw.row(j).dot(x) - h(j);
        const double next = std::max(0.0, lambda(j) + residual / diag(j));
        const double d = next - lambda(j);
        if (d != 0.0) {
          x.noalias() -= d * G.col(j);
          lambda(j) = next;
          largest_move = std::max(largest_move, std::abs(d) * std::sqrt(diag(j)));
        }
      }
      ++iterations;
      if (largest_move <= 1e-15 * (1.0 + x.norm())) break;
      // Resynchronize to limit drift from incremental updates.
      if (sweep % 256 == 255) x = x_free - G * lambda;
    }
    x = x_free - G * lambda;
  }

  x = project(set, x);
  if (anchor) x = restore_affine(rows, *anchor, x);

  SolveResult result;
  result.x = x;
  result.objective = objective.value(x);
  result.max_violation = affine_violation(rows, x);
  result.iterations = iterations;

  if (opts.grid_validation && p <= 3) {
    result.grid_checked = true;
    const double margin = 1e-9 * (1.0 + std::abs(result.objective));
    for_each_grid_point(set, opts.grid_points_per_axis, [&](const Vector& y) {
      if (affine_violation(rows, y) > 0.0) return;
      const double value = objective.value(y);
      if (value < result.objective - margin) {
        result.x = y;
        result.objective = value;
        result.max_violation = 0.0;
      }
    });
  }

  if (!(result.max_violation <= opts.feasibility_tolerance)) {
    throw InfeasibleComparatorError(
        "solve_qp: could not reach the feasibility tolerance");
  }
  return result;
}

SolveResult solve_penalty(const ConvexProgram& program, const DecisionSet& set,
                          const std::optional<Vector>& anchor, double penalty,
                          const SolverOptions& opts) {
  const Index p = set.dim();
  require(static_cast<bool>(program.objective) &&
              static_cast<bool>(program.objective_subgradient),
          "solve_penalty: objective required");
  require(penalty > 0.0, "solve_penalty: penalty must be positive");
  if (anchor) {
    require(set.contains(*anchor) &&
                max_violation(program.constraints, *anchor) <= 0.0,
            "solve_penalty: anchor must be feasible");
  }

  auto merit = [&](const Vector& x) {
    double value = program.objective(x);
    for (const auto& c : program.constraints)
      value += penalty * clipped_value(c->value(x)).norm();
    return value;
  };
  auto merit_subgradient = [&](const Vector& x) {
    Vector s = program.objective_subgradient(x);
    for (const auto& c : program.constraints) {
      const Vector g = c->value(x);
      const Vector clipped = clipped_value(g);
      const double norm = clipped.norm();
      if (norm > 0.0) {
        s += penalty * clip_jacobian(g, c->subgradient(x)) * (clipped / norm);
      }
    }
    return s;
  };

  auto descend = [&](Vector x, double step0, int iterations) {
    Vector best = x;
    double best_value = merit(x);
    for (int k = 0; k < iterations; ++k) {
      const Vector s = merit_subgradient(x);
      const double norm = s.norm();
      if (norm == 0.0) break;
      const double step = step0 / std::sqrt(static_cast<double>(k) + 1.0);
      x = project(set, x - (step / norm) * s);
      const double value = merit(x);
      if (value < best_value) {
        best_value = value;
        best = x;
      }
    }
    return best;
  };

  const Vector start = anchor ? *anchor : project(set, Vector::Zero(p));
  Vector x = descend(start, 0.5 * set.outer_radius(), opts.max_iterations);

  auto restore = [&](const Vector& y) -> Vector {
    if (!anchor || max_violation(program.constraints, y) <= 0.0) return y;
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < 60; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (max_violation(program.constraints, *anchor + mid * (y - *anchor)) <=
          0.0)
        lo = mid;
      else
        hi = mid;
    }
    return *anchor + lo * (y - *anchor);
  };
  x = restore(x);

  SolveResult result;
  result.x = x;
  result.objective = program.objective(x);
  result.max_violation = max_violation(program.constraints, x);
  result.iterations = opts.max_iterations;

  if (opts.grid_validation && p <= 3) {
    result.grid_checked = true;
    Vector best_grid;
    double best_grid_value = result.objective;
    for_each_grid_point(set, opts.grid_points_per_axis, [&](const Vector& y) {
      if (max_violation(program.constraints, y) > 0.0) return;
      const double value = program.objective(y);
      if (value < best_grid_value) {
        best_grid_value = value;
        best_grid = y;
      }
    });
    if (best_grid.size() > 0) {
      // Refine locally from the better grid point.
      const double spacing =
          2.0 * set.outer_radius() / std::max(opts.grid_points_per_axis - 1, 1);
      Vector refined = restore(descend(best_grid, spacing,
                                       std::max(opts.max_iterations / 4, 1)));
      const double refined_value = program.objective(refined);
      const bool refined_ok =
          max_violation(program.constraints, refined) <= 0.0 &&
          refined_value <= best_grid_value;
      result.x = refined_ok ? refined : best_grid;
      result.objective = refined_ok ? refined_value : best_grid_value;
      result.max_violation = max_violation(program.constraints, result.x);
    }
  }

  if (!(result.max_violation <= opts.feasibility_tolerance)) {
    throw InfeasibleComparatorError(
        "solve_penalty: could not reach the feasibility tolerance");
  }
  return result;
}

}  // namespace distoco
