#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "distoco/core.hpp"
#include "distoco/problem.hpp"
#include "distoco/solver.hpp"

namespace distoco {

/// Decisions of every agent over rounds 1..T. decisions[t-1] is n x p with
/// row i holding x_{i,t}.
class RunTrace {
 public:
  RunTrace(Index agents, Index dim);

  void append(Matrix decisions);

  Index agents() const { return agents_; }
  Index dim() const { return dim_; }
  Index horizon() const { return static_cast<Index>(decisions_.size()); }
  const Matrix& round(Index t) const;
  Vector decision(Index agent, Index t) const {
    return round(t).row(agent).transpose();
  }
  bool operator==(const RunTrace&) const = default;

 private:
  Index agents_;
  Index dim_;
  std::vector<Matrix> decisions_;
};

enum class ComparatorKind { kStatic, kDynamic, kCustom };

struct ComparatorSequence {
  ComparatorKind kind = ComparatorKind::kCustom;
  std::vector<Vector> points;  ///< y_1..y_T
  /// max_t ||[g_t(y_t)]_+||
  double feasibility = 0.0;
  /// sum_t f_t(y_t)
  double objective = 0.0;

  Index horizon() const { return static_cast<Index>(points.size()); }
};

/// (1/n) sum_i sum_t f_t(x_{i,t}) - sum_t f_t(y_t) over t = 1..horizon
/// (defaults to the comparator length).
double network_regret(const RunTrace& trace, const ComparatorSequence& comp,
                      const ProblemInstance& instance);

/// (1/n) sum_i sum_{t<=T} ||[g_t(x_{i,t})]_+||
double cumulative_violation(const RunTrace& trace,
                            const ProblemInstance& instance, Index horizon = -1);

/// (1/n) sum_i ||[sum_{t<=T} g_t(x_{i,t})]_+||
double standard_violation(const RunTrace& trace,
                          const ProblemInstance& instance, Index horizon = -1);

/// sum_{t<T} ||y_{t+1} - y_t||
double path_length(const ComparatorSequence& comp);

/// max_i ||x_{i,t} - mean_j x_{j,t}||
double disagreement(const RunTrace& trace, Index t);

/// Least-squares slope of log(value) against log(T).
double empirical_rate(std::span<const std::pair<double, double>> series);

/// Builds the static comparator problem one round at a time, keeping the
/// summed quadratic objective and the stacked constraint rows, so it can be
/// solved at any prefix length. Requires quadratic losses and affine
/// constraints.
class StaticComparatorBuilder {
 public:
  explicit StaticComparatorBuilder(const ProblemInstance& instance);

  void add_round(const std::vector<LocalProblem>& round);
  Index rounds() const { return rounds_; }
  /// sum_{t<=rounds} f_t(x)
  double objective(const Eigen::Ref<const Vector>& x) const {
    return total_.value(x);
  }
  ComparatorSequence solve(const SolverOptions& opts = {}) const;

 private:
  const ProblemInstance* instance_;
  Index rounds_ = 0;
  QuadraticForm total_;
  std::vector<double> rows_;  // row-major p coefficients followed by bound
};

/// Minimizer of sum_{t<=T} f_t over {x in X : g_t(x) <= 0 for all t <= T},
/// repeated T times.
ComparatorSequence static_comparator(const ProblemInstance& instance, Index T,
                                     const SolverOptions& opts = {});

/// Per-round minimizers of f_t over {x in X : g_t(x) <= 0}.
ComparatorSequence dynamic_comparator(const ProblemInstance& instance, Index T,
                                      const SolverOptions& opts = {});

/// Solves one round's constrained problem.
SolveResult solve_round(const std::vector<LocalProblem>& round,
                        const ProblemInstance& instance,
                        const SolverOptions& opts,
                        const std::optional<Vector>& warm = std::nullopt);

/// One row of the metrics CSV.
struct MetricsRow {
  Index T = 0;
  double regret_static = 0.0;
  double regret_dynamic = 0.0;
  double cum_violation = 0.0;
  double std_violation = 0.0;
  double path_length = 0.0;
  double disagreement_max = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "T,regret_static,regret_dynamic,cum_violation,std_violation,path_length,"
    "disagreement_max";

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

void write_metrics_row(std::ostream& out, const MetricsRow& row);

/// Parses a metrics CSV (comment lines starting with '#' are skipped).
std::vector<MetricsRow> read_metrics_csv(std::istream& in);

}  // namespace distoco
