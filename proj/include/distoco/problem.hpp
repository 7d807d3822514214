#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "distoco/core.hpp"
#include "distoco/decision_set.hpp"

namespace distoco {

/// f(x) = 0.5 x'Qx - b'x + c
struct QuadraticForm {
  Matrix Q;
  Vector b;
  double c = 0.0;

  double value(const Eigen::Ref<const Vector>& x) const {
    return 0.5 * x.dot(Q * x) - b.dot(x) + c;
  }
};

/// g(x) = A x - a, one row per scalar constraint.
struct AffineForm {
  Matrix A;
  Vector a;
};

/// Local loss f_{i,t}. Implementations must be pure and reentrant.
class LossOracle {
 public:
  virtual ~LossOracle() = default;
  virtual Index dim() const = 0;
  virtual double value(const Eigen::Ref<const Vector>& x) const = 0;
  virtual Vector subgradient(const Eigen::Ref<const Vector>& x) const = 0;
  /// Closed form, when the loss is quadratic. Used by comparator solvers.
  virtual std::optional<QuadraticForm> quadratic_form() const {
    return std::nullopt;
  }
};

/// Local constraint g_{i,t} with values in R^m. The subgradient is the p x m
/// matrix whose column j is a subgradient of g_j.
class ConstraintOracle {
 public:
  virtual ~ConstraintOracle() = default;
  virtual Index dim() const = 0;
  virtual Index count() const = 0;
  virtual Vector value(const Eigen::Ref<const Vector>& x) const = 0;
  virtual Matrix subgradient(const Eigen::Ref<const Vector>& x) const = 0;
  virtual std::optional<AffineForm> affine_form() const {
    return std::nullopt;
  }
};

/// f(x) = 0.5 ||H x - z||^2 + 0.5 ridge ||x||^2
class QuadraticRegressionLoss final : public LossOracle {
 public:
  QuadraticRegressionLoss(Matrix H, Vector z, double ridge = 0.0);

  Index dim() const override { return H_.cols(); }
  double value(const Eigen::Ref<const Vector>& x) const override;
  Vector subgradient(const Eigen::Ref<const Vector>& x) const override;
  std::optional<QuadraticForm> quadratic_form() const override;

  const Matrix& H() const { return H_; }
  const Vector& z() const { return z_; }
  double ridge() const { return ridge_; }

 private:
  Matrix H_;
  Vector z_;
  double ridge_;
};

/// g(x) = A x - a
class AffineConstraint final : public ConstraintOracle {
 public:
  AffineConstraint(Matrix A, Vector a);

  Index dim() const override { return A_.cols(); }
  Index count() const override { return A_.rows(); }
  Vector value(const Eigen::Ref<const Vector>& x) const override {
    return A_ * x - a_;
  }
  Matrix subgradient(const Eigen::Ref<const Vector>&) const override {
    return A_.transpose();
  }
  std::optional<AffineForm> affine_form() const override {
    return AffineForm{A_, a_};
  }

  const Matrix& A() const { return A_; }
  const Vector& a() const { return a_; }

 private:
  Matrix A_;
  Vector a_;
};

/// Average of several losses; the global loss f_t seen by a single agent.
class AverageLoss final : public LossOracle {
 public:
  explicit AverageLoss(std::vector<std::shared_ptr<const LossOracle>> parts);

  Index dim() const override { return parts_.front()->dim(); }
  double value(const Eigen::Ref<const Vector>& x) const override;
  Vector subgradient(const Eigen::Ref<const Vector>& x) const override;
  std::optional<QuadraticForm> quadratic_form() const override;

 private:
  std::vector<std::shared_ptr<const LossOracle>> parts_;
};

/// Vertical stack col(g_1, ..., g_k) of constraint blocks.
class StackedConstraint final : public ConstraintOracle {
 public:
  explicit StackedConstraint(
      std::vector<std::shared_ptr<const ConstraintOracle>> parts);

  Index dim() const override { return parts_.front()->dim(); }
  Index count() const override { return count_; }
  Vector value(const Eigen::Ref<const Vector>& x) const override;
  Matrix subgradient(const Eigen::Ref<const Vector>& x) const override;
  std::optional<AffineForm> affine_form() const override;

 private:
  std::vector<std::shared_ptr<const ConstraintOracle>> parts_;
  Index count_ = 0;
};

/// Componentwise max(g, 0).
template <typename Derived>
Vector clipped_value(const Eigen::MatrixBase<Derived>& g) {
  return g.derived().cwiseMax(0.0);
}

/// Subgradient of [g]_+ given g's value and Jacobian (p x m): column j is
/// kept when g_j >= 0 and zeroed when g_j < 0.
Matrix clip_jacobian(const Eigen::Ref<const Vector>& g, Matrix jacobian);

/// Subgradient of [g]_+ at x, p x m.
Matrix clipped_subgradient(const ConstraintOracle& c,
                           const Eigen::Ref<const Vector>& x);

/// Uniform bounds over X for every local loss and constraint of an instance.
struct ProblemConstants {
  double F1 = 0.0;  ///< |f(x)-f(y)| <= F1 and ||g(x)|| <= F1 on X
  double F2 = 0.0;  ///< ||df(x)|| <= F2 and ||dg(x)|| <= F2 on X
  double mu = 0.0;  ///< strong convexity modulus of every loss (0 if none)
  double inner_radius = 0.0;
  double outer_radius = 0.0;
};

/// Accumulates sound bounds from closed-form oracles (quadratic losses and
/// affine constraints) over a decision set.
class ConstantsAccumulator {
 public:
  explicit ConstantsAccumulator(const DecisionSet& set);

  void add_loss(const LossOracle& loss);
  void add_constraint(const ConstraintOracle& constraint);
  ProblemConstants result() const;

 private:
  const DecisionSet* set_;
  double F1_ = 0.0;
  double F2_ = 0.0;
  double mu_ = std::numeric_limits<double>::infinity();
};

/// The oracles revealed to one agent in one round.
struct LocalProblem {
  std::shared_ptr<const LossOracle> loss;
  std::shared_ptr<const ConstraintOracle> constraint;
};

/// A stream of local problems over n agents and T rounds. Rounds are
/// 1-based (t = 1..T); agents are 0-based.
class ProblemInstance {
 public:
  using Generator = std::function<LocalProblem(Index agent, Index round)>;

  ProblemInstance(Index agents, std::vector<Index> constraint_dims,
                  Index horizon, DecisionSet set, Generator generator,
                  ProblemConstants constants,
                  std::optional<Vector> feasible_point = std::nullopt);

  Index agents() const { return agents_; }
  Index dim() const { return set_.dim(); }
  Index horizon() const { return horizon_; }
  const std::vector<Index>& constraint_dims() const { return m_; }
  Index total_constraints() const { return total_m_; }
  const DecisionSet& set() const { return set_; }
  const ProblemConstants& constants() const { return constants_; }
  /// A point feasible for every round, when one is known.
  const std::optional<Vector>& feasible_point() const { return feasible_; }

  LocalProblem local(Index agent, Index round) const;
  std::vector<LocalProblem> round(Index round) const;

  /// f_t(x) = (1/n) sum_j f_{j,t}(x)
  double global_loss(Index round, const Eigen::Ref<const Vector>& x) const;
  /// g_t(x) = col(g_{1,t}(x), ..., g_{n,t}(x))
  Vector global_constraint(Index round,
                           const Eigen::Ref<const Vector>& x) const;

 private:
  Index agents_;
  std::vector<Index> m_;
  Index total_m_ = 0;
  Index horizon_;
  DecisionSet set_;
  Generator generator_;
  ProblemConstants constants_;
  std::optional<Vector> feasible_;
};

/// Helpers evaluating the global f_t and g_t from an already generated round.
double global_loss(const std::vector<LocalProblem>& round,
                   const Eigen::Ref<const Vector>& x);
Vector global_constraint(const std::vector<LocalProblem>& round,
                         const Eigen::Ref<const Vector>& x);

/// The single-agent instance holding every local function of `instance`:
/// the averaged loss f_t and the stacked constraint g_t.
ProblemInstance centralize(const ProblemInstance& instance);

struct RegressionStreamOptions {
  Index agents = 100;
  Index dim = 10;             // p
  Index observations = 4;     // d_i
  Index constraints = 2;      // m_i
  Index horizon = 1000;       // T
  std::uint64_t seed = 0;
  double half_width = 5.0;    // X = [-half_width, half_width]^p
  double ridge = 0.0;         // optional strongly convex term
};

/// Online linear regression with time-varying linear constraints:
///   H ~ U[-1,1], z = H 1 + N(0, I), A ~ U[0,2], a ~ U[0,1].
/// The origin is feasible for every round. Deterministic in the seed; each
/// (agent, round, purpose) draws from its own stream.
ProblemInstance generate_regression_stream(const RegressionStreamOptions& opts);

/// Writes H, z, A, a of every local problem as
/// `round,agent,matrix,row,col,value` rows. Vectors use col = 0.
void write_instance_csv(const ProblemInstance& instance, std::ostream& out);

}  // namespace distoco
