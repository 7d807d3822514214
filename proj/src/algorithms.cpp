#include "distoco/algorithms.hpp"

#include <algorithm>
#include <cmath>

namespace distoco {

namespace {

void check_kappa(double kappa) {
  require(kappa > 0.0 && kappa < 1.0, "StepSchedule: kappa must lie in (0, 1)");
}

void check_c(double kappa, double c) {
  require(c >= std::max(kappa, 1.0 - kappa) && c < 1.0,
          "StepSchedule: c must lie in [max(kappa, 1 - kappa), 1)");
}

double containment_slack(const DecisionSet& set) {
  return 1e-12 * (1.0 + set.outer_radius());
}

double spectral_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
}

Vector dual_update(const Vector& q, const Vector& g, const Matrix& jacobian,
                   const Vector& step, const StepSizes& next) {
  const Vector b = clipped_value(g) + jacobian.transpose() * step;
  return clipped_value((1.0 - next.beta * next.gamma) * q + next.gamma * b);
}

}  // namespace

StepSchedule::StepSchedule(ScheduleKind kind, double alpha0, double kappa,
                           double c, double r)
    : kind_(kind), alpha0_(alpha0), kappa_(kappa), c_(c), r_(r) {}

StepSchedule StepSchedule::convex_full(double alpha0, double kappa) {
  require(alpha0 > 0.0, "StepSchedule: alpha0 must be positive");
  check_kappa(kappa);
  return StepSchedule(ScheduleKind::kConvexFull, alpha0, kappa, 0.0, 0.0);
}

StepSchedule StepSchedule::strongly_convex_full(double kappa, double c) {
  check_kappa(kappa);
  check_c(kappa, c);
  return StepSchedule(ScheduleKind::kStronglyConvexFull, 1.0, kappa, c, 0.0);
}

StepSchedule StepSchedule::convex_bandit(double alpha0, double kappa,
                                         double inner_radius) {
  require(alpha0 > 0.0, "StepSchedule: alpha0 must be positive");
  check_kappa(kappa);
  require(inner_radius > 0.0, "StepSchedule: r(X) must be positive");
  return StepSchedule(ScheduleKind::kConvexBandit, alpha0, kappa, 0.0,
                      inner_radius);
}

StepSchedule StepSchedule::strongly_convex_bandit(double kappa, double c,
                                                  double inner_radius) {
  check_kappa(kappa);
  check_c(kappa, c);
  require(inner_radius > 0.0, "StepSchedule: r(X) must be positive");
  return StepSchedule(ScheduleKind::kStronglyConvexBandit, 1.0, kappa, c,
                      inner_radius);
}

StepSizes StepSchedule::at(Index t) const {
  require(t >= 1, "StepSchedule::at: rounds start at 1");
  const double tt = static_cast<double>(t);
  StepSizes s;
  s.t = t;
  s.alpha = strongly_convex() ? 1.0 / std::pow(tt, c_)
                              : alpha0_ / std::pow(tt, kappa_);
  s.beta = 1.0 / std::pow(tt, kappa_);
  s.gamma = 1.0 / std::pow(tt, 1.0 - kappa_);
  if (bandit()) {
    s.xi = 1.0 / (tt + 1.0);
    s.delta = r_ / (tt + 1.0);
  }
  return s;
}

Inbox gather_inbox(const MixingMatrix& W, std::span<const AgentState> states,
                   Index i, const MessageObserver* observer) {
  require(static_cast<Index>(states.size()) == W.size(),
          "gather_inbox: one state per agent required");
  Inbox inbox;
  for (Index j = 0; j < W.size(); ++j) {
    const double weight = W(i, j);
    if (weight > 0.0) {
      if (observer && j != i) (*observer)(j, i);
      inbox.push_back({j, weight, &states[static_cast<std::size_t>(j)].x});
    }
  }
  return inbox;
}

Vector consensus_point(const Inbox& inbox, Index dim) {
  Vector z = Vector::Zero(dim);
  for (const Message& msg : inbox) z += msg.weight * (*msg.x);
  return z;
}

AgentUpdate full_info_agent_step(const AgentState& self, const Inbox& inbox,
                                 const LocalProblem& oracle,
                                 const StepSizes& next,
                                 const DecisionSet& set) {
  const Index p = set.dim();
  require(self.x.size() == p, "full_info_agent_step: state dimension mismatch");
  require(self.q.size() == oracle.constraint->count(),
          "full_info_agent_step: dual dimension mismatch");

  const Vector z = consensus_point(inbox, p);
  const Vector g = oracle.constraint->value(self.x);
  const Matrix jacobian =
      clip_jacobian(g, oracle.constraint->subgradient(self.x));
  const Vector loss_grad = oracle.loss->subgradient(self.x);

  const Vector omega = loss_grad + jacobian * self.q;
  AgentUpdate out;
  out.next.x = project(set, z - next.alpha * omega);
  out.next.q = dual_update(self.q, g, jacobian, out.next.x - self.x, next);
  out.consensus_error = out.next.x - z;
  out.loss_gradient_norm = loss_grad.norm();
  out.constraint_gradient_norm = spectral_norm(jacobian);
  return out;
}

namespace {

void check_round_inputs(std::span<const AgentState> states,
                        const MixingMatrix& W, Index round,
                        const std::vector<LocalProblem>& oracles,
                        const StepSizes& next) {
  require(static_cast<Index>(states.size()) == W.size(),
          "round: one state per agent required");
  require(oracles.size() == states.size(),
          "round: one local problem per agent required");
  require(next.t == round + 1,
          "round: schedule must be evaluated at round + 1");
}

}  // namespace

RoundOutput full_info_round(std::span<const AgentState> states,
                            const MixingMatrix& W, Index round,
                            const std::vector<LocalProblem>& oracles,
                            const StepSizes& next, const DecisionSet& set,
                            const MessageObserver* observer) {
  check_round_inputs(states, W, round, oracles, next);
  RoundOutput out;
  const std::size_t n = states.size();
  out.states.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Inbox inbox =
        gather_inbox(W, states, static_cast<Index>(i), observer);
    AgentUpdate update =
        full_info_agent_step(states[i], inbox, oracles[i], next, set);
    out.states.push_back(std::move(update.next));
    out.diagnostics.consensus_error.push_back(std::move(update.consensus_error));
    out.diagnostics.loss_gradient_norms.push_back(update.loss_gradient_norm);
    out.diagnostics.constraint_gradient_norms.push_back(
        update.constraint_gradient_norm);
  }
  return out;
}

Vector two_point_loss_gradient(double f_sample, double f_base, double delta,
                               const Eigen::Ref<const Vector>& u) {
  require(delta > 0.0, "two_point_loss_gradient: delta must be positive");
  const double p = static_cast<double>(u.size());
  return (p / delta) * (f_sample - f_base) * u;
}

Matrix two_point_constraint_jacobian(const Eigen::Ref<const Vector>& g_sample,
                                     const Eigen::Ref<const Vector>& g_base,
                                     double delta,
                                     const Eigen::Ref<const Vector>& u) {
  require(delta > 0.0, "two_point_constraint_jacobian: delta must be positive");
  require(g_sample.size() == g_base.size(),
          "two_point_constraint_jacobian: sample size mismatch");
  const double p = static_cast<double>(u.size());
  const Vector diff = clipped_value(g_sample) - clipped_value(g_base);
  return (p / delta) * u * diff.transpose();
}

namespace {

Vector checked_sample_point(const Eigen::Ref<const Vector>& x, double delta,
                            const Eigen::Ref<const Vector>& u,
                            const DecisionSet& set, const char* who) {
  require(u.size() == set.dim() && x.size() == set.dim(),
          std::string(who) + ": dimension mismatch");
  require(std::abs(u.norm() - 1.0) <= kUnitNormTolerance,
          std::string(who) + ": direction must be a unit vector");
  require(delta > 0.0, std::string(who) + ": delta must be positive");
  const double slack = containment_slack(set);
  require(set.contains(x, slack), std::string(who) + ": x outside the set");
  Vector y = x + delta * u;
  require(set.contains(y, slack),
          std::string(who) + ": sample point outside the set");
  return y;
}

}  // namespace

Vector two_point_loss_gradient(const LossOracle& f,
                               const Eigen::Ref<const Vector>& x, double delta,
                               const Eigen::Ref<const Vector>& u,
                               const DecisionSet& set) {
  const Vector y =
      checked_sample_point(x, delta, u, set, "two_point_loss_gradient");
  return two_point_loss_gradient(f.value(y), f.value(x), delta, u);
}

Matrix two_point_constraint_jacobian(const ConstraintOracle& g,
                                     const Eigen::Ref<const Vector>& x,
                                     double delta,
                                     const Eigen::Ref<const Vector>& u,
                                     const DecisionSet& set) {
  const Vector y =
      checked_sample_point(x, delta, u, set, "two_point_constraint_jacobian");
  return two_point_constraint_jacobian(g.value(y), g.value(x), delta, u);
}

AgentUpdate bandit_agent_step(const AgentState& self, const Inbox& inbox,
                              const LocalProblem& oracle,
                              const StepSizes& current, const StepSizes& next,
                              const Eigen::Ref<const Vector>& direction,
                              const DecisionSet& set) {
  const Index p = set.dim();
  require(self.q.size() == oracle.constraint->count(),
          "bandit_agent_step: dual dimension mismatch");
  require(current.xi > 0.0 && next.xi > 0.0,
          "bandit_agent_step: bandit schedule required");
  const DecisionSet current_set = shrink_set(set, current.xi);
  require(current_set.contains(self.x, containment_slack(set)),
          "bandit_agent_step: state outside the shrunk set");

  const Vector y =
      checked_sample_point(self.x, current.delta, direction, set,
                           "bandit_agent_step");
  const double f_base = oracle.loss->value(self.x);
  const double f_sample = oracle.loss->value(y);
  const Vector g_base = oracle.constraint->value(self.x);
  const Vector g_sample = oracle.constraint->value(y);

  const Vector loss_grad =
      two_point_loss_gradient(f_sample, f_base, current.delta, direction);
  const Matrix jacobian = two_point_constraint_jacobian(
      g_sample, g_base, current.delta, direction);

  const Vector z = consensus_point(inbox, p);
  const Vector omega = loss_grad + jacobian * self.q;
  AgentUpdate out;
  out.next.x = project(shrink_set(set, next.xi), z - next.alpha * omega);
  out.next.q =
      dual_update(self.q, g_base, jacobian, out.next.x - self.x, next);
  out.consensus_error = out.next.x - z;
  out.sample_point = y;
  out.loss_gradient_norm = loss_grad.norm();
  // Rank one: the Frobenius norm is the spectral norm.
  out.constraint_gradient_norm = jacobian.norm();
  return out;
}

RoundOutput bandit_round(std::span<const AgentState> states,
                         const MixingMatrix& W, Index round,
                         const std::vector<LocalProblem>& oracles,
                         const StepSizes& current, const StepSizes& next,
                         const std::vector<Vector>& directions,
                         const DecisionSet& set,
                         const MessageObserver* observer) {
  check_round_inputs(states, W, round, oracles, next);
  require(current.t == round, "bandit_round: current schedule must be at round");
  require(directions.size() == states.size(),
          "bandit_round: one direction per agent required");
  RoundOutput out;
  const std::size_t n = states.size();
  out.states.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Inbox inbox =
        gather_inbox(W, states, static_cast<Index>(i), observer);
    AgentUpdate update = bandit_agent_step(states[i], inbox, oracles[i],
                                           current, next, directions[i], set);
    out.states.push_back(std::move(update.next));
    out.diagnostics.consensus_error.push_back(std::move(update.consensus_error));
    out.diagnostics.sample_points.push_back(std::move(update.sample_point));
    out.diagnostics.loss_gradient_norms.push_back(update.loss_gradient_norm);
    out.diagnostics.constraint_gradient_norms.push_back(
        update.constraint_gradient_norm);
  }
  return out;
}

std::vector<AgentState> initial_states(const ProblemInstance& instance,
                                       const StepSchedule& schedule,
                                       const std::optional<Vector>& start) {
  const DecisionSet set = schedule.bandit()
                              ? shrink_set(instance.set(), schedule.at(1).xi)
                              : instance.set();
  Vector x0;
  if (start) {
    require(set.contains(*start),
            "initial_states: start point outside the initial set");
    x0 = *start;
  } else {
    x0 = project(set, Vector::Zero(instance.dim()));
  }
  std::vector<AgentState> states;
  for (Index i = 0; i < instance.agents(); ++i) {
    states.push_back(
        {x0, Vector::Zero(instance.constraint_dims()[static_cast<std::size_t>(i)])});
  }
  return states;
}

}  // namespace distoco
