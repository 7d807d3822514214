#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "distoco/core.hpp"
#include "distoco/decision_set.hpp"
#include "distoco/network.hpp"
#include "distoco/problem.hpp"

namespace distoco {

/// Primal decision and dual variable held by one agent.
struct AgentState {
  Vector x;
  Vector q;
};

enum class ScheduleKind {
  kConvexFull,
  kStronglyConvexFull,
  kConvexBandit,
  kStronglyConvexBandit,
};

/// Step sizes for round t. xi and delta are zero for full-information kinds.
struct StepSizes {
  Index t = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double xi = 0.0;
  double delta = 0.0;
};

/// Decreasing step-size sequences
///   alpha_t = alpha0 / t^kappa   (convex)     or 1 / t^c   (strongly convex)
///   beta_t  = 1 / t^kappa,  gamma_t = 1 / t^(1-kappa)
///   xi_t    = 1 / (t+1),    delta_t = r(X) / (t+1)        (bandit kinds)
/// so that gamma_t * beta_t = 1/t and delta_t = r(X) xi_t.
class StepSchedule {
 public:
  static StepSchedule convex_full(double alpha0, double kappa);
  static StepSchedule strongly_convex_full(double kappa, double c);
  static StepSchedule convex_bandit(double alpha0, double kappa,
                                    double inner_radius);
  static StepSchedule strongly_convex_bandit(double kappa, double c,
                                             double inner_radius);

  ScheduleKind kind() const { return kind_; }
  bool bandit() const {
    return kind_ == ScheduleKind::kConvexBandit ||
           kind_ == ScheduleKind::kStronglyConvexBandit;
  }
  bool strongly_convex() const {
    return kind_ == ScheduleKind::kStronglyConvexFull ||
           kind_ == ScheduleKind::kStronglyConvexBandit;
  }
  double alpha0() const { return alpha0_; }
  double kappa() const { return kappa_; }
  double c() const { return c_; }
  double inner_radius() const { return r_; }

  StepSizes at(Index t) const;

 private:
  StepSchedule(ScheduleKind kind, double alpha0, double kappa, double c,
               double r);

  ScheduleKind kind_;
  double alpha0_;
  double kappa_;
  double c_;
  double r_;
};

inline StepSizes schedule_at(const StepSchedule& s, Index t) { return s.at(t); }

/// A decision received over the network: agent `from` sent `x`, weighted by
/// W(to, from).
struct Message {
  Index from = 0;
  double weight = 0.0;
  const Vector* x = nullptr;
};
using Inbox = std::vector<Message>;

/// Called for every delivered message (from, to). Lets tests verify that an
/// agent only hears from its in-neighbors.
using MessageObserver = std::function<void(Index from, Index to)>;

/// The messages agent i receives in a round: its own decision plus those of
/// every j with W(i, j) > 0.
Inbox gather_inbox(const MixingMatrix& W, std::span<const AgentState> states,
                   Index i, const MessageObserver* observer = nullptr);

/// z_i = sum over the inbox of weight * x.
Vector consensus_point(const Inbox& inbox, Index dim);

struct AgentUpdate {
  AgentState next;
  Vector consensus_error;   ///< x_{i,t+1} - z_{i,t+1}
  Vector sample_point;      ///< x + delta u (bandit only)
  double loss_gradient_norm = 0.0;
  double constraint_gradient_norm = 0.0;  ///< spectral norm of d[g]_+
};

struct RoundDiagnostics {
  std::vector<Vector> consensus_error;
  std::vector<Vector> sample_points;  ///< bandit only
  std::vector<double> loss_gradient_norms;
  std::vector<double> constraint_gradient_norms;
};

struct RoundOutput {
  std::vector<AgentState> states;
  RoundDiagnostics diagnostics;
};

/// One agent's full-information update, using only its inbox and its own
/// oracles at round t. `next` carries alpha, beta, gamma for t+1.
AgentUpdate full_info_agent_step(const AgentState& self, const Inbox& inbox,
                                 const LocalProblem& oracle,
                                 const StepSizes& next, const DecisionSet& set);

/// Synchronized full-information round t: every agent reads the round-t
/// states, then all round-(t+1) states are produced.
RoundOutput full_info_round(std::span<const AgentState> states,
                            const MixingMatrix& W, Index round,
                            const std::vector<LocalProblem>& oracles,
                            const StepSizes& next, const DecisionSet& set,
                            const MessageObserver* observer = nullptr);

/// (p / delta) (f_sample - f_base) u from two sampled values.
Vector two_point_loss_gradient(double f_sample, double f_base, double delta,
                               const Eigen::Ref<const Vector>& u);

/// (p / delta) u ([g_sample]_+ - [g_base]_+)^T, a p x m matrix.
Matrix two_point_constraint_jacobian(const Eigen::Ref<const Vector>& g_sample,
                                     const Eigen::Ref<const Vector>& g_base,
                                     double delta,
                                     const Eigen::Ref<const Vector>& u);

/// Two-point loss gradient from oracle samples at x and x + delta u. Both
/// points must lie in `set`.
Vector two_point_loss_gradient(const LossOracle& f,
                               const Eigen::Ref<const Vector>& x, double delta,
                               const Eigen::Ref<const Vector>& u,
                               const DecisionSet& set);

Matrix two_point_constraint_jacobian(const ConstraintOracle& g,
                                     const Eigen::Ref<const Vector>& x,
                                     double delta,
                                     const Eigen::Ref<const Vector>& u,
                                     const DecisionSet& set);

/// One agent's bandit update. `current` supplies delta_t and xi_t, `next`
/// supplies alpha, beta, gamma and xi for t+1.
AgentUpdate bandit_agent_step(const AgentState& self, const Inbox& inbox,
                              const LocalProblem& oracle,
                              const StepSizes& current, const StepSizes& next,
                              const Eigen::Ref<const Vector>& direction,
                              const DecisionSet& set);

/// Synchronized two-point bandit round t with one exploration direction per
/// agent.
RoundOutput bandit_round(std::span<const AgentState> states,
                         const MixingMatrix& W, Index round,
                         const std::vector<LocalProblem>& oracles,
                         const StepSizes& current, const StepSizes& next,
                         const std::vector<Vector>& directions,
                         const DecisionSet& set,
                         const MessageObserver* observer = nullptr);

/// Uniform draw from the unit sphere in R^p by normalizing a Gaussian
/// vector.
template <typename Rng>
Vector sample_unit_sphere(Rng& rng, Index p) {
  require(p >= 1, "sample_unit_sphere: p must be >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector u(p);
  double norm = 0.0;
  do {
    for (Index k = 0; k < p; ++k) u(k) = gauss(rng);
    norm = u.norm();
  } while (!(norm > 1e-300));
  return u / norm;
}

/// Initial states: x is the projection of the origin into X (or into
/// (1 - xi_1) X for bandit schedules) unless `start` is given; q = 0.
std::vector<AgentState> initial_states(const ProblemInstance& instance,
                                       const StepSchedule& schedule,
                                       const std::optional<Vector>& start =
                                           std::nullopt);

inline constexpr double kUnitNormTolerance = 1e-12;

}  // namespace distoco
