#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <set>

#include "distoco/algorithms.hpp"
#include "micro_instances.hpp"
#include "reference.hpp"

using namespace distoco;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

class LinearLoss final : public LossOracle {
 public:
  explicit LinearLoss(Vector c, double offset = 0.0)
      : c_(std::move(c)), offset_(offset) {}
  Index dim() const override { return c_.size(); }
  double value(const Eigen::Ref<const Vector>& x) const override {
    return c_.dot(x) + offset_;
  }
  Vector subgradient(const Eigen::Ref<const Vector>&) const override {
    return c_;
  }

 private:
  Vector c_;
  double offset_;
};

// Records the points at which it is queried.
class LoggingLoss final : public LossOracle {
 public:
  LoggingLoss(std::shared_ptr<const LossOracle> inner, std::vector<Vector>* log)
      : inner_(std::move(inner)), log_(log) {}
  Index dim() const override { return inner_->dim(); }
  double value(const Eigen::Ref<const Vector>& x) const override {
    log_->push_back(x);
    return inner_->value(x);
  }
  Vector subgradient(const Eigen::Ref<const Vector>& x) const override {
    log_->push_back(x);
    return inner_->subgradient(x);
  }

 private:
  std::shared_ptr<const LossOracle> inner_;
  std::vector<Vector>* log_;
};

class LoggingConstraint final : public ConstraintOracle {
 public:
  LoggingConstraint(std::shared_ptr<const ConstraintOracle> inner,
                    std::vector<Vector>* log)
      : inner_(std::move(inner)), log_(log) {}
  Index dim() const override { return inner_->dim(); }
  Index count() const override { return inner_->count(); }
  Vector value(const Eigen::Ref<const Vector>& x) const override {
    log_->push_back(x);
    return inner_->value(x);
  }
  Matrix subgradient(const Eigen::Ref<const Vector>& x) const override {
    log_->push_back(x);
    return inner_->subgradient(x);
  }

 private:
  std::shared_ptr<const ConstraintOracle> inner_;
  std::vector<Vector>* log_;
};

MixingMatrix mixing(const Eigen::MatrixXd& W) {
  double w = 1.0;
  for (Index k = 0; k < W.size(); ++k)
    if (W.data()[k] > 0.0) w = std::min(w, W.data()[k]);
  return MixingMatrix(W, w);
}

StepSizes steps(Index t, double alpha, double beta, double gamma) {
  StepSizes s;
  s.t = t;
  s.alpha = alpha;
  s.beta = beta;
  s.gamma = gamma;
  return s;
}

}  // namespace

TEST(StepSchedule, ConvexFullValues) {
  const auto s = StepSchedule::convex_full(1.0, 0.5);
  const auto s1 = s.at(1);
  EXPECT_DOUBLE_EQ(s1.alpha, 1.0);
  EXPECT_DOUBLE_EQ(s1.beta, 1.0);
  EXPECT_DOUBLE_EQ(s1.gamma, 1.0);
  const auto s16 = schedule_at(s, 16);
  EXPECT_DOUBLE_EQ(s16.alpha, 0.25);
  EXPECT_DOUBLE_EQ(s16.beta, 0.25);
  EXPECT_DOUBLE_EQ(s16.gamma, 0.25);
  EXPECT_EQ(s16.xi, 0.0);
  EXPECT_THROW(s.at(0), ArgumentError);
}

TEST(StepSchedule, BanditValues) {
  const auto s = StepSchedule::convex_bandit(1.0, 0.5, 5.0);
  const auto s4 = s.at(4);
  EXPECT_DOUBLE_EQ(s4.xi, 0.2);
  EXPECT_DOUBLE_EQ(s4.delta, 1.0);
}

TEST(StepSchedule, StronglyConvexUsesNoScale) {
  const auto s = StepSchedule::strongly_convex_full(0.4, 0.7);
  EXPECT_DOUBLE_EQ(s.at(8).alpha, 1.0 / std::pow(8.0, 0.7));
  EXPECT_THROW(StepSchedule::strongly_convex_full(0.4, 0.5), ArgumentError);
  EXPECT_THROW(StepSchedule::strongly_convex_full(0.5, 1.0), ArgumentError);
  EXPECT_NO_THROW(StepSchedule::strongly_convex_bandit(0.5, 0.5, 1.0));
}

TEST(StepSchedule, RejectsBadParameters) {
  EXPECT_THROW(StepSchedule::convex_full(0.0, 0.5), ArgumentError);
  EXPECT_THROW(StepSchedule::convex_full(1.0, 0.0), ArgumentError);
  EXPECT_THROW(StepSchedule::convex_full(1.0, 1.0), ArgumentError);
  EXPECT_THROW(StepSchedule::convex_bandit(1.0, 0.5, 0.0), ArgumentError);
}

TEST(StepSchedule, MonotoneAndProductProperties) {
  for (const auto& s :
       {StepSchedule::convex_full(2.0, 0.3), StepSchedule::strongly_convex_full(0.6, 0.8),
        StepSchedule::convex_bandit(0.5, 0.7, 5.0),
        StepSchedule::strongly_convex_bandit(0.5, 0.5, 2.0)}) {
    StepSizes prev = s.at(1);
    for (Index t = 1; t <= 5000; ++t) {
      const StepSizes cur = s.at(t);
      EXPECT_GT(cur.alpha, 0.0);
      EXPECT_NEAR(cur.gamma * cur.beta, 1.0 / static_cast<double>(t),
                  1e-15 / static_cast<double>(t) * 4);
      EXPECT_LE(cur.gamma * cur.beta, 1.0 + 1e-15);
      if (t > 1) {
        EXPECT_LE(cur.alpha, prev.alpha);
        EXPECT_LE(cur.beta, prev.beta);
        EXPECT_LE(cur.gamma, prev.gamma);
        EXPECT_LE(cur.xi, prev.xi);
      }
      if (s.bandit()) EXPECT_LE(cur.delta, s.inner_radius() * cur.xi * (1 + 1e-15));
      prev = cur;
    }
  }
}

TEST(FullInfoRound, ScalarHandExample) {
  const auto X = DecisionSet::symmetric_box(1, 5.0);
  LocalProblem lp{std::make_shared<LinearLoss>(vec({1})),
                  std::make_shared<AffineConstraint>(Matrix::Ones(1, 1), vec({1}))};
  std::vector<AgentState> states{{vec({0}), vec({0})}};
  const auto out = full_info_round(states, MixingMatrix(Matrix::Ones(1, 1), 1.0),
                                   1, {lp}, steps(2, 1, 1, 1), X);
  EXPECT_DOUBLE_EQ(out.states[0].x(0), -1.0);
  EXPECT_DOUBLE_EQ(out.states[0].q(0), 0.0);
}

TEST(FullInfoRound, InactiveConstraintsGiveProjectedGradientStep) {
  const auto X = DecisionSet::symmetric_box(2, 1.0);
  Matrix H = Matrix::Identity(2, 2);
  auto loss = std::make_shared<QuadraticRegressionLoss>(H, vec({4, -4}));
  auto con = std::make_shared<AffineConstraint>(Matrix::Identity(2, 2), vec({10, 10}));
  std::vector<AgentState> states{{vec({0.2, 0.1}), vec({0, 0})}};
  const auto out = full_info_round(states, MixingMatrix(Matrix::Ones(1, 1), 1.0), 3,
                                   {{loss, con}}, steps(4, 0.3, 0.5, 0.5), X);
  const Vector expected = project(X, Vector(vec({0.2, 0.1}) - 0.3 * loss->subgradient(vec({0.2, 0.1}))));
  EXPECT_EQ(out.states[0].x, expected);
  EXPECT_EQ(out.states[0].q, vec({0, 0}));
}

TEST(FullInfoRound, SymmetricAgentsStayTogether) {
  const auto X = DecisionSet::symmetric_box(2, 5.0);
  auto loss = std::make_shared<QuadraticRegressionLoss>(Matrix::Identity(2, 2), vec({1, 2}));
  auto con = std::make_shared<AffineConstraint>(Matrix::Ones(1, 2), vec({0.5}));
  const auto W = generate_er_path_mixing(4, 0.5, 1, 0);
  std::vector<AgentState> states(4, {vec({1, 1}), vec({0.3})});
  std::vector<LocalProblem> oracles(4, {loss, con});
  const auto out = full_info_round(states, W, 1, oracles, steps(2, 0.1, 0.5, 0.5), X);
  for (int i = 1; i < 4; ++i) {
    EXPECT_TRUE(out.states[i].x.isApprox(out.states[0].x, 1e-15));
    EXPECT_EQ(out.states[i].q, out.states[0].q);
  }
}

TEST(FullInfoRound, RejectsScheduleMismatch) {
  const auto X = DecisionSet::symmetric_box(1, 5.0);
  LocalProblem lp{std::make_shared<LinearLoss>(vec({1})),
                  std::make_shared<AffineConstraint>(Matrix::Ones(1, 1), vec({1}))};
  std::vector<AgentState> states{{vec({0}), vec({0})}};
  const MixingMatrix W(Matrix::Ones(1, 1), 1.0);
  EXPECT_THROW(full_info_round(states, W, 1, {lp}, steps(1, 1, 1, 1), X),
               ArgumentError);
  EXPECT_THROW(full_info_round(states, W, 1, {}, steps(2, 1, 1, 1), X),
               ArgumentError);
}

TEST(FullInfoRound, MatchesReferenceOnMicroInstances) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto in = micro::make(rng, false);
    const auto X = DecisionSet::symmetric_box(in.p, in.h);
    const auto s = steps(in.round + 1, 0.7 / (in.round + 1), 0.5, 0.8);
    const auto out = full_info_round(in.states, mixing(in.W), in.round, in.oracles, s, X);
    std::vector<Eigen::VectorXd> xs, qs, xr, qr;
    for (const auto& st : in.states) {
      xs.push_back(st.x);
      qs.push_back(st.q);
    }
    reference::full_info_round(in.W, in.locals, xs, qs, {s.alpha, s.beta, s.gamma},
                               in.h, xr, qr);
    for (Index i = 0; i < in.n; ++i) {
      EXPECT_LE((out.states[i].x - xr[i]).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LE((out.states[i].q - qr[i]).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(FullInfoRound, ReadsOnlyNeighborsAndOwnOracles) {
  const Index n = 6;
  RegressionStreamOptions opts;
  opts.agents = n;
  opts.dim = 3;
  opts.horizon = 5;
  const auto inst = generate_regression_stream(opts);
  auto states = initial_states(inst, StepSchedule::convex_full(1.0, 0.5));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (auto& s : states)
    for (Index k = 0; k < 3; ++k) s.x(k) = u(rng);

  for (Index t = 1; t <= 5; ++t) {
    const auto W = generate_er_path_mixing(n, 0.2, t, 9);
    std::vector<std::vector<Vector>> logs(static_cast<std::size_t>(n));
    std::vector<LocalProblem> oracles;
    for (Index i = 0; i < n; ++i) {
      const auto lp = inst.local(i, t);
      auto* log = &logs[static_cast<std::size_t>(i)];
      oracles.push_back({std::make_shared<LoggingLoss>(lp.loss, log),
                         std::make_shared<LoggingConstraint>(lp.constraint, log)});
    }
    std::set<std::pair<Index, Index>> heard;
    MessageObserver observer = [&](Index from, Index to) { heard.insert({from, to}); };
    const auto out = full_info_round(states, W, t, oracles,
                                     steps(t + 1, 0.5, 0.5, 0.5), inst.set(), &observer);
    for (const auto& [from, to] : heard) EXPECT_GT(W(to, from), 0.0);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i != j && W(i, j) > 0.0) EXPECT_TRUE(heard.count({j, i}));
    for (Index i = 0; i < n; ++i) {
      ASSERT_FALSE(logs[static_cast<std::size_t>(i)].empty());
      for (const auto& x : logs[static_cast<std::size_t>(i)])
        EXPECT_EQ(x, states[static_cast<std::size_t>(i)].x);
    }
    states = out.states;
  }
}

TEST(FullInfoRound, SingleAgentMatchesCentralizedTemplate) {
  RegressionStreamOptions opts;
  opts.agents = 1;
  opts.dim = 3;
  opts.horizon = 200;
  opts.seed = 5;
  const auto inst = generate_regression_stream(opts);
  const auto schedule = StepSchedule::convex_full(0.5, 0.4);
  auto states = initial_states(inst, schedule);
  Vector x = states[0].x, q = states[0].q;
  const MixingMatrix W(Matrix::Ones(1, 1), 1.0);
  for (Index t = 1; t <= 200; ++t) {
    const auto round = inst.round(t);
    const auto s = schedule.at(t + 1);
    states = full_info_round(states, W, t, round, s, inst.set()).states;

    const auto& f = *round[0].loss;
    const auto& g = *round[0].constraint;
    const Vector gx = g.value(x);
    Matrix J = g.subgradient(x);
    for (Index j = 0; j < gx.size(); ++j)
      if (gx(j) < 0.0) J.col(j).setZero();
    const Vector x_next = project(inst.set(), Vector(x - s.alpha * (f.subgradient(x) + J * q)));
    const Vector b = gx.cwiseMax(0.0) + J.transpose() * (x_next - x);
    q = ((1.0 - s.beta * s.gamma) * q + s.gamma * b).cwiseMax(0.0);
    x = x_next;
    ASSERT_EQ(states[0].x, x) << "round " << t;
    ASSERT_EQ(states[0].q, q) << "round " << t;
  }
}

TEST(TwoPointEstimator, LinearAndConstantLosses) {
  const auto X = DecisionSet::symmetric_box(3, 5.0);
  LinearLoss f(vec({2, -1, 4}));
  const Vector g = two_point_loss_gradient(f, vec({0, 0, 0}), 0.3, vec({1, 0, 0}), X);
  EXPECT_NEAR(g(0), 3 * 2.0, 1e-12);
  EXPECT_EQ(g(1), 0.0);
  EXPECT_EQ(g(2), 0.0);
  LinearLoss c(vec({0, 0, 0}), 7.0);
  EXPECT_EQ(two_point_loss_gradient(c, vec({1, 1, 1}), 0.5, vec({0, 1, 0}), X),
            vec({0, 0, 0}));
}

TEST(TwoPointEstimator, Preconditions) {
  const auto X = DecisionSet::symmetric_box(2, 1.0);
  LinearLoss f(vec({1, 1}));
  EXPECT_THROW(two_point_loss_gradient(f, vec({0.9, 0}), 0.5, vec({1, 0}), X),
               ArgumentError);
  EXPECT_THROW(two_point_loss_gradient(f, vec({0, 0}), 0.5, vec({1, 1}), X),
               ArgumentError);
  EXPECT_THROW(two_point_loss_gradient(f, vec({0, 0}), 0.0, vec({1, 0}), X),
               ArgumentError);
  EXPECT_THROW(two_point_loss_gradient(f, vec({2, 0}), 0.1, vec({1, 0}), X),
               ArgumentError);
}

TEST(TwoPointEstimator, MonteCarloMeanMatchesGradient) {
  const Index p = 3;
  const auto X = DecisionSet::symmetric_box(p, 5.0);
  Matrix H(2, 3);
  H << 1, -0.5, 0.3, 0.2, 0.8, -1;
  QuadraticRegressionLoss f(H, vec({0.5, -1}));
  const Vector x = vec({0.4, -0.7, 1.1});
  const double delta = 0.5;
  SplitMix64 rng(99);
  const int N = 100000;
  Vector mean = Vector::Zero(p), sq = Vector::Zero(p);
  for (int k = 0; k < N; ++k) {
    const Vector u = sample_unit_sphere(rng, p);
    const Vector g = two_point_loss_gradient(f, x, delta, u, X);
    mean += g;
    sq += g.cwiseProduct(g);
  }
  mean /= N;
  const Vector var = sq / N - mean.cwiseProduct(mean);
  const Vector exact = f.subgradient(x);
  for (Index k = 0; k < p; ++k)
    EXPECT_LE(std::abs(mean(k) - exact(k)), 3.0 * std::sqrt(var(k) / N)) << k;
}

TEST(TwoPointJacobian, Examples) {
  const auto X = DecisionSet::symmetric_box(1, 5.0);
  AffineConstraint g(Matrix::Ones(1, 1), vec({1}));
  const Matrix J = two_point_constraint_jacobian(g, vec({2}), 0.1, vec({1}), X);
  EXPECT_NEAR(J(0, 0), 1.0, 1e-12);

  const auto X2 = DecisionSet::symmetric_box(2, 5.0);
  AffineConstraint neg(Matrix::Identity(2, 2), vec({10, 10}));
  EXPECT_EQ(two_point_constraint_jacobian(neg, vec({0, 0}), 0.5, vec({0, 1}), X2),
            Matrix::Zero(2, 2));

  Matrix A(3, 2);
  A << 1, 2, -1, 0.5, 0.3, -0.2;
  AffineConstraint mixed(A, vec({0.1, -0.3, 0.2}));
  const Vector x = vec({0.2, 0.05}), u = vec({0.6, -0.8});
  const double delta = 0.25;
  const Matrix got = two_point_constraint_jacobian(mixed, x, delta, u, X2);
  for (Index j = 0; j < 3; ++j) {
    const double lo = std::max(0.0, A.row(j).dot(x) - mixed.a()(j));
    const double hi = std::max(0.0, A.row(j).dot(x + delta * u) - mixed.a()(j));
    for (Index k = 0; k < 2; ++k)
      EXPECT_NEAR(got(k, j), 2.0 / delta * (hi - lo) * u(k), 1e-13);
  }
}

TEST(BanditRound, ScalarHandExample) {
  // f(x) = x, g(x) = x - 1 on [-5, 5]; t = 1 so xi_1 = 1/2 and the state lies
  // in [-2.5, 2.5]. x = 0, q = 0, u = 1, delta = 0.5.
  const auto X = DecisionSet::symmetric_box(1, 5.0);
  LocalProblem lp{std::make_shared<LinearLoss>(vec({1})),
                  std::make_shared<AffineConstraint>(Matrix::Ones(1, 1), vec({1}))};
  std::vector<AgentState> states{{vec({0}), vec({0})}};
  StepSizes cur = steps(1, 1, 1, 1);
  cur.xi = 0.5;
  cur.delta = 0.5;
  StepSizes next = steps(2, 1, 1, 1);
  next.xi = 1.0 / 3.0;
  const auto out = bandit_round(states, MixingMatrix(Matrix::Ones(1, 1), 1.0), 1,
                                {lp}, cur, next, {vec({1})}, X);
  // Estimated gradient (1/0.5)(0.5 - 0) = 1; g stays negative at both points.
  EXPECT_DOUBLE_EQ(out.states[0].x(0), -1.0);
  EXPECT_DOUBLE_EQ(out.states[0].q(0), 0.0);
  EXPECT_DOUBLE_EQ(out.diagnostics.sample_points[0](0), 0.5);

  // Large step: the projection targets the shrunk box [-10/3, 10/3].
  next.alpha = 10.0;
  const auto far = bandit_round(states, MixingMatrix(Matrix::Ones(1, 1), 1.0), 1,
                                {lp}, cur, next, {vec({1})}, X);
  EXPECT_NEAR(far.states[0].x(0), -5.0 * (2.0 / 3.0), 1e-15);
}

TEST(BanditRound, AffineLossAlongDirection) {
  const auto X = DecisionSet::symmetric_box(3, 5.0);
  const Vector c = vec({1, -2, 0.5});
  LocalProblem lp{std::make_shared<LinearLoss>(c),
                  std::make_shared<AffineConstraint>(Matrix::Ones(1, 3), vec({100}))};
  std::vector<AgentState> states{{vec({0.1, 0.2, 0.3}), vec({0})}};
  StepSizes cur = steps(3, 0.1, 0.5, 0.5);
  cur.xi = 0.25;
  cur.delta = 1.25;
  StepSizes next = steps(4, 0.1, 0.5, 0.5);
  next.xi = 0.2;
  const auto out = bandit_round(states, MixingMatrix(Matrix::Ones(1, 1), 1.0), 3,
                                {lp}, cur, next, {vec({1, 0, 0})}, X);
  const Vector expected = vec({0.1, 0.2, 0.3}) - 0.1 * Vector(vec({3.0 * c(0), 0, 0}));
  EXPECT_TRUE(out.states[0].x.isApprox(expected, 1e-14));
}

TEST(BanditRound, RejectsBadInputs) {
  const auto X = DecisionSet::symmetric_box(1, 5.0);
  LocalProblem lp{std::make_shared<LinearLoss>(vec({1})),
                  std::make_shared<AffineConstraint>(Matrix::Ones(1, 1), vec({1}))};
  const MixingMatrix W(Matrix::Ones(1, 1), 1.0);
  StepSizes cur = steps(1, 1, 1, 1);
  cur.xi = 0.5;
  cur.delta = 0.5;
  StepSizes next = steps(2, 1, 1, 1);
  next.xi = 1.0 / 3.0;
  std::vector<AgentState> ok{{vec({0}), vec({0})}};
  EXPECT_THROW(bandit_round(ok, W, 1, {lp}, cur, next, {vec({0.5})}, X), ArgumentError);
  std::vector<AgentState> outside{{vec({3.0}), vec({0})}};
  EXPECT_THROW(bandit_round(outside, W, 1, {lp}, cur, next, {vec({1})}, X),
               ArgumentError);
  EXPECT_THROW(bandit_round(ok, W, 2, {lp}, cur, next, {vec({1})}, X), ArgumentError);
}

TEST(BanditRound, MatchesReferenceOnMicroInstances) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const auto in = micro::make(rng, true);
    const auto X = DecisionSet::symmetric_box(in.p, in.h);
    const auto schedule = StepSchedule::convex_bandit(0.8, 0.5, in.h);
    const auto cur = schedule.at(in.round);
    const auto next = schedule.at(in.round + 1);
    std::vector<Vector> dirs(in.directions.begin(), in.directions.end());
    const auto out = bandit_round(in.states, mixing(in.W), in.round, in.oracles, cur,
                                  next, dirs, X);
    std::vector<Eigen::VectorXd> xs, qs, xr, qr;
    for (const auto& st : in.states) {
      xs.push_back(st.x);
      qs.push_back(st.q);
    }
    reference::bandit_round(in.W, in.locals, xs, qs, in.directions, cur.delta, next.xi,
                            {next.alpha, next.beta, next.gamma}, in.h, xr, qr);
    for (Index i = 0; i < in.n; ++i) {
      EXPECT_LE((out.states[i].x - xr[i]).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LE((out.states[i].q - qr[i]).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(BanditRound, DeterministicForSameInputs) {
  std::mt19937_64 rng(5);
  const auto in = micro::make(rng, true);
  const auto X = DecisionSet::symmetric_box(in.p, in.h);
  const auto schedule = StepSchedule::convex_bandit(1.0, 0.5, in.h);
  std::vector<Vector> dirs(in.directions.begin(), in.directions.end());
  const auto a = bandit_round(in.states, mixing(in.W), in.round, in.oracles,
                              schedule.at(in.round), schedule.at(in.round + 1), dirs, X);
  const auto b = bandit_round(in.states, mixing(in.W), in.round, in.oracles,
                              schedule.at(in.round), schedule.at(in.round + 1), dirs, X);
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    EXPECT_EQ(a.states[i].x, b.states[i].x);
    EXPECT_EQ(a.states[i].q, b.states[i].q);
  }
}

TEST(SampleUnitSphere, OneDimensionalSigns) {
  SplitMix64 rng(3);
  int plus = 0;
  const int N = 20000;
  for (int k = 0; k < N; ++k) {
    const Vector u = sample_unit_sphere(rng, 1);
    ASSERT_EQ(std::abs(u(0)), 1.0);
    plus += u(0) > 0;
  }
  EXPECT_LE(std::abs(plus - N / 2), 3 * std::sqrt(N / 4.0));
  EXPECT_THROW(sample_unit_sphere(rng, 0), ArgumentError);
}

TEST(SampleUnitSphere, UnitNormAndCenteredMean) {
  SplitMix64 rng(8);
  const Index p = 4;
  const int N = 1000000;
  Vector mean = Vector::Zero(p);
  for (int k = 0; k < N; ++k) {
    const Vector u = sample_unit_sphere(rng, p);
    ASSERT_LE(std::abs(u.norm() - 1.0), 1e-12);
    mean += u;
  }
  mean /= N;
  // Each coordinate has variance 1/p, so 3 sigma is 3 / sqrt(p N).
  EXPECT_LE(mean.cwiseAbs().maxCoeff(), 3.0 / std::sqrt(static_cast<double>(p) * N));
  EXPECT_LE(mean.cwiseAbs().maxCoeff(), 4.0 / std::sqrt(static_cast<double>(N)));
}

TEST(InitialStates, OriginOrOverride) {
  RegressionStreamOptions opts;
  opts.agents = 2;
  opts.dim = 2;
  opts.horizon = 2;
  const auto inst = generate_regression_stream(opts);
  const auto full = initial_states(inst, StepSchedule::convex_full(1, 0.5));
  EXPECT_EQ(full[1].x, Vector::Zero(2));
  EXPECT_EQ(full[1].q, Vector::Zero(2));
  const auto bandit = initial_states(inst, StepSchedule::convex_bandit(1, 0.5, 5.0),
                                     vec({2.5, -2.5}));
  EXPECT_EQ(bandit[0].x, vec({2.5, -2.5}));
  EXPECT_THROW(initial_states(inst, StepSchedule::convex_bandit(1, 0.5, 5.0),
                              vec({3.0, 0.0})),
               ArgumentError);
}
