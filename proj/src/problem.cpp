#include "distoco/problem.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

namespace distoco {

QuadraticRegressionLoss::QuadraticRegressionLoss(Matrix H, Vector z,
                                                 double ridge)
    : H_(std::move(H)), z_(std::move(z)), ridge_(ridge) {
  require(H_.rows() == z_.size(),
          "QuadraticRegressionLoss: H rows must match z size");
  require(ridge_ >= 0.0, "QuadraticRegressionLoss: ridge must be >= 0");
}

double QuadraticRegressionLoss::value(
    const Eigen::Ref<const Vector>& x) const {
  return 0.5 * (H_ * x - z_).squaredNorm() + 0.5 * ridge_ * x.squaredNorm();
}

Vector QuadraticRegressionLoss::subgradient(
    const Eigen::Ref<const Vector>& x) const {
  return H_.transpose() * (H_ * x - z_) + ridge_ * x;
}

std::optional<QuadraticForm> QuadraticRegressionLoss::quadratic_form() const {
  QuadraticForm form;
  form.Q = H_.transpose() * H_;
  form.Q.diagonal().array() += ridge_;
  form.b = H_.transpose() * z_;
  form.c = 0.5 * z_.squaredNorm();
  return form;
}

AffineConstraint::AffineConstraint(Matrix A, Vector a)
    : A_(std::move(A)), a_(std::move(a)) {
  require(A_.rows() == a_.size(), "AffineConstraint: A rows must match a");
}

AverageLoss::AverageLoss(std::vector<std::shared_ptr<const LossOracle>> parts)
    : parts_(std::move(parts)) {
  require(!parts_.empty(), "AverageLoss: no parts");
}

double AverageLoss::value(const Eigen::Ref<const Vector>& x) const {
  double sum = 0.0;
  for (const auto& part : parts_) sum += part->value(x);
  return sum / static_cast<double>(parts_.size());
}

Vector AverageLoss::subgradient(const Eigen::Ref<const Vector>& x) const {
  Vector sum = Vector::Zero(dim());
  for (const auto& part : parts_) sum += part->subgradient(x);
  return sum / static_cast<double>(parts_.size());
}

std::optional<QuadraticForm> AverageLoss::quadratic_form() const {
  QuadraticForm total{Matrix::Zero(dim(), dim()), Vector::Zero(dim()), 0.0};
  for (const auto& part : parts_) {
    auto form = part->quadratic_form();
    if (!form) return std::nullopt;
    total.Q += form->Q;
    total.b += form->b;
    total.c += form->c;
  }
  const double inv = 1.0 / static_cast<double>(parts_.size());
  total.Q *= inv;
  total.b *= inv;
  total.c *= inv;
  return total;
}

StackedConstraint::StackedConstraint(
    std::vector<std::shared_ptr<const ConstraintOracle>> parts)
    : parts_(std::move(parts)) {
  require(!parts_.empty(), "StackedConstraint: no parts");
  for (const auto& part : parts_) count_ += part->count();
}

Vector StackedConstraint::value(const Eigen::Ref<const Vector>& x) const {
  Vector out(count_);
  Index row = 0;
  for (const auto& part : parts_) {
    out.segment(row, part->count()) = part->value(x);
    row += part->count();
  }
  return out;
}

Matrix StackedConstraint::subgradient(const Eigen::Ref<const Vector>& x) const {
  Matrix out(dim(), count_);
  Index col = 0;
  for (const auto& part : parts_) {
    out.middleCols(col, part->count()) = part->subgradient(x);
    col += part->count();
  }
  return out;
}

std::optional<AffineForm> StackedConstraint::affine_form() const {
  AffineForm out{Matrix(count_, dim()), Vector(count_)};
  Index row = 0;
  for (const auto& part : parts_) {
    auto form = part->affine_form();
    if (!form) return std::nullopt;
    out.A.middleRows(row, part->count()) = form->A;
    out.a.segment(row, part->count()) = form->a;
    row += part->count();
  }
  return out;
}

Matrix clip_jacobian(const Eigen::Ref<const Vector>& g, Matrix jacobian) {
  require(jacobian.cols() == g.size(), "clip_jacobian: size mismatch");
  for (Index j = 0; j < g.size(); ++j) {
    if (g(j) < 0.0) jacobian.col(j).setZero();
  }
  return jacobian;
}

Matrix clipped_subgradient(const ConstraintOracle& c,
                           const Eigen::Ref<const Vector>& x) {
  return clip_jacobian(c.value(x), c.subgradient(x));
}

namespace {

double spectral_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
}

}  // namespace

ConstantsAccumulator::ConstantsAccumulator(const DecisionSet& set)
    : set_(&set) {}

void ConstantsAccumulator::add_loss(const LossOracle& loss) {
  double ridge = 0.0;
  Matrix H;
  Vector z;
  if (const auto* reg = dynamic_cast<const QuadraticRegressionLoss*>(&loss)) {
    H = reg->H();
    z = reg->z();
    ridge = reg->ridge();
  } else {
    throw ArgumentError(
        "ConstantsAccumulator: only quadratic regression losses are "
        "supported");
  }
  const double R = set_->outer_radius();
  // Interval bounds on every residual h_k.x - z_k over the set.
  double lo_sum = 0.0, hi_sum = 0.0;
  for (Index k = 0; k < H.rows(); ++k) {
    auto [lo, hi] = set_->linear_range(H.row(k).transpose());
    lo -= z(k);
    hi -= z(k);
    const double sq_max = std::max(lo * lo, hi * hi);
    const double sq_min = (lo <= 0.0 && hi >= 0.0) ? 0.0
                                                   : std::min(lo * lo, hi * hi);
    lo_sum += sq_min;
    hi_sum += sq_max;
  }
  const double variation = 0.5 * (hi_sum - lo_sum) + 0.5 * ridge * R * R;
  const double h_norm = spectral_norm(H);
  const double grad_bound =
      std::min(h_norm * std::sqrt(hi_sum), h_norm * (h_norm * R + z.norm())) +
      ridge * R;
  F1_ = std::max(F1_, variation);
  F2_ = std::max(F2_, grad_bound);

  Matrix Q = H.transpose() * H;
  Q.diagonal().array() += ridge;
  const double smallest =
      Eigen::SelfAdjointEigenSolver<Matrix>(Q, Eigen::EigenvaluesOnly)
          .eigenvalues()(0);
  mu_ = std::min(mu_, std::max(0.0, smallest));
}

void ConstantsAccumulator::add_constraint(const ConstraintOracle& constraint) {
  auto form = constraint.affine_form();
  if (!form) {
    throw ArgumentError(
        "ConstantsAccumulator: only affine constraints are supported");
  }
  double sq = 0.0;
  for (Index j = 0; j < form->A.rows(); ++j) {
    auto [lo, hi] = set_->linear_range(form->A.row(j).transpose());
    lo -= form->a(j);
    hi -= form->a(j);
    sq += std::max(lo * lo, hi * hi);
  }
  F1_ = std::max(F1_, std::sqrt(sq));
  F2_ = std::max(F2_, spectral_norm(form->A));
}

ProblemConstants ConstantsAccumulator::result() const {
  ProblemConstants out;
  out.F1 = F1_;
  out.F2 = F2_;
  out.mu = std::isfinite(mu_) ? mu_ : 0.0;
  out.inner_radius = set_->inner_radius();
  out.outer_radius = set_->outer_radius();
  return out;
}

ProblemInstance::ProblemInstance(Index agents, std::vector<Index> constraint_dims,
                                 Index horizon, DecisionSet set,
                                 Generator generator,
                                 ProblemConstants constants,
                                 std::optional<Vector> feasible_point)
    : agents_(agents),
      m_(std::move(constraint_dims)),
      horizon_(horizon),
      set_(std::move(set)),
      generator_(std::move(generator)),
      constants_(constants),
      feasible_(std::move(feasible_point)) {
  require(agents_ >= 1, "ProblemInstance: need at least one agent");
  require(static_cast<Index>(m_.size()) == agents_,
          "ProblemInstance: one constraint dimension per agent required");
  require(horizon_ >= 1, "ProblemInstance: horizon must be positive");
  require(static_cast<bool>(generator_), "ProblemInstance: empty generator");
  for (Index m : m_) {
    require(m >= 1, "ProblemInstance: constraint dimensions must be >= 1");
    total_m_ += m;
  }
  if (feasible_) {
    require(feasible_->size() == set_.dim() && set_.contains(*feasible_),
            "ProblemInstance: feasible point must lie in the decision set");
  }
}

LocalProblem ProblemInstance::local(Index agent, Index round) const {
  require(agent >= 0 && agent < agents_, "ProblemInstance: agent out of range");
  require(round >= 1 && round <= horizon_,
          "ProblemInstance: round out of range");
  LocalProblem lp = generator_(agent, round);
  require(lp.loss && lp.constraint, "ProblemInstance: generator returned null");
  require(lp.loss->dim() == dim() && lp.constraint->dim() == dim() &&
              lp.constraint->count() == m_[static_cast<std::size_t>(agent)],
          "ProblemInstance: generator returned mismatched dimensions");
  return lp;
}

std::vector<LocalProblem> ProblemInstance::round(Index round) const {
  std::vector<LocalProblem> out;
  out.reserve(static_cast<std::size_t>(agents_));
  for (Index i = 0; i < agents_; ++i) out.push_back(local(i, round));
  return out;
}

double ProblemInstance::global_loss(Index t,
                                    const Eigen::Ref<const Vector>& x) const {
  return distoco::global_loss(round(t), x);
}

Vector ProblemInstance::global_constraint(
    Index t, const Eigen::Ref<const Vector>& x) const {
  return distoco::global_constraint(round(t), x);
}

double global_loss(const std::vector<LocalProblem>& round,
                   const Eigen::Ref<const Vector>& x) {
  double sum = 0.0;
  for (const auto& lp : round) sum += lp.loss->value(x);
  return sum / static_cast<double>(round.size());
}

Vector global_constraint(const std::vector<LocalProblem>& round,
                         const Eigen::Ref<const Vector>& x) {
  Index total = 0;
  for (const auto& lp : round) total += lp.constraint->count();
  Vector out(total);
  Index row = 0;
  for (const auto& lp : round) {
    out.segment(row, lp.constraint->count()) = lp.constraint->value(x);
    row += lp.constraint->count();
  }
  return out;
}

ProblemInstance centralize(const ProblemInstance& instance) {
  auto source = std::make_shared<const ProblemInstance>(instance);
  auto generator = [source](Index, Index t) {
    std::vector<std::shared_ptr<const LossOracle>> losses;
    std::vector<std::shared_ptr<const ConstraintOracle>> constraints;
    for (const auto& lp : source->round(t)) {
      losses.push_back(lp.loss);
      constraints.push_back(lp.constraint);
    }
    return LocalProblem{std::make_shared<AverageLoss>(std::move(losses)),
                        std::make_shared<StackedConstraint>(
                            std::move(constraints))};
  };
  // Averaging losses cannot enlarge the loss bounds; stacking n constraint
  // blocks scales ||g|| and ||dg|| by at most sqrt(n).
  ProblemConstants constants = instance.constants();
  const double stack = std::sqrt(static_cast<double>(instance.agents()));
  constants.F1 *= stack;
  constants.F2 *= stack;
  return ProblemInstance(1, {instance.total_constraints()}, instance.horizon(),
                         instance.set(), std::move(generator), constants,
                         instance.feasible_point());
}

namespace {

LocalProblem make_regression_local(const RegressionStreamOptions& opts,
                                   Index agent, Index round) {
  const auto key_agent = static_cast<std::uint64_t>(agent);
  const auto key_round = static_cast<std::uint64_t>(round);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  SplitMix64 loss_rng(derive_seed(
      opts.seed, {static_cast<std::uint64_t>(StreamPurpose::kLoss), key_agent,
                  key_round}));
  Matrix H(opts.observations, opts.dim);
  for (Index r = 0; r < H.rows(); ++r)
    for (Index c = 0; c < H.cols(); ++c) H(r, c) = unit(loss_rng);
  Vector eps(opts.observations);
  for (Index r = 0; r < eps.size(); ++r) eps(r) = noise(loss_rng);
  Vector z = H * Vector::Ones(opts.dim) + eps;

  SplitMix64 con_rng(derive_seed(
      opts.seed, {static_cast<std::uint64_t>(StreamPurpose::kConstraint),
                  key_agent, key_round}));
  std::uniform_real_distribution<double> slope(0.0, 2.0);
  std::uniform_real_distribution<double> offset(0.0, 1.0);
  Matrix A(opts.constraints, opts.dim);
  for (Index r = 0; r < A.rows(); ++r)
    for (Index c = 0; c < A.cols(); ++c) A(r, c) = slope(con_rng);
  Vector a(opts.constraints);
  for (Index r = 0; r < a.size(); ++r) a(r) = offset(con_rng);

  return LocalProblem{
      std::make_shared<QuadraticRegressionLoss>(std::move(H), std::move(z),
                                                opts.ridge),
      std::make_shared<AffineConstraint>(std::move(A), std::move(a))};
}

}  // namespace

ProblemInstance generate_regression_stream(const RegressionStreamOptions& opts) {
  require(opts.agents >= 1 && opts.dim >= 1 && opts.observations >= 1 &&
              opts.constraints >= 1 && opts.horizon >= 1,
          "generate_regression_stream: all sizes must be positive");
  require(opts.half_width > 0.0,
          "generate_regression_stream: half width must be positive");
  require(opts.ridge >= 0.0, "generate_regression_stream: ridge must be >= 0");

  DecisionSet set = DecisionSet::symmetric_box(opts.dim, opts.half_width);
  ConstantsAccumulator acc(set);
  const Vector origin = Vector::Zero(opts.dim);
  for (Index t = 1; t <= opts.horizon; ++t) {
    for (Index i = 0; i < opts.agents; ++i) {
      LocalProblem lp = make_regression_local(opts, i, t);
      acc.add_loss(*lp.loss);
      acc.add_constraint(*lp.constraint);
      if ((lp.constraint->value(origin).array() > 0.0).any()) {
        throw NumericalError(
            "generate_regression_stream: origin infeasible for a round");
      }
    }
  }
  auto generator = [opts](Index agent, Index round) {
    return make_regression_local(opts, agent, round);
  };
  return ProblemInstance(
      opts.agents, std::vector<Index>(static_cast<std::size_t>(opts.agents),
                                      opts.constraints),
      opts.horizon, std::move(set), std::move(generator), acc.result(),
      origin);
}

void write_instance_csv(const ProblemInstance& instance, std::ostream& out) {
  out << "round,agent,matrix,row,col,value\n";
  out.precision(17);
  auto emit = [&](Index t, Index i, const char* name, const Matrix& M) {
    for (Index r = 0; r < M.rows(); ++r)
      for (Index c = 0; c < M.cols(); ++c)
        out << t << ',' << i << ',' << name << ',' << r << ',' << c << ','
            << M(r, c) << '\n';
  };
  for (Index t = 1; t <= instance.horizon(); ++t) {
    for (Index i = 0; i < instance.agents(); ++i) {
      const LocalProblem lp = instance.local(i, t);
      const auto* loss =
          dynamic_cast<const QuadraticRegressionLoss*>(lp.loss.get());
      const auto* con =
          dynamic_cast<const AffineConstraint*>(lp.constraint.get());
      if (!loss || !con) {
        throw ArgumentError(
            "write_instance_csv: only regression instances can be dumped");
      }
      emit(t, i, "H", loss->H());
      emit(t, i, "z", loss->z());
      emit(t, i, "A", con->A());
      emit(t, i, "a", con->a());
    }
  }
}

}  // namespace distoco
