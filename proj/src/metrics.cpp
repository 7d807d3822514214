#include "distoco/metrics.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace distoco {

RunTrace::RunTrace(Index agents, Index dim) : agents_(agents), dim_(dim) {
  require(agents >= 1 && dim >= 1, "RunTrace: sizes must be positive");
}

void RunTrace::append(Matrix decisions) {
  require(decisions.rows() == agents_ && decisions.cols() == dim_,
          "RunTrace::append: expected an n x p decision matrix");
  decisions_.push_back(std::move(decisions));
}

const Matrix& RunTrace::round(Index t) const {
  require(t >= 1 && t <= horizon(), "RunTrace::round: round out of range");
  return decisions_[static_cast<std::size_t>(t - 1)];
}

namespace {

Index resolve_horizon(const RunTrace& trace, Index horizon) {
  if (horizon < 0) return trace.horizon();
  require(horizon <= trace.horizon(), "metrics: horizon exceeds the trace");
  return horizon;
}

double default_penalty(const ProblemInstance& instance) {
  const auto& c = instance.constants();
  const double scale = 10.0 * c.F2 *
                       std::sqrt(static_cast<double>(instance.total_constraints())) *
                       std::max(c.outer_radius, 1.0);
  return scale > 0.0 ? scale : 1.0;
}

}  // namespace

double network_regret(const RunTrace& trace, const ComparatorSequence& comp,
                      const ProblemInstance& instance) {
  require(comp.horizon() == trace.horizon(),
          "network_regret: comparator length must equal the trace length");
  require(trace.agents() == instance.agents(),
          "network_regret: agent count mismatch");
  const double n = static_cast<double>(trace.agents());
  double total = 0.0;
  for (Index t = 1; t <= trace.horizon(); ++t) {
    const auto round = instance.round(t);
    const Matrix& X = trace.round(t);
    double agents_loss = 0.0;
    for (Index i = 0; i < trace.agents(); ++i)
      agents_loss += global_loss(round, X.row(i).transpose());
    total += agents_loss / n -
             global_loss(round, comp.points[static_cast<std::size_t>(t - 1)]);
  }
  return total;
}

double cumulative_violation(const RunTrace& trace,
                            const ProblemInstance& instance, Index horizon) {
  const Index T = resolve_horizon(trace, horizon);
  double total = 0.0;
  for (Index t = 1; t <= T; ++t) {
    const auto round = instance.round(t);
    const Matrix& X = trace.round(t);
    for (Index i = 0; i < trace.agents(); ++i)
      total += clipped_value(global_constraint(round, X.row(i).transpose()))
                   .norm();
  }
  return total / static_cast<double>(trace.agents());
}

double standard_violation(const RunTrace& trace,
                          const ProblemInstance& instance, Index horizon) {
  const Index T = resolve_horizon(trace, horizon);
  std::vector<Vector> sums(static_cast<std::size_t>(trace.agents()),
                           Vector::Zero(instance.total_constraints()));
  for (Index t = 1; t <= T; ++t) {
    const auto round = instance.round(t);
    const Matrix& X = trace.round(t);
    for (Index i = 0; i < trace.agents(); ++i)
      sums[static_cast<std::size_t>(i)] +=
          global_constraint(round, X.row(i).transpose());
  }
  double total = 0.0;
  for (const auto& s : sums) total += clipped_value(s).norm();
  return total / static_cast<double>(trace.agents());
}

double path_length(const ComparatorSequence& comp) {
  require(!comp.points.empty(), "path_length: empty comparator");
  double total = 0.0;
  for (std::size_t t = 1; t < comp.points.size(); ++t)
    total += (comp.points[t] - comp.points[t - 1]).norm();
  return total;
}

double disagreement(const RunTrace& trace, Index t) {
  const Matrix& X = trace.round(t);
  const Eigen::RowVectorXd mean = X.colwise().mean();
  return (X.rowwise() - mean).rowwise().norm().maxCoeff();
}

double empirical_rate(std::span<const std::pair<double, double>> series) {
  require(series.size() >= 3, "empirical_rate: need at least three points");
  const double count = static_cast<double>(series.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto [T, value] = series[k];
    require(value > 0.0, "empirical_rate: values must be positive");
    require(T > 0.0, "empirical_rate: horizons must be positive");
    if (k > 0)
      require(T > series[k - 1].first,
              "empirical_rate: horizons must increase");
    sx += std::log(T);
    sy += std::log(value);
  }
  const double mx = sx / count, my = sy / count;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [T, value] : series) {
    const double dx = std::log(T) - mx;
    sxy += dx * (std::log(value) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

StaticComparatorBuilder::StaticComparatorBuilder(
    const ProblemInstance& instance)
    : instance_(&instance) {
  const Index p = instance.dim();
  total_ = QuadraticForm{Matrix::Zero(p, p), Vector::Zero(p), 0.0};
}

void StaticComparatorBuilder::add_round(const std::vector<LocalProblem>& round) {
  require(static_cast<Index>(round.size()) == instance_->agents(),
          "StaticComparatorBuilder: one local problem per agent required");
  const double n = static_cast<double>(round.size());
  for (const auto& lp : round) {
    auto form = lp.loss->quadratic_form();
    auto rows = lp.constraint->affine_form();
    require(form.has_value() && rows.has_value(),
            "StaticComparatorBuilder: quadratic losses and affine "
            "constraints required");
    total_.Q += form->Q / n;
    total_.b += form->b / n;
    total_.c += form->c / n;
    for (Index r = 0; r < rows->A.rows(); ++r) {
      for (Index k = 0; k < rows->A.cols(); ++k)
        rows_.push_back(rows->A(r, k));
      rows_.push_back(rows->a(r));
    }
  }
  ++rounds_;
}

ComparatorSequence StaticComparatorBuilder::solve(
    const SolverOptions& opts) const {
  require(rounds_ >= 1, "StaticComparatorBuilder: no rounds added");
  const Index p = instance_->dim();
  const Index stride = p + 1;
  const Index count = static_cast<Index>(rows_.size()) / stride;
  using RowMajor =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> packed(rows_.data(), count, stride);
  AffineForm rows{packed.leftCols(p), packed.col(p)};
  const SolveResult solved =
      solve_qp(total_, rows, instance_->set(), instance_->feasible_point(), opts);

  ComparatorSequence out;
  out.kind = ComparatorKind::kStatic;
  out.points.assign(static_cast<std::size_t>(rounds_), solved.x);
  out.objective = solved.objective;
  // The stacked rows cover every round, so the largest clipped row bounds
  // each round's clipped norm from below; report the round-wise norm.
  double worst = 0.0;
  if (count > 0) {
    const Vector v = clipped_value(rows.A * solved.x - rows.a);
    const Index per_round = instance_->total_constraints();
    for (Index t = 0; t < rounds_; ++t)
      worst = std::max(worst, v.segment(t * per_round, per_round).norm());
  }
  out.feasibility = worst;
  return out;
}

namespace {

bool closed_form_round(const std::vector<LocalProblem>& round) {
  for (const auto& lp : round)
    if (!lp.loss->quadratic_form() || !lp.constraint->affine_form())
      return false;
  return true;
}

ComparatorSequence static_by_penalty(const ProblemInstance& instance, Index T,
                                     const SolverOptions& opts) {
  std::vector<std::vector<LocalProblem>> rounds;
  std::vector<std::shared_ptr<const ConstraintOracle>> blocks;
  for (Index t = 1; t <= T; ++t) {
    rounds.push_back(instance.round(t));
    std::vector<std::shared_ptr<const ConstraintOracle>> parts;
    for (const auto& lp : rounds.back()) parts.push_back(lp.constraint);
    blocks.push_back(std::make_shared<StackedConstraint>(std::move(parts)));
  }
  ConvexProgram program;
  program.objective = [&rounds](const Vector& x) {
    double total = 0.0;
    for (const auto& r : rounds) total += global_loss(r, x);
    return total;
  };
  program.objective_subgradient = [&rounds](const Vector& x) {
    Vector s = Vector::Zero(x.size());
    for (const auto& r : rounds)
      for (const auto& lp : r) s += lp.loss->subgradient(x);
    return Vector(s / static_cast<double>(rounds.front().size()));
  };
  program.constraints = blocks;
  const double penalty = opts.penalty > 0.0 ? opts.penalty
                                            : default_penalty(instance);
  const SolveResult solved = solve_penalty(
      program, instance.set(), instance.feasible_point(), penalty, opts);

  ComparatorSequence out;
  out.kind = ComparatorKind::kStatic;
  out.points.assign(static_cast<std::size_t>(T), solved.x);
  out.objective = solved.objective;
  double worst = 0.0;
  for (const auto& b : blocks)
    worst = std::max(worst, clipped_value(b->value(solved.x)).norm());
  out.feasibility = worst;
  return out;
}

}  // namespace

ComparatorSequence static_comparator(const ProblemInstance& instance, Index T,
                                     const SolverOptions& opts) {
  require(T >= 1 && T <= instance.horizon(),
          "static_comparator: T out of range");
  bool closed = instance.set().kind() == DecisionSet::Kind::kBox;
  for (Index t = 1; closed && t <= T; ++t)
    closed = closed_form_round(instance.round(t));
  if (!closed) return static_by_penalty(instance, T, opts);

  StaticComparatorBuilder builder(instance);
  for (Index t = 1; t <= T; ++t) builder.add_round(instance.round(t));
  return builder.solve(opts);
}

SolveResult solve_round(const std::vector<LocalProblem>& round,
                        const ProblemInstance& instance,
                        const SolverOptions& opts,
                        const std::optional<Vector>& warm) {
  std::vector<std::shared_ptr<const LossOracle>> losses;
  std::vector<std::shared_ptr<const ConstraintOracle>> parts;
  for (const auto& lp : round) {
    losses.push_back(lp.loss);
    parts.push_back(lp.constraint);
  }
  const AverageLoss loss(losses);
  auto stacked = std::make_shared<StackedConstraint>(parts);
  auto form = loss.quadratic_form();
  auto rows = stacked->affine_form();
  if (form && rows && instance.set().kind() == DecisionSet::Kind::kBox) {
    Eigen::LLT<Matrix> llt(form->Q);
    if (llt.info() == Eigen::Success)
      return solve_qp(*form, *rows, instance.set(), instance.feasible_point(),
                      opts);
  }
  ConvexProgram program;
  program.objective = [&loss](const Vector& x) { return loss.value(x); };
  program.objective_subgradient = [&loss](const Vector& x) {
    return loss.subgradient(x);
  };
  program.constraints = {stacked};
  const double penalty = opts.penalty > 0.0 ? opts.penalty
                                            : default_penalty(instance);
  std::optional<Vector> anchor = instance.feasible_point();
  if (!anchor && warm) anchor = warm;
  return solve_penalty(program, instance.set(), anchor, penalty, opts);
}

ComparatorSequence dynamic_comparator(const ProblemInstance& instance, Index T,
                                      const SolverOptions& opts) {
  require(T >= 1 && T <= instance.horizon(),
          "dynamic_comparator: T out of range");
  ComparatorSequence out;
  out.kind = ComparatorKind::kDynamic;
  for (Index t = 1; t <= T; ++t) {
    const auto round = instance.round(t);
    const SolveResult solved = solve_round(round, instance, opts);
    out.points.push_back(solved.x);
    out.objective += global_loss(round, solved.x);
    out.feasibility = std::max(
        out.feasibility,
        clipped_value(global_constraint(round, solved.x)).norm());
  }
  return out;
}

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void write_metrics_row(std::ostream& out, const MetricsRow& row) {
  out << row.T << ',' << format_double(row.regret_static) << ','
      << format_double(row.regret_dynamic) << ','
      << format_double(row.cum_violation) << ','
      << format_double(row.std_violation) << ','
      << format_double(row.path_length) << ','
      << format_double(row.disagreement_max) << '\n';
}

std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
  std::vector<MetricsRow> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kMetricsHeader)
        throw ArgumentError("read_metrics_csv: unexpected header: " + line);
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 7)
      throw ArgumentError("read_metrics_csv: expected 7 fields: " + line);
    auto parse = [](const std::string& s) {
      double v = 0.0;
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ArgumentError("read_metrics_csv: bad number: " + s);
      return v;
    };
    MetricsRow row;
    row.T = static_cast<Index>(std::stoll(fields[0]));
    row.regret_static = parse(fields[1]);
    row.regret_dynamic = parse(fields[2]);
    row.cum_violation = parse(fields[3]);
    row.std_violation = parse(fields[4]);
    row.path_length = parse(fields[5]);
    row.disagreement_max = parse(fields[6]);
    rows.push_back(row);
  }
  if (!header_seen) throw ArgumentError("read_metrics_csv: missing header");
  return rows;
}

}  // namespace distoco
