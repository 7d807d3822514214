#include "distoco/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace distoco {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kFullInfo: return "full-info";
    case Algorithm::kBandit: return "bandit";
    case Algorithm::kCentralizedFullInfo: return "centralized-full-info";
    case Algorithm::kCentralizedBandit: return "centralized-bandit";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "full-info") return Algorithm::kFullInfo;
  if (name == "bandit") return Algorithm::kBandit;
  if (name == "centralized-full-info") return Algorithm::kCentralizedFullInfo;
  if (name == "centralized-bandit") return Algorithm::kCentralizedBandit;
  throw ArgumentError("unknown algorithm: " + name);
}

void ExperimentConfig::validate() const {
  require(n >= 1 && p >= 1 && d >= 1 && m >= 1 && T >= 1,
          "config: n, p, d, m and T must be >= 1");
  require(rho >= 0.0 && rho <= 1.0, "config: rho must lie in [0, 1]");
  require(kappa > 0.0 && kappa < 1.0, "config: kappa must lie in (0, 1)");
  require(half_width > 0.0, "config: half_width must be positive");
  require(ridge >= 0.0, "config: ridge must be >= 0");
  require(repetitions >= 1, "config: repetitions must be >= 1");
  require(first_checkpoint >= 1, "config: first_checkpoint must be >= 1");
  if (strongly_convex) {
    require(c >= std::max(kappa, 1.0 - kappa) && c < 1.0,
            "config: c must lie in [max(kappa, 1 - kappa), 1)");
  } else {
    require(alpha0 > 0.0, "config: alpha0 must be positive");
  }
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    require(horizons[k] >= 1 && horizons[k] <= T,
            "config: horizons must lie in [1, T]");
    if (k > 0)
      require(horizons[k] > horizons[k - 1],
              "config: horizons must increase");
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, value);
  if (r.ec != std::errc() || r.ptr != end)
    throw ArgumentError("config: bad value for " + key + ": '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ArgumentError("config: bad boolean for " + key + ": '" + text + "'");
}

std::vector<Index> parse_index_list(const std::string& key,
                                    const std::string& text) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number<Index>(key, item));
  }
  return out;
}

}  // namespace

void apply_setting(ExperimentConfig& cfg, const std::string& key,
                   const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "algorithm") cfg.algorithm = parse_algorithm(value);
  else if (key == "n") cfg.n = parse_number<Index>(key, value);
  else if (key == "p") cfg.p = parse_number<Index>(key, value);
  else if (key == "d") cfg.d = parse_number<Index>(key, value);
  else if (key == "m") cfg.m = parse_number<Index>(key, value);
  else if (key == "rho") cfg.rho = parse_number<double>(key, value);
  else if (key == "T") cfg.T = parse_number<Index>(key, value);
  else if (key == "half_width") cfg.half_width = parse_number<double>(key, value);
  else if (key == "schedule") {
    if (value == "convex") cfg.strongly_convex = false;
    else if (value == "strongly-convex") cfg.strongly_convex = true;
    else throw ArgumentError("config: unknown schedule: " + value);
  }
  else if (key == "alpha0") cfg.alpha0 = parse_number<double>(key, value);
  else if (key == "kappa") cfg.kappa = parse_number<double>(key, value);
  else if (key == "c") cfg.c = parse_number<double>(key, value);
  else if (key == "ridge") cfg.ridge = parse_number<double>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "repetitions") cfg.repetitions = parse_number<Index>(key, value);
  else if (key == "first_checkpoint")
    cfg.first_checkpoint = parse_number<Index>(key, value);
  else if (key == "horizons") cfg.horizons = parse_index_list(key, value);
  else if (key == "dynamic_comparator")
    cfg.dynamic_comparator = parse_bool(key, value);
  else if (key == "output") cfg.output = value;
  else throw ArgumentError("config: unknown key: " + key);
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ArgumentError("config line " + std::to_string(number) +
                          ": expected key = value");
    apply_setting(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config file: " + path.string());
  return parse_config(in, std::move(base));
}

std::vector<std::pair<std::string, std::string>> describe(
    const ExperimentConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["algorithm"] = to_string(cfg.algorithm);
  kv["n"] = std::to_string(cfg.n);
  kv["p"] = std::to_string(cfg.p);
  kv["d"] = std::to_string(cfg.d);
  kv["m"] = std::to_string(cfg.m);
  kv["rho"] = format_double(cfg.rho);
  kv["T"] = std::to_string(cfg.T);
  kv["half_width"] = format_double(cfg.half_width);
  kv["schedule"] = cfg.strongly_convex ? "strongly-convex" : "convex";
  kv["alpha0"] = format_double(cfg.alpha0);
  kv["kappa"] = format_double(cfg.kappa);
  kv["c"] = format_double(cfg.c);
  kv["ridge"] = format_double(cfg.ridge);
  kv["seed"] = std::to_string(cfg.seed);
  kv["repetitions"] = std::to_string(cfg.bandit() ? cfg.repetitions : 1);
  kv["first_checkpoint"] = std::to_string(cfg.first_checkpoint);
  std::string hs;
  for (Index h : cfg.horizons) hs += (hs.empty() ? "" : ",") + std::to_string(h);
  kv["horizons"] = hs;
  kv["dynamic_comparator"] = cfg.dynamic_comparator ? "true" : "false";
  return {kv.begin(), kv.end()};
}

std::vector<Index> checkpoints(Index first, Index T) {
  require(first >= 1 && T >= 1, "checkpoints: arguments must be >= 1");
  std::vector<Index> out;
  for (Index h = first; h < T; h *= 2) out.push_back(h);
  out.push_back(T);
  return out;
}

void InvariantReport::record(bool ok, const std::string& what) {
  ++checks;
  if (ok) return;
  ++violations;
  if (messages.size() < 10) messages.push_back(what);
}

ProblemInstance make_instance(const ExperimentConfig& cfg) {
  RegressionStreamOptions opts;
  opts.agents = cfg.n;
  opts.dim = cfg.p;
  opts.observations = cfg.d;
  opts.constraints = cfg.m;
  opts.horizon = cfg.T;
  opts.seed = cfg.seed;
  opts.half_width = cfg.half_width;
  opts.ridge = cfg.ridge;
  ProblemInstance instance = generate_regression_stream(opts);
  return cfg.centralized() ? centralize(instance) : instance;
}

StepSchedule make_schedule(const ExperimentConfig& cfg,
                           const ProblemInstance& instance) {
  const double r = instance.constants().inner_radius;
  if (cfg.bandit()) {
    return cfg.strongly_convex
               ? StepSchedule::strongly_convex_bandit(cfg.kappa, cfg.c, r)
               : StepSchedule::convex_bandit(cfg.alpha0, cfg.kappa, r);
  }
  return cfg.strongly_convex ? StepSchedule::strongly_convex_full(cfg.kappa, cfg.c)
                             : StepSchedule::convex_full(cfg.alpha0, cfg.kappa);
}

double dual_bound(const ProblemConstants& constants, Index p, bool bandit) {
  if (!bandit) return constants.F1;
  return constants.F1 +
         2.0 * static_cast<double>(p) * constants.F2 * constants.outer_radius;
}

double theory_regret_rate(double kappa) { return std::max(kappa, 1.0 - kappa); }
double theory_violation_rate(double kappa) { return 1.0 - kappa / 2.0; }

namespace {

// Comparator values at each checkpoint; shared by every repetition.
struct ComparatorTrack {
  std::vector<double> static_objective;
  std::vector<double> dynamic_objective;
  std::vector<double> path_length;
};

ComparatorTrack track_comparators(const ProblemInstance& instance,
                                  const std::vector<Index>& cps,
                                  bool dynamic) {
  ComparatorTrack track;
  StaticComparatorBuilder builder(instance);
  const SolverOptions opts;
  double dyn = 0.0, path = 0.0;
  std::optional<Vector> previous;
  std::size_t next = 0;
  for (Index t = 1; t <= cps.back(); ++t) {
    const auto round = instance.round(t);
    builder.add_round(round);
    if (dynamic) {
      const SolveResult solved = solve_round(round, instance, opts, previous);
      dyn += global_loss(round, solved.x);
      if (previous) path += (solved.x - *previous).norm();
      previous = solved.x;
    }
    if (t == cps[next]) {
      track.static_objective.push_back(builder.solve(opts).objective);
      track.dynamic_objective.push_back(
          dynamic ? dyn : std::numeric_limits<double>::quiet_NaN());
      track.path_length.push_back(
          dynamic ? path : std::numeric_limits<double>::quiet_NaN());
      ++next;
    }
  }
  return track;
}

MixingMatrix round_graph(const ExperimentConfig& cfg, Index n, Index t) {
  if (n == 1) return MixingMatrix(Matrix::Ones(1, 1), 1.0);
  return generate_er_path_mixing(n, cfg.rho, t, cfg.seed);
}

RunResult run_once(const ExperimentConfig& cfg, const ProblemInstance& instance,
                   const StepSchedule& schedule, const std::vector<Index>& cps,
                   const ComparatorTrack& comparators, Index repetition) {
  const Index n = instance.agents();
  const Index p = instance.dim();
  const DecisionSet& set = instance.set();
  const double bound = dual_bound(instance.constants(), p, schedule.bandit());
  const double slack = 1e-12 * (1.0 + set.outer_radius());
  const std::uint64_t exploration_seed = derive_seed(
      cfg.seed, {static_cast<std::uint64_t>(StreamPurpose::kExploration),
                 static_cast<std::uint64_t>(repetition)});

  RunResult result;
  result.invariants.dual_bound = bound;
  if (cfg.keep_traces) result.trace.emplace(n, p);

  std::vector<AgentState> states = initial_states(instance, schedule);
  std::vector<double> loss_sum(static_cast<std::size_t>(n), 0.0);
  std::vector<Vector> constraint_sum(
      static_cast<std::size_t>(n), Vector::Zero(instance.total_constraints()));
  double violation_sum = 0.0;
  std::size_t next_cp = 0;
  Matrix decisions(n, p);

  for (Index t = 1; t <= cps.back(); ++t) {
    const StepSizes current = schedule.at(t);
    auto& inv = result.invariants;
    inv.record(current.gamma * current.beta <= 1.0,
               "gamma*beta > 1 at t=" + std::to_string(t));
    for (Index i = 0; i < n; ++i) {
      const AgentState& s = states[static_cast<std::size_t>(i)];
      const std::string where =
          " (agent " + std::to_string(i) + ", t=" + std::to_string(t) + ")";
      inv.record((s.q.array() >= 0.0).all(), "negative dual" + where);
      const double scaled = current.beta * s.q.norm();
      inv.max_scaled_dual = std::max(inv.max_scaled_dual, scaled);
      inv.record(scaled <= bound, "dual bound exceeded" + where);
      inv.record(set.contains(s.x), "decision outside X" + where);
      decisions.row(i) = s.x.transpose();
    }
    if (result.trace) result.trace->append(decisions);

    const auto round = instance.round(t);
    for (Index i = 0; i < n; ++i) {
      const Vector x = decisions.row(i).transpose();
      loss_sum[static_cast<std::size_t>(i)] += global_loss(round, x);
      const Vector g = global_constraint(round, x);
      constraint_sum[static_cast<std::size_t>(i)] += g;
      violation_sum += clipped_value(g).norm();
    }

    if (t == cps[next_cp]) {
      const double nd = static_cast<double>(n);
      double mean_loss = 0.0, standard = 0.0;
      for (Index i = 0; i < n; ++i) {
        mean_loss += loss_sum[static_cast<std::size_t>(i)] / nd;
        standard +=
            clipped_value(constraint_sum[static_cast<std::size_t>(i)]).norm() /
            nd;
      }
      const Eigen::RowVectorXd mean = decisions.colwise().mean();
      MetricsRow row;
      row.T = t;
      row.regret_static = mean_loss - comparators.static_objective[next_cp];
      row.regret_dynamic = mean_loss - comparators.dynamic_objective[next_cp];
      row.cum_violation = violation_sum / nd;
      row.std_violation = standard;
      row.path_length = comparators.path_length[next_cp];
      row.disagreement_max =
          (decisions.rowwise() - mean).rowwise().norm().maxCoeff();
      result.rows.push_back(row);
      result.curve.push_back({t, mean_loss / static_cast<double>(t),
                              row.cum_violation / static_cast<double>(t)});
      ++next_cp;
      if (next_cp == cps.size()) break;
    }

    const MixingMatrix W = round_graph(cfg, n, t);
    const StepSizes next = schedule.at(t + 1);
    RoundOutput out;
    if (schedule.bandit()) {
      std::vector<Vector> directions;
      for (Index i = 0; i < n; ++i) {
        SplitMix64 rng(derive_seed(exploration_seed,
                                   {static_cast<std::uint64_t>(i),
                                    static_cast<std::uint64_t>(t)}));
        directions.push_back(sample_unit_sphere(rng, p));
      }
      out = bandit_round(states, W, t, round, current, next, directions, set);
      const double estimator_bound =
          static_cast<double>(p) * instance.constants().F2 * (1.0 + 1e-9);
      const auto& diag = out.diagnostics;
      for (std::size_t i = 0; i < diag.sample_points.size(); ++i) {
        const std::string where =
            " (agent " + std::to_string(i) + ", t=" + std::to_string(t) + ")";
        inv.record(set.contains(diag.sample_points[i], slack),
                   "sample point outside X" + where);
        inv.record(diag.loss_gradient_norms[i] <= estimator_bound,
                   "loss estimate exceeds p*F2" + where);
        inv.record(diag.constraint_gradient_norms[i] <= estimator_bound,
                   "constraint estimate exceeds p*F2" + where);
      }
    } else {
      out = full_info_round(states, W, t, round, next, set);
    }
    states = std::move(out.states);
  }
  return result;
}

MetricsRow combine(const std::vector<MetricsRow>& rows, bool error) {
  const double k = static_cast<double>(rows.size());
  auto stat = [&](auto field) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r.*field / k;
    if (!error) return mean;
    if (rows.size() < 2) return 0.0;
    double ss = 0.0;
    for (const auto& r : rows) ss += (r.*field - mean) * (r.*field - mean);
    return std::sqrt(ss / (k - 1.0) / k);
  };
  MetricsRow out;
  out.T = rows.front().T;
  out.regret_static = stat(&MetricsRow::regret_static);
  out.regret_dynamic = stat(&MetricsRow::regret_dynamic);
  out.cum_violation = stat(&MetricsRow::cum_violation);
  out.std_violation = stat(&MetricsRow::std_violation);
  out.path_length = stat(&MetricsRow::path_length);
  out.disagreement_max = stat(&MetricsRow::disagreement_max);
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  const ProblemInstance instance = make_instance(cfg);
  const StepSchedule schedule = make_schedule(cfg, instance);
  const std::vector<Index> cps =
      cfg.horizons.empty() ? checkpoints(cfg.first_checkpoint, cfg.T)
                           : cfg.horizons;
  const ComparatorTrack comparators =
      track_comparators(instance, cps, cfg.dynamic_comparator);

  const Index reps = cfg.bandit() ? cfg.repetitions : 1;
  const auto start = std::chrono::steady_clock::now();
  for (Index r = 0; r < reps; ++r)
    result.runs.push_back(run_once(cfg, instance, schedule, cps, comparators, r));
  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - start;
  result.seconds_per_round =
      elapsed.count() / static_cast<double>(reps * cps.back());

  for (std::size_t k = 0; k < cps.size(); ++k) {
    std::vector<MetricsRow> at;
    CurvePoint curve{cps[k], 0.0, 0.0};
    for (const auto& run : result.runs) {
      at.push_back(run.rows[k]);
      curve.average_loss += run.curve[k].average_loss / static_cast<double>(reps);
      curve.average_violation +=
          run.curve[k].average_violation / static_cast<double>(reps);
    }
    result.rows.push_back(combine(at, false));
    result.row_errors.push_back(combine(at, true));
    result.curve.push_back(curve);
  }
  auto& merged = result.invariants;
  for (const auto& run : result.runs) {
    merged.checks += run.invariants.checks;
    merged.violations += run.invariants.violations;
    merged.max_scaled_dual =
        std::max(merged.max_scaled_dual, run.invariants.max_scaled_dual);
    merged.dual_bound = run.invariants.dual_bound;
    for (const auto& msg : run.invariants.messages)
      if (merged.messages.size() < 10) merged.messages.push_back(msg);
  }
  return result;
}

std::vector<SweepRow> sweep(const ExperimentConfig& base,
                            const std::vector<double>& kappas,
                            const std::vector<Index>& horizons,
                            const std::vector<std::uint64_t>& seeds) {
  require(horizons.size() >= 3, "sweep: need at least three horizons");
  require(!seeds.empty(), "sweep: need at least one seed");
  std::vector<SweepRow> table;
  for (double kappa : kappas) {
    ExperimentConfig cfg = base;
    cfg.kappa = kappa;
    cfg.T = horizons.back();
    cfg.horizons = horizons;
    std::vector<std::vector<MetricsRow>> per_horizon(horizons.size());
    for (std::uint64_t seed : seeds) {
      cfg.seed = seed;
      const ExperimentResult r = run_experiment(cfg);
      for (std::size_t k = 0; k < horizons.size(); ++k)
        per_horizon[k].push_back(r.rows[k]);
    }
    SweepRow row;
    row.kappa = kappa;
    row.theory_regret = theory_regret_rate(kappa);
    row.theory_violation = theory_violation_rate(kappa);
    std::vector<std::pair<double, double>> regret, violation;
    bool regret_positive = true;
    for (const auto& rows : per_horizon) {
      row.mean_rows.push_back(combine(rows, false));
      const MetricsRow& m = row.mean_rows.back();
      regret.emplace_back(static_cast<double>(m.T), m.regret_static);
      violation.emplace_back(static_cast<double>(m.T), m.cum_violation);
      regret_positive = regret_positive && m.regret_static > 0.0;
    }
    row.regret_slope = regret_positive
                           ? empirical_rate(regret)
                           : std::numeric_limits<double>::quiet_NaN();
    row.violation_slope = empirical_rate(violation);
    table.push_back(std::move(row));
  }
  return table;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "kappa,regret_slope,violation_slope,theory_regret,theory_violation\n";
  for (const auto& r : rows) {
    out << format_double(r.kappa) << ',' << format_double(r.regret_slope)
        << ',' << format_double(r.violation_slope) << ','
        << format_double(r.theory_regret) << ','
        << format_double(r.theory_violation) << '\n';
  }
}

void emit_csv(const ExperimentResult& result, std::ostream& out) {
  for (const auto& [key, value] : describe(result.config))
    out << "# config " << key << '=' << value << '\n';
  const Index reps = result.config.bandit() ? result.config.repetitions : 1;
  if (reps > 1)
    out << "# mean over " << reps << " exploration seeds\n";
  else if (result.config.bandit())
    out << "# single run\n";
  out << kMetricsHeader << '\n';
  for (const auto& row : result.rows) write_metrics_row(out, row);
}

void emit_csv(const ExperimentResult& result,
              const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  emit_csv(result, out);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void emit_curve_csv(const ExperimentResult& result, std::ostream& out) {
  out << "T,average_loss,average_violation\n";
  for (const auto& c : result.curve) {
    out << c.T << ',' << format_double(c.average_loss) << ','
        << format_double(c.average_violation) << '\n';
  }
}

}  // namespace distoco
