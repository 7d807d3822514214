#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "distoco/algorithms.hpp"
#include "distoco/metrics.hpp"
#include "distoco/problem.hpp"

namespace distoco {

enum class Algorithm {
  kFullInfo,
  kBandit,
  kCentralizedFullInfo,
  kCentralizedBandit,
};

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::kFullInfo;
  Index n = 10;
  Index p = 4;
  Index d = 4;
  Index m = 2;  // per agent
  double rho = 0.3;
  Index T = 16384;
  double half_width = 5.0;
  bool strongly_convex = false;
  double alpha0 = 1.0;
  double kappa = 0.5;
  double c = 0.5;
  double ridge = 0.0;
  std::uint64_t seed = 0;
  /// Exploration seeds averaged for bandit algorithms.
  Index repetitions = 10;
  /// First checkpoint; later ones double until T (T itself is always one).
  Index first_checkpoint = 64;
  /// Explicit checkpoints (increasing, last <= T); overrides the doubling.
  std::vector<Index> horizons;
  bool dynamic_comparator = true;
  bool keep_traces = false;
  std::string output;

  /// Throws ArgumentError on out-of-range values.
  void validate() const;
  bool bandit() const {
    return algorithm == Algorithm::kBandit ||
           algorithm == Algorithm::kCentralizedBandit;
  }
  bool centralized() const {
    return algorithm == Algorithm::kCentralizedFullInfo ||
           algorithm == Algorithm::kCentralizedBandit;
  }
};

/// Applies `key = value` settings. Unknown keys and malformed values throw
/// ArgumentError.
void apply_setting(ExperimentConfig& cfg, const std::string& key,
                   const std::string& value);

/// Reads a flat `key = value` file; '#' starts a comment.
ExperimentConfig parse_config(std::istream& in,
                              ExperimentConfig base = ExperimentConfig{});
ExperimentConfig load_config(const std::filesystem::path& path,
                             ExperimentConfig base = ExperimentConfig{});

/// Settings as sorted `key=value` pairs, for CSV headers.
std::vector<std::pair<std::string, std::string>> describe(
    const ExperimentConfig& cfg);

/// Checkpoints first, 2 first, 4 first, ... below T, then T.
std::vector<Index> checkpoints(Index first, Index T);

/// Per-round invariant checks of a run.
struct InvariantReport {
  std::int64_t checks = 0;
  std::int64_t violations = 0;
  std::vector<std::string> messages;  ///< first few violations
  double max_scaled_dual = 0.0;       ///< max beta_t ||q_{i,t}||
  double dual_bound = 0.0;

  void record(bool ok, const std::string& what);
};

struct CurvePoint {
  Index T = 0;
  double average_loss = 0.0;       ///< (1/n) sum_i sum_t f_t(x_{i,t}) / T
  double average_violation = 0.0;  ///< cumulative violation / T
};

struct RunResult {
  std::vector<MetricsRow> rows;
  std::vector<CurvePoint> curve;
  InvariantReport invariants;
  std::optional<RunTrace> trace;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunResult> runs;       ///< one per repetition
  std::vector<MetricsRow> rows;      ///< mean over runs
  std::vector<MetricsRow> row_errors;  ///< standard error over runs
  std::vector<CurvePoint> curve;     ///< mean over runs
  InvariantReport invariants;        ///< merged
  double seconds_per_round = 0.0;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Builds the loss/constraint stream of an experiment.
ProblemInstance make_instance(const ExperimentConfig& cfg);
StepSchedule make_schedule(const ExperimentConfig& cfg,
                           const ProblemInstance& instance);

/// Upper bound on beta_t ||q_{i,t}|| for the schedule kind.
double dual_bound(const ProblemConstants& constants, Index p, bool bandit);

struct SweepRow {
  double kappa = 0.0;
  double regret_slope = 0.0;     ///< NaN when a regret value is <= 0
  double violation_slope = 0.0;
  double theory_regret = 0.0;
  double theory_violation = 0.0;
  std::vector<MetricsRow> mean_rows;
};

double theory_regret_rate(double kappa);
double theory_violation_rate(double kappa);

/// For every kappa, runs the template at T = max(horizons) for each seed and
/// fits rates at the given horizons to the seed-averaged metrics.
std::vector<SweepRow> sweep(const ExperimentConfig& base,
                            const std::vector<double>& kappas,
                            const std::vector<Index>& horizons,
                            const std::vector<std::uint64_t>& seeds);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Metrics CSV: `# key=value` comment lines, then the metrics header and
/// one row per checkpoint.
void emit_csv(const ExperimentResult& result, std::ostream& out);
void emit_csv(const ExperimentResult& result,
              const std::filesystem::path& path);

/// `T,average_loss,average_violation` per checkpoint.
void emit_curve_csv(const ExperimentResult& result, std::ostream& out);

/// Name of the environment variable holding the default output directory.
inline constexpr const char* kOutputDirEnv = "DISTOCO_OUTPUT_DIR";

}  // namespace distoco
