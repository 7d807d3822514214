#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "distoco/harness.hpp"
#include "distoco/network.hpp"

namespace {

using namespace distoco;

constexpr int kConfigError = 1;
constexpr int kNumericalError = 2;

struct Overrides {
  std::string config_file;
  std::string algorithm;
  std::string kappa, T, seed, n, rho, out;
  std::vector<std::string> settings;  // key=value
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_file, "key = value config file");
  cmd->add_option("--algorithm", o.algorithm,
                  "full-info | bandit | centralized-full-info | "
                  "centralized-bandit");
  cmd->add_option("--kappa", o.kappa, "step-size exponent in (0, 1)");
  cmd->add_option("--T", o.T, "horizon");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--n", o.n, "number of agents");
  cmd->add_option("--rho", o.rho, "edge probability");
  cmd->add_option("--out", o.out, "output file");
  cmd->add_option("--set", o.settings, "extra key=value settings")
      ->allow_extra_args(false);
}

ExperimentConfig build_config(const Overrides& o) {
  ExperimentConfig cfg;
  if (!o.config_file.empty()) cfg = load_config(o.config_file);
  for (const auto& kv : o.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ArgumentError("--set expects key=value, got " + kv);
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!o.algorithm.empty()) apply_setting(cfg, "algorithm", o.algorithm);
  if (!o.kappa.empty()) apply_setting(cfg, "kappa", o.kappa);
  if (!o.T.empty()) apply_setting(cfg, "T", o.T);
  if (!o.seed.empty()) apply_setting(cfg, "seed", o.seed);
  if (!o.n.empty()) apply_setting(cfg, "n", o.n);
  if (!o.rho.empty()) apply_setting(cfg, "rho", o.rho);
  if (!o.out.empty()) apply_setting(cfg, "output", o.out);
  cfg.validate();
  return cfg;
}

// Resolves a relative output path against the default output directory.
std::filesystem::path output_path(const std::string& name) {
  std::filesystem::path p(name);
  if (p.is_absolute()) return p;
  if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir)
    return std::filesystem::path(dir) / p;
  return p;
}

template <typename Write>
void write_or_print(const std::string& name, Write write) {
  if (name.empty() || name == "-") {
    write(std::cout);
    return;
  }
  const auto path = output_path(name);
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open output file " + path.string());
  write(out);
  if (!out.flush()) throw ArgumentError("write failed: " + path.string());
  std::cerr << "wrote " << path.string() << '\n';
}

int run_command(const Overrides& o, const std::string& curve_out) {
  const ExperimentConfig cfg = build_config(o);
  const ExperimentResult result = run_experiment(cfg);
  write_or_print(cfg.output, [&](std::ostream& s) { emit_csv(result, s); });
  if (!curve_out.empty())
    write_or_print(curve_out,
                   [&](std::ostream& s) { emit_curve_csv(result, s); });
  std::cerr << "invariant checks: " << result.invariants.checks
            << ", violations: " << result.invariants.violations << '\n';
  for (const auto& msg : result.invariants.messages)
    std::cerr << "  " << msg << '\n';
  std::cerr << "seconds per round: " << result.seconds_per_round << '\n';
  return result.invariants.violations == 0 ? 0 : kNumericalError;
}

int sweep_command(const Overrides& o, const std::vector<double>& kappas,
                  const std::vector<Index>& horizons,
                  const std::vector<std::uint64_t>& seeds) {
  const ExperimentConfig cfg = build_config(o);
  const auto table = sweep(cfg, kappas, horizons, seeds);
  write_or_print(cfg.output,
                 [&](std::ostream& s) { write_sweep_csv(s, table); });
  return 0;
}

int validate_graph_command(Index n, double rho, Index T, std::uint64_t seed,
                           Index window, const std::string& graph_out) {
  require(n >= 2, "validate-graph: n must be >= 2");
  require(T >= 1 && window >= 1, "validate-graph: T and B must be >= 1");
  GraphSequence seq;
  seq.window = window;
  for (Index t = 1; t <= T; ++t)
    seq.matrices.push_back(generate_er_path_mixing(n, rho, t, seed));
  const ValidationReport report = validate_mixing_sequence(seq);
  std::cout << report.summary();
  if (report.passed) {
    const MixingConstants c = seq.constants();
    std::cout << "w=" << format_double(seq.matrices.front().min_weight())
              << " tau=" << format_double(c.tau)
              << " lambda=" << format_double(c.lambda) << '\n';
  }
  if (!graph_out.empty())
    write_or_print(graph_out,
                   [&](std::ostream& s) { write_graph_csv(seq, s); });
  return report.passed ? 0 : kNumericalError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed online optimization with time-varying constraints"};
  app.require_subcommand(1);

  Overrides run_opts;
  std::string curve_out;
  auto* run = app.add_subcommand("run", "run one experiment, write metrics CSV");
  add_overrides(run, run_opts);
  run->add_option("--curve", curve_out, "also write the average-loss curve CSV");

  Overrides sweep_opts;
  std::vector<double> kappas{0.3, 0.5, 0.7};
  std::vector<Index> horizons{64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  auto* sw = app.add_subcommand("sweep", "fit regret and violation rates");
  add_overrides(sw, sweep_opts);
  sw->add_option("--kappas", kappas, "kappa values")->delimiter(',');
  sw->add_option("--horizons", horizons, "evaluation horizons")->delimiter(',');
  sw->add_option("--seeds", seeds, "master seeds")->delimiter(',');

  Index g_n = 10, g_T = 100, g_B = 1;
  double g_rho = 0.3;
  std::uint64_t g_seed = 0;
  std::string graph_out;
  auto* vg = app.add_subcommand("validate-graph",
                                "check a generated mixing-matrix sequence");
  vg->add_option("--n", g_n, "number of agents");
  vg->add_option("--rho", g_rho, "edge probability");
  vg->add_option("--T", g_T, "rounds");
  vg->add_option("--seed", g_seed, "seed");
  vg->add_option("--B", g_B, "connectivity window");
  vg->add_option("--out", graph_out, "write the matrices as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) return run_command(run_opts, curve_out);
    if (*sw) return sweep_command(sweep_opts, kappas, horizons, seeds);
    if (*vg) return validate_graph_command(g_n, g_rho, g_T, g_seed, g_B, graph_out);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const UnsupportedSetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
  return 0;
}
