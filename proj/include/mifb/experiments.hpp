#pragma once

#include "mifb/localrate.hpp"
#include "mifb/params.hpp"
#include "mifb/problems.hpp"
#include "mifb/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mifb {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitMonitor = 4;
inline constexpr int kExitInsufficientData = 5;

struct ProblemConfig {
  std::string kind;  // sparse_regression | pcp | sparse_svm
  std::uint64_t seed{42};
  Index m{48}, n{128}, k{8};           // regression
  Index n1{50}, n2{50};                // pcp
  Index sparsity{250}, rank{5};        // pcp
  std::string loss{"squared_hinge"};   // svm
  double noise_std{-1.0};              // < 0: 0.01 * signal rms
  double mu{-1.0}, mu1{-1.0}, mu2{-1.0};  // < 0: instance default
};

struct ScheduleConfig {
  std::string name;
  int s{1};
  std::vector<double> a;  // empty: choose per rule at 90% of the admissible sum
  std::vector<double> b;  // empty: b = a
  double gamma_frac{0.3};  // gamma as a fraction of 1/L
  std::string rule{"theorem22"};
  std::optional<bool> online_cap;  // default: rule == bound24
  double cap_c{10.0}, cap_q{0.1};
};

struct SolverConfig {
  double tol_delta{1e-10};
  long max_iter{10000};
  bool monitor_descent{true};
  bool monitor_residual{true};
};

struct OutputConfig {
  std::string dir{"out"};
  bool plot{true};
};

struct ExperimentConfig {
  ProblemConfig problem;
  std::vector<ScheduleConfig> schedules;
  SolverConfig solver;
  OutputConfig output;
};

/// Parse and validate a config file; throws ConfigError.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

CompositeProblem build_problem(const ProblemConfig& cfg);

/// Resolve a schedule against the instance Lipschitz constant: gamma from
/// the fraction, auto coefficients at 90% of the rule's admissible sum
/// (split equally), the online cap for bound24. Throws ConfigError when the
/// schedule fails its rule's feasibility check.
InertialSchedule materialize_schedule(const ScheduleConfig& cfg, double lipschitz);

struct ScheduleRun {
  InertialSchedule schedule;
  FeasibilityReport feasibility;
  RunTrace trace;
  long identification_iter{-1};
  long iters_to_tol{-1};  // first k with dist <= 1e-9; -1 if never reached
};

struct ExperimentRun {
  CompositeProblem problem;
  ReferenceSolution reference;
  std::vector<ScheduleRun> runs;
};

/// Build the problem, compute the shared reference point with a plain FB
/// schedule at the first configured step size, then run every schedule
/// (concurrently) against it.
ExperimentRun run_experiment(const ExperimentConfig& cfg);

/// Subcommand drivers; return process exit codes.
struct CliOptions {
  std::string out_dir;  // empty: config value
  bool no_plot{false};
  std::optional<std::uint64_t> seed_override;
};
int cmd_run(const std::string& config_path, const CliOptions& cli);
int cmd_compare(const std::string& config_path, const CliOptions& cli);
int cmd_rates(const std::string& config_path, const CliOptions& cli);

/// Trace CSV with the stable schema
/// `k,phi,delta,resid,activity,dist_to_xstar,identified`.
void write_trace_csv(const std::string& path, const RunTrace& trace, long identification_iter);

}  // namespace mifb
