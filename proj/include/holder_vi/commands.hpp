#pragma once

#include "holder_vi/problems.hpp"
#include "holder_vi/run_config.hpp"
#include "holder_vi/solvers.hpp"

#include <iosfwd>

namespace hvi {

/// Process exit codes shared by the subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitSolverError = 2;
inline constexpr int kExitConfigError = 3;

/// Entry point behind the executable; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs one solve and writes trace.csv, trials.csv and summary.json into cfg.out_dir.
int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Instance plus config after defaults that depend on the problem are filled in
/// (extragradient step, declared-H scaling).
struct ResolvedRun {
  ProblemInstance instance;
  RunConfig config;
};
ResolvedRun resolve_run(const RunConfig& cfg);

/// Trace CSV: config echo header, then one row per iteration.
std::string trace_csv(const RunConfig& cfg, const RunResult& run);
/// Line-search trials CSV, one row per trial.
std::string trials_csv(const RunConfig& cfg, const RunResult& run);
std::string summary_json(const RunConfig& cfg, const ProblemInstance& inst, const RunResult& run);

/// Slope the theory predicts for `method` on an instance with Hölder exponent nu.
double theoretical_slope(Method method, double nu, int p);
/// Default acceptance tolerance on the fitted slope.
double default_slope_tolerance(Method method);

/// Worker count for sweeps: HOLDER_VI_THREADS if set, else hardware concurrency,
/// never more than `jobs`.
int sweep_threads(int jobs);

std::string format_double(double x);

}  // namespace hvi
