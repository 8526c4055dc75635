#pragma once

#include "holder_vi/core.hpp"
#include "holder_vi/linesearch.hpp"
#include "holder_vi/metrics.hpp"

#include <cstdint>

namespace hvi {

/// One outer iteration. For nu-REN and extragradient i_k = 0.
struct IterationRecord {
  int k = 0;
  int i_k = 0;
  double H_k = 0.0;     ///< H entering the iteration (2 H_nu for nu-REN)
  double H_used = 0.0;  ///< H_k 2^{i_k}
  double gamma_k = 0.0;
  Vector half_step;
  Vector full_step;
  double step_norm = 0.0;
  std::int64_t F_evals_cum = 0;
  std::int64_t J_evals_cum = 0;
  std::int64_t subproblems_cum = 0;
  double gap_point = std::numeric_limits<double>::quiet_NaN();
  double gap_avg = std::numeric_limits<double>::quiet_NaN();
  std::int64_t wall_ns = 0;
  std::vector<LineSearchTrial> trials;
};

struct EarlyExit {
  int k = 0;
  int i = 0;
  Vector point;
  double gap = 0.0;
};

struct RunResult {
  Method method = Method::NuRen;
  ExponentMode mode;
  double H0 = 0.0;
  double eps = 0.0;
  /// Weighted ergodic average of the half-steps; the early-exit point or the
  /// exact-convergence half-step when the run stopped early.
  Vector averaged_point;
  double final_gap = std::numeric_limits<double>::quiet_NaN();
  std::vector<IterationRecord> records;
  std::optional<EarlyExit> early_exit;
  /// Iteration at which a zero half-step (gamma = 0) stopped the run.
  std::optional<int> converged_at;
  std::vector<BoundVerdict> bound_checks;

  /// Sum over iterations of (i_k + 1).
  std::int64_t oracle_calls() const;
};

/// Running weighted mean kept in normalized form so that weights spanning
/// hundreds of orders of magnitude neither overflow nor lose the mean.
class WeightedAverage {
 public:
  void add(const Vector& point, double log_weight);
  bool empty() const { return count_ == 0; }
  const Vector& value() const;

 private:
  Vector mean_;
  double log_total_ = -std::numeric_limits<double>::infinity();
  int count_ = 0;
};

/// sum(p_i / gamma_i) / sum(1 / gamma_i).
Vector ergodic_average(std::span<const Vector> points, std::span<const double> gammas);

RunResult run_nu_ren(const Operator& op, const FeasibleSet& set, const Vector& z0, double nu,
                     double H_nu, int K, const SolverConfig& cfg);

RunResult run_nu_aren(const Operator& op, const FeasibleSet& set, const Vector& z0, double nu,
                      double H0, int K, const SolverConfig& cfg);

RunResult run_uren(const Operator& op, const FeasibleSet& set, const Vector& z0, double H0,
                   int K, double eps, const SolverConfig& cfg);

/// Korpelevich extragradient with a fixed step and a plain average of half-steps.
RunResult run_extragradient(const Operator& op, const FeasibleSet& set, const Vector& z0,
                            double step, int K, const SolverConfig& cfg);

/// Shared loop behind nu-AREN, UREN, nu-ARET and URET.
RunResult run_adaptive(const Operator& op, const FeasibleSet& set, const Vector& z0,
                       ExponentMode mode, double H0, int K, const SolverConfig& cfg,
                       std::optional<double> early_exit_eps, Method method);

/// 1 / (2 max sampled ||∇F||) over Z.
double default_extragradient_step(const Operator& op, const FeasibleSet& set, std::uint64_t seed);

/// Dispatch on cfg.method.
RunResult run_method(const Operator& op, const FeasibleSet& set, const Vector& z0,
                     const SolverConfig& cfg);

}  // namespace hvi
