#include "holder_vi/solvers.hpp"

#include "holder_vi/subproblem.hpp"
#include "holder_vi/tensor.hpp"

#include <chrono>
#include <cmath>

namespace hvi {

std::int64_t RunResult::oracle_calls() const {
  std::int64_t n = 0;
  for (const auto& r : records) n += r.i_k + 1;
  return n;
}

void WeightedAverage::add(const Vector& point, double log_weight) {
  if (!std::isfinite(log_weight)) {
    throw DegenerateRegularization("averaging weight is not finite");
  }
  if (count_ == 0) {
    mean_ = point;
    log_total_ = log_weight;
  } else {
    const double hi = std::max(log_total_, log_weight);
    const double total = hi + std::log(std::exp(log_total_ - hi) + std::exp(log_weight - hi));
    mean_ += std::exp(log_weight - total) * (point - mean_);
    log_total_ = total;
  }
  ++count_;
}

const Vector& WeightedAverage::value() const {
  if (count_ == 0) throw ConfigError("average of an empty set of points");
  return mean_;
}

Vector ergodic_average(std::span<const Vector> points, std::span<const double> gammas) {
  if (points.empty()) throw ConfigError("ergodic_average: empty point list");
  if (points.size() != gammas.size()) {
    throw ConfigError("ergodic_average: points and gammas differ in length");
  }
  WeightedAverage avg;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(gammas[i] > 0.0)) {
      throw DegenerateRegularization("ergodic_average: gamma[" + std::to_string(i) + "] <= 0");
    }
    avg.add(points[i], -std::log(gammas[i]));
  }
  return avg.value();
}

namespace {

using Clock = std::chrono::steady_clock;

double safe_gap(const FeasibleSet& set, const Vector& point, const Vector& F_point) {
  if (!set.bounded()) return std::numeric_limits<double>::quiet_NaN();
  return gap_from_value(set, point, F_point);
}

/// Bookkeeping shared by every outer loop.
class Recorder {
 public:
  Recorder(const Operator& op, const FeasibleSet& set, const SolverConfig& cfg, int K)
      : op_(op), set_(set), cfg_(cfg), K_(K) {}

  std::int64_t F = 0, J = 0, S = 0;
  WeightedAverage avg;

  /// Appends the record and refreshes the running-average gap.
  void commit(RunResult& r, IterationRecord rec, Clock::time_point t0, bool last) {
    rec.F_evals_cum = F;
    rec.J_evals_cum = J;
    rec.subproblems_cum = S;
    if (set_.bounded() && (cfg_.gap_every_iteration || last || rec.k + 1 == K_)) {
      rec.gap_avg = gap_from_value(set_, avg.value(), op_.eval(avg.value()));
    }
    if (cfg_.record_wall_time) {
      rec.wall_ns =
          std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
    }
    r.records.push_back(std::move(rec));
  }

  void finish(RunResult& r) {
    if (r.early_exit) {
      r.averaged_point = r.early_exit->point;
      r.final_gap = r.early_exit->gap;
    } else if (r.converged_at) {
      r.averaged_point = r.records.back().half_step;
      r.final_gap = r.records.back().gap_point;
    } else {
      r.averaged_point = set_.project(avg.value());
      r.final_gap = set_.bounded() ? gap_from_value(set_, r.averaged_point,
                                                    op_.eval(r.averaged_point))
                                   : std::numeric_limits<double>::quiet_NaN();
    }
    DeclaredConstants dc;
    dc.nu = op_.metadata().nu;
    dc.H = op_.metadata().holder_constant;
    dc.higher_nu = op_.metadata().higher_nu;
    dc.higher_H = op_.metadata().higher_holder_constant;
    dc.diameter = set_.diameter();
    r.bound_checks = bound_report(r, dc);
  }

 private:
  const Operator& op_;
  const FeasibleSet& set_;
  const SolverConfig& cfg_;
  int K_;
};

void check_start(const Operator& op, const FeasibleSet& set, const Vector& z0, int K) {
  if (op.dim() != set.dim()) throw ConfigError("operator and set dimensions differ");
  if (z0.size() != set.dim()) throw ConfigError("z0 has the wrong dimension");
  if (!all_finite(z0)) throw ConfigError("z0 has non-finite coordinates");
  if (K < 1) throw ConfigError("key 'K' must be >= 1 (got " + std::to_string(K) + ")");
}

}  // namespace

RunResult run_nu_ren(const Operator& op, const FeasibleSet& set, const Vector& z0, double nu,
                     double H_nu, int K, const SolverConfig& cfg) {
  check_start(op, set, z0, K);
  if (!(nu >= 0.0 && nu <= 1.0)) throw ConfigError("key 'nu' must lie in [0, 1]");
  if (!(H_nu > 0.0)) throw ConfigError("key 'H' must be > 0");
  RunResult r;
  r.method = Method::NuRen;
  r.mode = ExponentMode::holder(nu);
  r.H0 = 2.0 * H_nu;
  r.eps = cfg.eps;
  Recorder rec(op, set, cfg, K);
  const double coeff = 2.0 * H_nu;
  const double inner_tol = cfg.resolved_inner_tol();
  Vector z = set.project(z0);
  for (int k = 0; k < K; ++k) {
    const auto t0 = Clock::now();
    const LinearModel lin = LinearModel::at(op, z);
    ++rec.F;
    ++rec.J;
    const SubproblemSolution sol = solve_model_vi(RegularizedModel(lin, nu, coeff), set, inner_tol);
    ++rec.S;
    IterationRecord it;
    it.k = k;
    it.H_k = coeff;
    it.H_used = coeff;
    it.half_step = sol.point;
    it.step_norm = norm(sol.point - z);
    it.gamma_k = gamma_of(coeff, nu, it.step_norm);
    const Vector F_half = op.eval(sol.point);
    ++rec.F;
    it.gap_point = safe_gap(set, sol.point, F_half);
    if (!(it.gamma_k > 0.0)) {
      it.full_step = sol.point;
      r.converged_at = k;
      rec.avg.add(sol.point, 0.0);
      rec.commit(r, std::move(it), t0, true);
      break;
    }
    it.full_step = prox_step(z, F_half, it.gamma_k, set);
    rec.avg.add(sol.point, -std::log(it.gamma_k));
    z = it.full_step;
    rec.commit(r, std::move(it), t0, false);
  }
  rec.finish(r);
  return r;
}

RunResult run_adaptive(const Operator& op, const FeasibleSet& set, const Vector& z0,
                       ExponentMode mode, double H0, int K, const SolverConfig& cfg,
                       std::optional<double> early_exit_eps, Method method) {
  check_start(op, set, z0, K);
  if (!(H0 > 0.0) || !std::isfinite(H0)) throw ConfigError("key 'H0' must be > 0");
  RunResult r;
  r.method = method;
  r.mode = mode;
  r.H0 = H0;
  r.eps = early_exit_eps.value_or(cfg.eps);
  Recorder rec(op, set, cfg, K);
  SearchOptions opts;
  opts.inner_tol = cfg.resolved_inner_tol();
  opts.max_doublings = cfg.max_doublings;
  opts.early_exit_eps = early_exit_eps;
  opts.allow_untested_order = cfg.allow_untested_order;
  const double power = mode.reg_power();

  Vector z = set.project(z0);
  double H = H0;
  for (int k = 0; k < K; ++k) {
    const auto t0 = Clock::now();
    const TaylorModel taylor = TaylorModel::at(op, z, mode.order());
    ++rec.F;
    ++rec.J;
    LineSearchOutcome ls = search(op, set, taylor, H, mode, opts);
    rec.F += ls.F_evals;
    rec.S += ls.subproblem_solves;

    IterationRecord it;
    it.k = k;
    it.i_k = ls.i_k;
    it.H_k = H;
    it.H_used = ls.H_trial;
    it.half_step = ls.accepted_point;
    it.step_norm = ls.step_norm;
    it.gamma_k = gamma_of(ls.H_trial, power, ls.step_norm);
    it.trials = std::move(ls.trials);
    it.gap_point = safe_gap(set, ls.accepted_point, ls.F_at_point);

    if (ls.early_exit) {
      it.full_step = ls.accepted_point;
      r.early_exit = EarlyExit{k, ls.i_k, ls.accepted_point, ls.early_exit_gap};
      if (rec.avg.empty()) rec.avg.add(ls.accepted_point, 0.0);
      rec.commit(r, std::move(it), t0, true);
      break;
    }
    if (!(it.gamma_k > 0.0)) {
      it.full_step = ls.accepted_point;
      r.converged_at = k;
      rec.avg.add(ls.accepted_point, 0.0);
      rec.commit(r, std::move(it), t0, true);
      break;
    }
    it.full_step = prox_step(z, ls.F_at_point, it.gamma_k, set);
    rec.avg.add(ls.accepted_point, -std::log(it.gamma_k));
    z = it.full_step;
    H = next_H(H, ls.i_k);
    rec.commit(r, std::move(it), t0, false);
  }
  rec.finish(r);
  return r;
}

RunResult run_nu_aren(const Operator& op, const FeasibleSet& set, const Vector& z0, double nu,
                      double H0, int K, const SolverConfig& cfg) {
  if (!(nu >= 0.0 && nu <= 1.0)) throw ConfigError("key 'nu' must lie in [0, 1]");
  return run_adaptive(op, set, z0, ExponentMode::holder(nu), H0, K, cfg, std::nullopt,
                      Method::NuAren);
}

RunResult run_uren(const Operator& op, const FeasibleSet& set, const Vector& z0, double H0,
                   int K, double eps, const SolverConfig& cfg) {
  if (!(eps > 0.0)) throw ConfigError("key 'eps' must be > 0");
  return run_adaptive(op, set, z0, ExponentMode::universal(), H0, K, cfg, eps, Method::Uren);
}

RunResult run_extragradient(const Operator& op, const FeasibleSet& set, const Vector& z0,
                            double step, int K, const SolverConfig& cfg) {
  check_start(op, set, z0, K);
  if (!(step > 0.0)) throw ConfigError("key 'step' must be > 0");
  RunResult r;
  r.method = Method::Extragradient;
  r.eps = cfg.eps;
  Recorder rec(op, set, cfg, K);
  Vector z = set.project(z0);
  for (int k = 0; k < K; ++k) {
    const auto t0 = Clock::now();
    const Vector Fz = op.eval(z);
    IterationRecord it;
    it.k = k;
    it.H_k = 1.0 / step;
    it.H_used = it.H_k;
    it.gamma_k = it.H_k;
    it.half_step = set.project(z - step * Fz);
    it.step_norm = norm(it.half_step - z);
    const Vector F_half = op.eval(it.half_step);
    rec.F += 2;
    it.full_step = set.project(z - step * F_half);
    it.gap_point = safe_gap(set, it.half_step, F_half);
    rec.avg.add(it.half_step, 0.0);
    z = it.full_step;
    rec.commit(r, std::move(it), t0, false);
  }
  rec.finish(r);
  return r;
}

double default_extragradient_step(const Operator& op, const FeasibleSet& set, std::uint64_t seed) {
  Rng rng(seed);
  double L = 0.0;
  for (int s = 0; s < 200; ++s) L = std::max(L, spectral_norm(op.jacobian(set.sample(rng))));
  L = std::max(L, spectral_norm(op.jacobian(set.middle())));
  if (!(L > 0.0)) return 1.0;
  return 1.0 / (2.0 * L);
}

RunResult run_method(const Operator& op, const FeasibleSet& set, const Vector& z0,
                     const SolverConfig& cfg) {
  cfg.validate();
  switch (cfg.method) {
    case Method::NuRen:
      return run_nu_ren(op, set, z0, *cfg.nu, *cfg.H_nu, cfg.K, cfg);
    case Method::NuAren:
      return run_nu_aren(op, set, z0, *cfg.nu, cfg.H0, cfg.K, cfg);
    case Method::Uren:
      return run_uren(op, set, z0, cfg.H0, cfg.K, cfg.eps, cfg);
    case Method::NuAret:
      return run_nu_aret(op, set, z0, cfg.p, *cfg.nu, cfg.H0, cfg.K, cfg);
    case Method::Uret:
      return run_uret(op, set, z0, cfg.p, cfg.H0, cfg.K, cfg.eps, cfg);
    case Method::Extragradient:
      return run_extragradient(op, set, z0,
                               cfg.step.value_or(default_extragradient_step(op, set, cfg.seed)),
                               cfg.K, cfg);
  }
  throw ConfigError("unknown method");
}

}  // namespace hvi
