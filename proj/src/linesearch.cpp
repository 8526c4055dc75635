#include "holder_vi/linesearch.hpp"

#include "holder_vi/metrics.hpp"
#include "holder_vi/tensor.hpp"

#include <cmath>

namespace hvi {

namespace {

// Slack absorbing rounding in F(T) - Taylor(T) and the inner-solver residual.
constexpr double kSlack = 1e-12;
// Rounding in F(T) itself: its terms have size about ||J|| ||T|| even when F(T) is tiny.
constexpr double kNoise = 64.0 * std::numeric_limits<double>::epsilon();

bool criterion_holds(double lhs, double H, double e, double step, double scale) {
  if (lhs == 0.0 || lhs <= kSlack * scale) return true;
  if (step == 0.0) return false;
  // (H/2) step^e underflows long before lhs does; compare logarithms.
  return std::log(lhs) <= std::log(0.5 * H) + e * std::log(step) + std::log1p(kSlack);
}

}  // namespace

LineSearchOutcome search(const Operator& op, const FeasibleSet& set, const TaylorModel& taylor,
                         double H_k, ExponentMode mode, const SearchOptions& options) {
  if (!(H_k > 0.0) || !std::isfinite(H_k)) {
    throw ConfigError("line search needs H_k > 0 (got " + std::to_string(H_k) + ")");
  }
  if (taylor.order != mode.order()) throw ConfigError("Taylor model order differs from mode order");
  const Vector& z = taylor.anchor();
  const double jacobian_norm = taylor.base.jacobian_at_anchor.norm();
  const double e = mode.criterion_exponent();
  const bool check_gap = options.early_exit_eps.has_value() && set.bounded();

  LineSearchOutcome out;
  double H = H_k;
  for (int i = 0; i <= options.max_doublings; ++i, H *= 2.0) {
    LineSearchTrial trial;
    trial.H = H;
    SubproblemSolution sol;
    try {
      ++out.subproblem_solves;
      sol = solve_tensor_subproblem(TensorModel(taylor, mode.reg_power(), H), set,
                                    options.inner_tol, options.allow_untested_order);
    } catch (const SubproblemFailure&) {
      trial.subproblem_failed = true;
      trial.lhs = std::numeric_limits<double>::infinity();
      out.trials.push_back(trial);
      continue;
    }
    const Vector& T = sol.point;
    const Vector FT = op.eval(T);
    ++out.F_evals;
    const Vector model_T = taylor.evaluate(T);
    const double step = norm(T - z);
    trial.lhs = norm(FT - model_T);
    trial.rhs = 0.5 * H * pow_nonneg(step, e);

    if (check_gap) {
      trial.gap = gap_from_value(set, T, FT);
      if (trial.gap <= *options.early_exit_eps) {
        out.trials.push_back(trial);
        out.i_k = i;
        out.H_trial = H;
        out.accepted_point = T;
        out.F_at_point = FT;
        out.step_norm = step;
        out.early_exit = true;
        out.early_exit_gap = trial.gap;
        return out;
      }
    }

    const double scale =
        norm(FT) + norm(model_T) +
        kNoise / kSlack * (jacobian_norm * (norm(T) + norm(z)) + norm(taylor.base.value_at_anchor));
    trial.accepted = criterion_holds(trial.lhs, H, e, step, scale);
    out.trials.push_back(trial);
    if (trial.accepted) {
      out.i_k = i;
      out.H_trial = H;
      out.accepted_point = T;
      out.F_at_point = FT;
      out.step_norm = step;
      return out;
    }
  }
  throw LineSearchExhausted("line search exhausted " + std::to_string(options.max_doublings) +
                                " doublings from H_k = " + std::to_string(H_k) + " at z_k = " +
                                format_point(z),
                            out.trials);
}

LineSearchOutcome search(const Operator& op, const FeasibleSet& set, const Vector& z_k, double H_k,
                         ExponentMode mode, const SearchOptions& options) {
  return search(op, set, TaylorModel::at(op, z_k, mode.order()), H_k, mode, options);
}

double next_H(double H_k, int i_k) { return std::ldexp(H_k, i_k - 1); }

}  // namespace hvi
