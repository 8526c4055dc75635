#pragma once

#include "holder_vi/core.hpp"
#include "holder_vi/subproblem.hpp"

namespace hvi {

struct TaylorModel;

enum class ModeKind { Holder, Universal, Tensor, TensorUniversal };

/// Which regularizer and acceptance exponent the doubling search uses.
///
///   holder(nu)            power nu,       exponent 1 + nu
///   universal             power 1,        exponent 2
///   tensor(p, nu)         power p-2+nu,   exponent p-1+nu
///   tensor_universal(p)   power p-1,      exponent p
struct ExponentMode {
  ModeKind kind = ModeKind::Holder;
  int p = 2;
  double nu = 1.0;

  static ExponentMode holder(double nu) { return {ModeKind::Holder, 2, nu}; }
  static ExponentMode universal() { return {ModeKind::Universal, 2, 1.0}; }
  static ExponentMode tensor(int p, double nu) { return {ModeKind::Tensor, p, nu}; }
  static ExponentMode tensor_universal(int p) { return {ModeKind::TensorUniversal, p, 1.0}; }

  int order() const { return p; }
  double reg_power() const { return p - 2 + nu; }
  double criterion_exponent() const { return p - 1 + nu; }
  bool is_universal() const {
    return kind == ModeKind::Universal || kind == ModeKind::TensorUniversal;
  }
};

struct LineSearchTrial {
  double H = 0.0;
  double lhs = 0.0;  ///< ||F(T) - Taylor(T)||
  double rhs = 0.0;  ///< (H/2) ||T - z_k||^e
  bool accepted = false;
  bool subproblem_failed = false;
  double gap = std::numeric_limits<double>::quiet_NaN();  ///< gap at T when checked
};

struct LineSearchOutcome {
  int i_k = 0;
  double H_trial = 0.0;  ///< H_k 2^{i_k}
  Vector accepted_point;
  Vector F_at_point;
  double step_norm = 0.0;
  std::vector<LineSearchTrial> trials;
  int subproblem_solves = 0;
  int F_evals = 0;
  /// Set when the gap at a trial point fell to <= eps before acceptance.
  bool early_exit = false;
  double early_exit_gap = std::numeric_limits<double>::quiet_NaN();
};

class LineSearchExhausted : public Error {
 public:
  LineSearchExhausted(const std::string& what, std::vector<LineSearchTrial> trials)
      : Error(what), trials_(std::move(trials)) {}
  const std::vector<LineSearchTrial>& trials() const { return trials_; }

 private:
  std::vector<LineSearchTrial> trials_;
};

struct SearchOptions {
  double inner_tol = 1e-10;
  int max_doublings = 60;
  /// When set (bounded sets only), stop as soon as a trial point has gap <= eps.
  std::optional<double> early_exit_eps;
  bool allow_untested_order = false;
};

/// Smallest i in {0, ..., max_doublings} with
///   ||F(T) - Taylor(T; z_k)|| <= (H_k 2^i / 2) ||T - z_k||^e,   T = T(z_k; ., H_k 2^i).
/// `taylor` carries F(z_k), ∇F(z_k) (and higher terms for p >= 3), evaluated
/// once per outer iteration. A trial whose subproblem fails counts as rejected.
LineSearchOutcome search(const Operator& op, const FeasibleSet& set, const TaylorModel& taylor,
                         double H_k, ExponentMode mode, const SearchOptions& options);

/// Convenience overload that builds the Taylor model at z_k.
LineSearchOutcome search(const Operator& op, const FeasibleSet& set, const Vector& z_k,
                         double H_k, ExponentMode mode, const SearchOptions& options);

/// H_k 2^(i_k - 1).
double next_H(double H_k, int i_k);

}  // namespace hvi
