#pragma once

#include "holder_vi/core.hpp"
#include "holder_vi/linesearch.hpp"
#include "holder_vi/model.hpp"
#include "holder_vi/subproblem.hpp"

namespace hvi {

struct RunResult;

/// Taylor expansion of F of order p-1 at the anchor:
///   sum_{i=0}^{p-1} (1/i!) ∇^i F(anchor)[u - anchor]^i.
/// Terms of order >= 2 go through Operator::higher_deriv_apply, so no d^3
/// tensor is ever formed.
struct TaylorModel {
  LinearModel base;
  int order = 2;  ///< p
  const Operator* op = nullptr;

  static TaylorModel at(const Operator& op, const Vector& anchor, int p);

  const Vector& anchor() const { return base.anchor; }
  Vector evaluate(const Vector& u) const;
};

/// Taylor model plus H ||u - anchor||^power (u - anchor).
struct TensorModel {
  TaylorModel taylor;
  double power = 1.0;
  double H = 1.0;

  TensorModel(TaylorModel taylor, double power, double H);

  const Vector& anchor() const { return taylor.anchor(); }
  int order() const { return taylor.order; }
  Vector evaluate(const Vector& u) const;
  /// Only for order 2.
  RegularizedModel as_regularized() const;
};

/// Γ(nu+1)/Γ(p+nu): the Taylor-remainder constant for a nu-Hölder (p-1)-th derivative.
double c_p_nu(int p, double nu);

/// Jacobian of u -> model.evaluate(u), assembled column by column from the
/// higher-derivative oracle.
Matrix tensor_model_jacobian(const TensorModel& model, const Vector& u);

/// p = 2 delegates to solve_model_vi. p >= 3 runs damped Newton on the model
/// (on the KKT system when the ball constraint is active), falling back to
/// projected extragradient. p > 3 throws UnsupportedOrder unless
/// `allow_untested_order`.
SubproblemSolution solve_tensor_subproblem(const TensorModel& model, const FeasibleSet& set,
                                           double inner_tol, bool allow_untested_order = false,
                                           const InnerOptions& options = {});

/// Adaptive tensor method with known nu (doubling search in tensor(p, nu) mode).
RunResult run_nu_aret(const Operator& op, const FeasibleSet& set, const Vector& z0, int p,
                      double nu, double H0, int K, const SolverConfig& cfg);

/// Universal tensor method (tensor_universal(p) mode) with early exit on gap <= eps.
RunResult run_uret(const Operator& op, const FeasibleSet& set, const Vector& z0, int p, double H0,
                   int K, double eps, const SolverConfig& cfg);

}  // namespace hvi
