#pragma once

#include "holder_vi/core.hpp"
#include "holder_vi/model.hpp"

namespace hvi {

enum class InnerMethod { Secular, ProjectedExtragradient, Newton };

std::string to_string(InnerMethod m);

/// Approximate solution of a model VI.
struct SubproblemSolution {
  Vector point;
  double residual = 0.0;  ///< ||point - P(point - G(point))||
  int inner_iterations = 0;
  InnerMethod method_used = InnerMethod::Secular;
  std::vector<std::string> warnings;
};

class SubproblemFailure : public Error {
 public:
  SubproblemFailure(const std::string& what, double best_residual, Vector best_point)
      : Error(what), best_residual_(best_residual), best_point_(std::move(best_point)) {}
  double best_residual() const { return best_residual_; }
  const Vector& best_point() const { return best_point_; }

 private:
  double best_residual_;
  Vector best_point_;
};

enum class InnerPath { Auto, Secular, ProjectedExtragradient };

struct InnerOptions {
  InnerPath path = InnerPath::Auto;
  int max_lambda_trials = 200;
  int max_extragradient_iterations = 200000;
  /// Starting point for the extragradient path; defaults to the anchor.
  std::optional<Vector> start;
};

using ModelFn = std::function<Vector(const Vector&)>;

/// Natural-map residual ||u - P(u - G(u))||.
/// Computed as ||G(u)|| when u - G(u) already lies in Z.
double natural_residual(const ModelFn& G, const FeasibleSet& set, const Vector& u);
double natural_residual_from_value(const FeasibleSet& set, const Vector& u, const Vector& Gu);

/// Projected extragradient on an arbitrary monotone model G over `set`, with
/// step halving until the local Lipschitz test beta*||G(u)-G(u')|| <= 0.9||u-u'||
/// passes. Stops once the natural-map residual is <= tol.
SubproblemSolution solve_vi_extragradient(const ModelFn& G, const FeasibleSet& set,
                                          const Vector& start, double tol, int max_iterations);

/// T(z; power, H): solves VI_Z(F(z) + ∇F(z)(u-z) + H||u-z||^power (u-z)).
///
/// Whole-space and ball sets use the secular path: a dense shifted solve
/// (∇F(z) + (lambda + mu) I) d = -(F(z) + mu (z - c)) with lambda = H||d||^power
/// located by a safeguarded root search in log(lambda), and the ball multiplier
/// mu located by an outer search on the sphere when the unconstrained step
/// leaves the ball. Boxes, non-PSD Jacobians and secular failures use the
/// projected extragradient path.
///
/// The returned residual is <= effective_inner_tol(...), which keeps the
/// tolerance meaningful as the iterates approach a solution.
SubproblemSolution solve_model_vi(const RegularizedModel& model, const FeasibleSet& set,
                                  double inner_tol, const InnerOptions& options = {});

/// Residual target for a model whose anchor value is g:
/// inner_tol * min(1, ||g||), floored at 1e-300.
double effective_inner_tol(double inner_tol, const Vector& g);

/// project(z_k - g / gamma): minimizer of <g, z - z_k> + gamma/2 ||z - z_k||^2 over Z.
Vector prox_step(const Vector& z_k, const Vector& g, double gamma, const FeasibleSet& set);

/// H * step^nu with 0^0 = 1.
double gamma_of(double H, double nu, double step_norm);

}  // namespace hvi
