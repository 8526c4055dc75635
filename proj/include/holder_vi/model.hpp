#pragma once

#include "holder_vi/core.hpp"

namespace hvi {

/// First-order Taylor model of F at `anchor`. The Jacobian is evaluated once
/// at construction and reused by every evaluation.
struct LinearModel {
  Vector anchor;
  Vector value_at_anchor;
  Matrix jacobian_at_anchor;

  static LinearModel at(const Operator& op, const Vector& anchor);

  Vector evaluate(const Vector& z) const;
};

/// H * ||d||^power * d, with 0^0 = 1 so that power 0 gives H * d.
Vector radial_regularizer(const Vector& d, double H, double power);

/// Linear model plus the radial regularizer H ||z - anchor||^power (z - anchor).
struct RegularizedModel {
  LinearModel base;
  double power = 1.0;  ///< nu for the Hölder-aware methods, 1 for universal ones
  double H = 1.0;

  RegularizedModel(LinearModel base, double power, double H);

  const Vector& anchor() const { return base.anchor; }
  Vector evaluate(const Vector& z) const;
};

/// H_nu * step^(1+nu) / (1+nu): bound on ||F(z') - F(z) - ∇F(z)(z'-z)||.
double remainder_bound(double nu, double H_nu, double step_norm);

}  // namespace hvi
