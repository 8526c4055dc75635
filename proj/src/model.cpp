#include "holder_vi/model.hpp"

#include <cmath>

namespace hvi {

LinearModel LinearModel::at(const Operator& op, const Vector& anchor) {
  return LinearModel{anchor, op.eval(anchor), op.jacobian(anchor)};
}

Vector LinearModel::evaluate(const Vector& z) const {
  if (z.size() != anchor.size()) throw ConfigError("linear model: dimension mismatch");
  return value_at_anchor + jacobian_at_anchor * (z - anchor);
}

Vector radial_regularizer(const Vector& d, double H, double power) {
  return (H * pow_nonneg(norm(d), power)) * d;
}

RegularizedModel::RegularizedModel(LinearModel b, double p, double h)
    : base(std::move(b)), power(p), H(h) {
  if (!(H > 0.0)) throw ConfigError("regularized model needs H > 0");
  if (power < 0.0) throw ConfigError("regularizer power must be >= 0");
}

Vector RegularizedModel::evaluate(const Vector& z) const {
  return base.evaluate(z) + radial_regularizer(z - base.anchor, H, power);
}

double remainder_bound(double nu, double H_nu, double step_norm) {
  if (step_norm == 0.0) return 0.0;
  return H_nu * std::pow(step_norm, 1.0 + nu) / (1.0 + nu);
}

}  // namespace hvi
