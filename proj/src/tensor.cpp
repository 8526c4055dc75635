#include "holder_vi/tensor.hpp"

#include "holder_vi/solvers.hpp"

#include <cmath>

namespace hvi {

TaylorModel TaylorModel::at(const Operator& op, const Vector& anchor, int p) {
  if (p < 2) throw ConfigError("Taylor model order p must be >= 2 (got " + std::to_string(p) + ")");
  if (p > 2 && !op.has_higher_derivatives()) {
    throw ConfigError("order p = " + std::to_string(p) +
                      " needs an operator with higher-derivative oracles");
  }
  TaylorModel t;
  t.base = LinearModel::at(op, anchor);
  t.order = p;
  t.op = &op;
  return t;
}

Vector TaylorModel::evaluate(const Vector& u) const {
  Vector out = base.evaluate(u);
  if (order <= 2) return out;
  const Vector d = u - base.anchor;
  double factorial = 1.0;
  for (int i = 2; i <= order - 1; ++i) {
    factorial *= i;
    std::vector<Vector> dirs(static_cast<std::size_t>(i), d);
    out += op->higher_deriv_apply(i, base.anchor, dirs) / factorial;
  }
  return out;
}

TensorModel::TensorModel(TaylorModel t, double pw, double h)
    : taylor(std::move(t)), power(pw), H(h) {
  if (!(H > 0.0)) throw ConfigError("tensor model needs H > 0");
  if (!(power >= 0.0)) throw ConfigError("tensor model needs power >= 0");
}

Vector TensorModel::evaluate(const Vector& u) const {
  return taylor.evaluate(u) + radial_regularizer(u - anchor(), H, power);
}

RegularizedModel TensorModel::as_regularized() const {
  if (order() != 2) throw UnsupportedOrder("as_regularized is only defined for order 2");
  return RegularizedModel(taylor.base, power, H);
}

double c_p_nu(int p, double nu) {
  if (p < 2) throw ConfigError("c_p_nu needs p >= 2");
  if (!(nu >= 0.0 && nu <= 1.0)) throw ConfigError("c_p_nu needs nu in [0, 1]");
  return std::exp(std::lgamma(nu + 1.0) - std::lgamma(p + nu));
}

Matrix tensor_model_jacobian(const TensorModel& model, const Vector& u) {
  const Vector d = u - model.anchor();
  const int n = static_cast<int>(d.size());
  Matrix DG = model.taylor.base.jacobian_at_anchor;
  double factorial = 1.0;  // (i-1)!
  for (int i = 2; i <= model.order() - 1; ++i) {
    factorial *= i - 1;
    std::vector<Vector> dirs(static_cast<std::size_t>(i), d);
    for (int j = 0; j < n; ++j) {
      dirs.back() = Vector::Unit(n, j);
      DG.col(j) += model.taylor.op->higher_deriv_apply(i, model.anchor(), dirs) / factorial;
    }
  }
  const double dn = norm(d);
  DG.diagonal().array() += model.H * pow_nonneg(dn, model.power);
  if (dn > 0.0) DG += model.H * model.power * std::pow(dn, model.power - 2.0) * d * d.transpose();
  return DG;
}

namespace {

/// Rounding floor of ||G(u)||: the terms of the model cancel at the solution.
double tensor_noise(const TensorModel& m, const Vector& u) {
  const Vector d = u - m.anchor();
  const double dn = norm(d);
  const Vector lin = m.taylor.base.evaluate(u);
  const double higher = norm(m.taylor.evaluate(u) - lin);
  return 64.0 * std::numeric_limits<double>::epsilon() *
         (norm(m.taylor.base.value_at_anchor) +
          m.taylor.base.jacobian_at_anchor.norm() * (dn + norm(m.anchor())) + higher +
          m.H * pow_nonneg(dn, m.power) * dn);
}

struct NewtonResult {
  Vector point;
  Vector value;  ///< G(point)
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

/// Damped Newton on the system Phi(x) = 0 with backtracking on ||Phi||.
template <class PhiFn, class JacFn, class DoneFn>
NewtonResult damped_newton(Vector x, const PhiFn& phi, const JacFn& jac, const DoneFn& done,
                           int max_iterations) {
  NewtonResult r;
  Vector f = phi(x);
  double fn = norm(f);
  for (int it = 0; it < max_iterations; ++it) {
    r.iterations = it;
    if (!std::isfinite(fn)) break;
    if (done(x, f)) {
      r.converged = true;
      break;
    }
    const Vector step = jac(x).colPivHouseholderQr().solve(-f);
    if (!all_finite(step)) break;
    bool moved = false;
    for (double t = 1.0; t > 1e-12; t *= 0.5) {
      const Vector cand = x + t * step;
      const Vector fc = phi(cand);
      const double fcn = norm(fc);
      if (std::isfinite(fcn) && fcn <= (1.0 - 1e-4 * t) * fn) {
        x = cand;
        f = fc;
        fn = fcn;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  r.point = std::move(x);
  r.value = std::move(f);
  return r;
}

std::optional<SubproblemSolution> newton_tensor(const TensorModel& m, const FeasibleSet& set,
                                                const Vector& start, double tol) {
  constexpr int kMaxIterations = 100;
  auto G = [&m](const Vector& u) { return m.evaluate(u); };
  auto DG = [&m](const Vector& u) { return tensor_model_jacobian(m, u); };
  auto interior_done = [&](const Vector& u, const Vector& Gu) {
    return norm(Gu) <= std::max(tol, tensor_noise(m, u));
  };
  NewtonResult free = damped_newton(start, G, DG, interior_done, kMaxIterations);
  int iterations = free.iterations;
  auto accept = [&](const Vector& u, int its) -> std::optional<SubproblemSolution> {
    const Vector Gu = G(u);
    const double res = natural_residual_from_value(set, u, Gu);
    if (!(res <= std::max(tol, tensor_noise(m, u)))) return std::nullopt;
    SubproblemSolution sol;
    sol.point = u;
    sol.residual = res;
    sol.inner_iterations = its;
    sol.method_used = InnerMethod::Newton;
    return sol;
  };
  if (free.converged && (set.kind() == SetKind::WholeSpace || set.contains(free.point))) {
    return accept(free.point, iterations);
  }
  if (set.kind() != SetKind::Ball) return std::nullopt;

  // Active ball: G(u) + mu (u - c) = 0 with ||u - c|| = r and mu >= 0.
  const Vector& c = set.center();
  const double r = set.radius();
  const int n = static_cast<int>(c.size());
  Vector x(n + 1);
  x.head(n) = set.project(free.converged ? free.point : start);
  if (norm(x.head(n) - c) < r) x.head(n) = set.project(c + 2.0 * r * (x.head(n) - c) /
                                                       std::max(norm(x.head(n) - c), 1e-300));
  x(n) = std::max(0.0, -G(x.head(n)).dot(x.head(n) - c) / (r * r));
  auto phi = [&](const Vector& y) {
    Vector out(n + 1);
    const Vector u = y.head(n);
    out.head(n) = G(u) + y(n) * (u - c);
    out(n) = 0.5 * ((u - c).squaredNorm() - r * r);
    return out;
  };
  auto jac = [&](const Vector& y) {
    const Vector u = y.head(n);
    Matrix Jm = Matrix::Zero(n + 1, n + 1);
    Jm.topLeftCorner(n, n) = DG(u);
    Jm.topLeftCorner(n, n).diagonal().array() += y(n);
    Jm.block(0, n, n, 1) = u - c;
    Jm.block(n, 0, 1, n) = (u - c).transpose();
    return Jm;
  };
  auto kkt_done = [&](const Vector& y, const Vector&) {
    if (y(n) < 0.0) return false;
    const Vector u = set.project(y.head(n));
    return natural_residual_from_value(set, u, G(u)) <= std::max(tol, tensor_noise(m, u));
  };
  NewtonResult kkt = damped_newton(x, phi, jac, kkt_done, kMaxIterations);
  iterations += kkt.iterations;
  if (!kkt.converged) return std::nullopt;
  return accept(set.project(kkt.point.head(n)), iterations);
}

}  // namespace

SubproblemSolution solve_tensor_subproblem(const TensorModel& model, const FeasibleSet& set,
                                           double inner_tol, bool allow_untested_order,
                                           const InnerOptions& options) {
  if (model.order() == 2) return solve_model_vi(model.as_regularized(), set, inner_tol, options);
  if (model.order() > 3 && !allow_untested_order) {
    throw UnsupportedOrder("tensor order p = " + std::to_string(model.order()) +
                           " is untested; opt in explicitly to use the generic path");
  }
  if (!(inner_tol > 0.0)) throw ConfigError("inner_tol must be > 0");
  const Vector& z = model.anchor();
  const double gnorm = norm(model.taylor.base.value_at_anchor);
  if (gnorm == 0.0) {
    SubproblemSolution sol;
    sol.point = z;
    sol.method_used = InnerMethod::Newton;
    return sol;
  }
  const double tol = effective_inner_tol(inner_tol, model.taylor.base.value_at_anchor);
  const Vector start = set.project(options.start.value_or(z));
  if (options.path != InnerPath::ProjectedExtragradient) {
    if (auto sol = newton_tensor(model, set, start, tol)) return *sol;
  }
  const ModelFn G = [&model](const Vector& u) { return model.evaluate(u); };
  SubproblemSolution sol =
      solve_vi_extragradient(G, set, start, std::max(tol, tensor_noise(model, start)),
                             options.max_extragradient_iterations);
  if (options.path != InnerPath::ProjectedExtragradient) {
    sol.warnings.insert(sol.warnings.begin(), "newton path did not converge; used extragradient");
  }
  return sol;
}

RunResult run_nu_aret(const Operator& op, const FeasibleSet& set, const Vector& z0, int p,
                      double nu, double H0, int K, const SolverConfig& cfg) {
  if (p < 2) throw ConfigError("key 'p' must be >= 2");
  if (!(nu >= 0.0 && nu <= 1.0)) throw ConfigError("key 'nu' must lie in [0, 1]");
  return run_adaptive(op, set, z0, ExponentMode::tensor(p, nu), H0, K, cfg, std::nullopt,
                      Method::NuAret);
}

RunResult run_uret(const Operator& op, const FeasibleSet& set, const Vector& z0, int p, double H0,
                   int K, double eps, const SolverConfig& cfg) {
  if (p < 2) throw ConfigError("key 'p' must be >= 2");
  if (!(eps > 0.0)) throw ConfigError("key 'eps' must be > 0");
  return run_adaptive(op, set, z0, ExponentMode::tensor_universal(p), H0, K, cfg, eps,
                      Method::Uret);
}

}  // namespace hvi
