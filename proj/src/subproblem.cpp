#include "holder_vi/subproblem.hpp"

#include <algorithm>
#include <cmath>

namespace hvi {

std::string to_string(InnerMethod m) {
  switch (m) {
    case InnerMethod::Secular:
      return "secular";
    case InnerMethod::ProjectedExtragradient:
      return "projected-extragradient";
    case InnerMethod::Newton:
      return "newton";
  }
  return "unknown";
}

double natural_residual_from_value(const FeasibleSet& set, const Vector& u, const Vector& Gu) {
  const Vector w = u - Gu;
  // Interior case: u - P(w) = G(u) exactly, which survives when G(u) is below ulp(u).
  if (set.kind() == SetKind::WholeSpace || set.contains(w, 0.0)) return norm(Gu);
  return norm(u - set.project(w));
}

double natural_residual(const ModelFn& G, const FeasibleSet& set, const Vector& u) {
  return natural_residual_from_value(set, u, G(u));
}

SubproblemSolution solve_vi_extragradient(const ModelFn& G, const FeasibleSet& set,
                                          const Vector& start, double tol, int max_iterations) {
  Vector u = set.project(start);
  Vector Gu = G(u);
  double beta = 1.0;
  double best_res = std::numeric_limits<double>::infinity();
  Vector best = u;
  for (int it = 0; it < max_iterations; ++it) {
    const double res = natural_residual_from_value(set, u, Gu);
    if (res < best_res) {
      best_res = res;
      best = u;
    }
    if (res <= tol) {
      SubproblemSolution sol;
      sol.point = u;
      sol.residual = res;
      sol.inner_iterations = it;
      sol.method_used = InnerMethod::ProjectedExtragradient;
      return sol;
    }
    Vector ub, Gub;
    double ratio = 0.0;
    for (;;) {
      ub = set.project(u - beta * Gu);
      Gub = G(ub);
      const double du = norm(ub - u);
      const double dg = norm(Gub - Gu);
      if (du == 0.0 || beta * dg <= 0.9 * du) {
        ratio = du == 0.0 ? 0.0 : beta * dg / du;
        break;
      }
      beta *= 0.5;
      if (beta < 1e-300) {
        throw SubproblemFailure("projected extragradient: step collapsed", best_res, best);
      }
    }
    u = set.project(u - beta * Gub);
    Gu = G(u);
    if (ratio < 0.5) beta *= 1.5;
  }
  throw SubproblemFailure("projected extragradient: iteration budget exhausted (best residual " +
                              std::to_string(best_res) + ")",
                          best_res, best);
}

namespace {

/// Root of a function that is positive at `lo` and negative at `hi`, by the
/// Illinois variant of regula falsi. A bisection step is forced whenever a
/// value is not finite or two steps fail to halve the bracket. Returns the
/// last evaluated abscissa.
template <class Fn>
double illinois_root(Fn&& f, double lo, double hi, double flo, double fhi, double xtol,
                     double ftol) {
  int side = 0;
  double x = lo;
  double width_two_ago = hi - lo;
  double width_one_ago = hi - lo;
  for (int it = 0; it < 400; ++it) {
    const bool stalled = it >= 2 && (hi - lo) > 0.5 * width_two_ago;
    if (!stalled && std::isfinite(flo) && std::isfinite(fhi) && flo != fhi) {
      x = hi - fhi * (hi - lo) / (fhi - flo);
      if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    } else {
      x = 0.5 * (lo + hi);
    }
    const double fx = f(x);
    if (std::abs(fx) <= ftol) return x;
    if (fx > 0.0 || std::isnan(fx)) {
      lo = x;
      flo = fx;
      if (side == -1 && std::isfinite(fhi)) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == 1 && std::isfinite(flo)) flo *= 0.5;
      side = 1;
    }
    if (hi - lo <= xtol) return x;
    width_two_ago = width_one_ago;
    width_one_ago = hi - lo;
  }
  return x;
}

constexpr double kLogTiny = -690.0;  // ~1e-300
constexpr double kLogHuge = 690.0;

/// Shifted dense solves and the scalar condition lambda = H ||d(lambda)||^power.
class SecularSolver {
 public:
  SecularSolver(const Matrix& J, double H, double power, double inner_tol, int max_trials)
      : J_(J), H_(H), power_(power), inner_tol_(inner_tol), max_trials_(max_trials) {}

  struct Step {
    Vector d;
    double lambda = 0.0;
  };

  /// Solve (J + (lambda + mu) I) d = -rhs together with lambda = H ||d||^power.
  Step solve_lambda(double mu, const Vector& rhs) {
    trials_ = 0;
    visited_.clear();
    if (norm(rhs) == 0.0) return {Vector::Zero(rhs.size()), power_ == 0.0 ? H_ : 0.0};
    if (power_ == 0.0) return {shifted_solve(H_ + mu, rhs), H_};

    Vector last_d;
    auto psi = [&](double s) {
      const double lambda = std::exp(s);
      last_d = shifted_solve(lambda + mu, rhs);
      const double n = norm(last_d);
      if (!std::isfinite(n)) return std::numeric_limits<double>::infinity();
      visited_.emplace_back(lambda, n);
      if (n == 0.0) return -std::numeric_limits<double>::infinity();
      return std::log(H_) + power_ * std::log(n) - s;
    };

    double lo = std::log(std::min(inner_tol_, 1.0));
    double hi = 0.0;
    double flo = psi(lo);
    double fhi = psi(hi);
    double width = std::max(1.0, hi - lo);
    while (flo <= 0.0 && lo > kLogTiny) {
      hi = lo;
      fhi = flo;
      lo = std::max(kLogTiny, lo - width);
      width *= 2.0;
      flo = psi(lo);
    }
    if (flo <= 0.0) {
      // lambda* below 1e-300: the shift is numerically zero.
      return {shifted_solve(std::exp(lo) + mu, rhs), std::exp(lo)};
    }
    width = std::max(1.0, hi - lo);
    while (fhi >= 0.0) {
      if (hi >= kLogHuge) throw SubproblemFailure("secular: no bracket for lambda", -1.0, Vector());
      lo = hi;
      flo = fhi;
      hi = std::min(kLogHuge, hi + width);
      width *= 2.0;
      fhi = psi(hi);
    }
    const double s = illinois_root(psi, lo, hi, flo, fhi, 1e-14 * std::max(1.0, std::abs(hi)),
                                   1e-14);
    const double lambda = std::exp(s);
    Vector d = shifted_solve(lambda + mu, rhs);
    check_monotone_bracket();
    return {std::move(d), lambda};
  }

  bool monotone_ok() const { return monotone_ok_; }
  int total_trials() const { return total_trials_; }

 private:
  Vector shifted_solve(double sigma, const Vector& rhs) {
    if (++trials_ > max_trials_) {
      throw SubproblemFailure("secular: lambda trial budget exhausted", -1.0, Vector());
    }
    ++total_trials_;
    Matrix A = J_;
    A.diagonal().array() += sigma;
    return -A.partialPivLu().solve(rhs);
  }

  void check_monotone_bracket() {
    std::sort(visited_.begin(), visited_.end());
    for (std::size_t i = 1; i < visited_.size(); ++i) {
      if (visited_[i].second > visited_[i - 1].second * (1.0 + 1e-9) + 1e-300) {
        monotone_ok_ = false;
      }
    }
  }

  const Matrix& J_;
  double H_;
  double power_;
  double inner_tol_;
  int max_trials_;
  int trials_ = 0;
  int total_trials_ = 0;
  bool monotone_ok_ = true;
  std::vector<std::pair<double, double>> visited_;
};

SubproblemSolution solve_secular(const RegularizedModel& model, const FeasibleSet& set,
                                 double inner_tol, const InnerOptions& opt) {
  const Vector& z = model.anchor();
  const Vector& g = model.base.value_at_anchor;
  SecularSolver solver(model.base.jacobian_at_anchor, model.H, model.power, inner_tol,
                       opt.max_lambda_trials);

  auto step0 = solver.solve_lambda(0.0, g);
  Vector point = z + step0.d;
  if (set.kind() == SetKind::Ball && norm(point - set.center()) > set.radius()) {
    const Vector& c = set.center();
    const double r = set.radius();
    const Vector offset = z - c;
    Vector last_point;
    int outer = 0;
    auto phi = [&](double t) {
      if (++outer > opt.max_lambda_trials) {
        throw SubproblemFailure("secular: sphere multiplier budget exhausted", -1.0, Vector());
      }
      const double mu = std::exp(t);
      auto st = solver.solve_lambda(mu, g + mu * offset);
      last_point = z + st.d;
      return std::log(norm(last_point - c) / r);
    };
    const double scale = norm(g) / r + spectral_norm(model.base.jacobian_at_anchor) + 1e-300;
    double hi = std::log(scale);
    double fhi = phi(hi);
    double lo = hi;
    double flo = fhi;
    double width = 1.0;
    if (fhi > 0.0) {
      while (fhi > 0.0) {
        if (hi >= kLogHuge) throw SubproblemFailure("secular: no sphere bracket", -1.0, Vector());
        lo = hi;
        flo = fhi;
        hi = std::min(kLogHuge, hi + width);
        width *= 2.0;
        fhi = phi(hi);
      }
    } else {
      while (flo <= 0.0 && lo > kLogTiny) {
        hi = lo;
        fhi = flo;
        lo = std::max(kLogTiny, lo - width);
        width *= 2.0;
        flo = phi(lo);
      }
    }
    if (flo > 0.0 && fhi < 0.0) {
      illinois_root(phi, lo, hi, flo, fhi, 1e-15 * std::max(1.0, std::abs(hi)), 1e-16);
    }
    point = set.project(last_point);
  }

  SubproblemSolution sol;
  sol.point = point;
  sol.inner_iterations = solver.total_trials();
  sol.method_used = InnerMethod::Secular;
  if (!solver.monotone_ok()) sol.warnings.push_back("non-monotone ||d(lambda)|| along bracket");
  return sol;
}

/// Rounding level of the model residual at u: 64 eps times the magnitudes
/// that cancel in g + J (u - z) + H ||u - z||^power (u - z). When the
/// operator's terms cancel (skew blocks near a solution) this exceeds the
/// relative tolerance, and asking for less would be chasing rounding.
double evaluation_noise(const RegularizedModel& m, const Vector& u) {
  const Vector d = u - m.anchor();
  const double dn = norm(d);
  const double Jn = m.base.jacobian_at_anchor.norm();
  return 64.0 * std::numeric_limits<double>::epsilon() *
         (norm(m.base.value_at_anchor) + Jn * (dn + norm(m.anchor())) +
          m.H * pow_nonneg(dn, m.power) * dn);
}

bool jacobian_is_psd(const Matrix& J) {
  const Matrix S = 0.5 * (J + J.transpose());
  const double scale = 1.0 + S.cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -1e-10 * scale;
}

}  // namespace

SubproblemSolution solve_model_vi(const RegularizedModel& model, const FeasibleSet& set,
                                  double inner_tol, const InnerOptions& options) {
  if (!(inner_tol > 0.0)) throw ConfigError("inner_tol must be > 0");
  if (model.anchor().size() != set.dim()) throw ConfigError("model/set dimension mismatch");
  const ModelFn G = [&model](const Vector& u) { return model.evaluate(u); };
  const Vector& z = model.anchor();
  const double gnorm = norm(model.base.value_at_anchor);
  if (gnorm == 0.0) {
    SubproblemSolution sol;
    sol.point = z;
    sol.residual = 0.0;
    sol.method_used =
        options.path == InnerPath::ProjectedExtragradient ? InnerMethod::ProjectedExtragradient
                                                          : InnerMethod::Secular;
    return sol;
  }
  double tol = effective_inner_tol(inner_tol, model.base.value_at_anchor);
  double noise = 0.0;

  std::vector<std::string> warnings;
  bool use_secular = options.path != InnerPath::ProjectedExtragradient &&
                     set.kind() != SetKind::Box;
  if (use_secular && !jacobian_is_psd(model.base.jacobian_at_anchor)) {
    warnings.push_back("Jacobian not positive semidefinite; using projected extragradient");
    use_secular = false;
  }
  if (use_secular) {
    try {
      SubproblemSolution sol = solve_secular(model, set, inner_tol, options);
      sol.residual = natural_residual(G, set, sol.point);
      noise = evaluation_noise(model, sol.point);
      tol = std::max(tol, noise);
      // The natural-map residual certifies the point; bracket warnings only annotate it.
      const bool ok = sol.residual <= tol;
      if (ok || options.path == InnerPath::Secular) {
        if (!ok) {
          throw SubproblemFailure("secular path missed inner_tol", sol.residual, sol.point);
        }
        return sol;
      }
      warnings.insert(warnings.end(), sol.warnings.begin(), sol.warnings.end());
      warnings.push_back("secular residual above tolerance; falling back");
    } catch (const SubproblemFailure& e) {
      if (options.path == InnerPath::Secular) throw;
      warnings.push_back(e.what());
    }
  }
  SubproblemSolution sol = solve_vi_extragradient(G, set, options.start.value_or(z), tol,
                                                  options.max_extragradient_iterations);
  sol.warnings.insert(sol.warnings.begin(), warnings.begin(), warnings.end());
  return sol;
}

double effective_inner_tol(double inner_tol, const Vector& g) {
  // Below ~1e-300 the residual is made of subnormals and cannot be resolved.
  constexpr double kFloor = 1e-300;
  return std::max(inner_tol * std::min(1.0, norm(g)), kFloor);
}

Vector prox_step(const Vector& z_k, const Vector& g, double gamma, const FeasibleSet& set) {
  if (!(gamma > 0.0)) {
    throw DegenerateRegularization("prox step needs gamma > 0 (got " + std::to_string(gamma) +
                                   ")");
  }
  return set.project(z_k - g / gamma);
}

double gamma_of(double H, double nu, double step_norm) { return H * pow_nonneg(step_norm, nu); }

}  // namespace hvi
