#include "holder_vi/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hvi {

bool all_finite(const Vector& v) { return v.allFinite(); }

std::string format_point(const Vector& v) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << v[i];
  }
  os << ")";
  return os.str();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

// ---------------------------------------------------------------------------

Operator::Operator(int dim, EvalFn eval, JacobianFn jacobian, HigherFn higher,
                   OperatorMetadata meta)
    : dim_(dim),
      eval_(std::move(eval)),
      jacobian_(std::move(jacobian)),
      higher_(std::move(higher)),
      meta_(meta) {
  if (dim_ <= 0) throw ConfigError("operator dimension must be positive");
  if (!eval_ || !jacobian_) throw ConfigError("operator needs both F and its Jacobian");
}

void Operator::check_dim(const Vector& z, const char* what) const {
  if (z.size() != dim_) {
    throw ConfigError(std::string(what) + ": dimension mismatch (got " + std::to_string(z.size()) +
                      ", expected " + std::to_string(dim_) + ")");
  }
}

Vector Operator::eval(const Vector& z) const {
  check_dim(z, "operator eval");
  Vector v = eval_(z);
  if (!all_finite(v)) throw EvaluationError("non-finite operator value at " + format_point(z));
  return v;
}

Matrix Operator::jacobian(const Vector& z) const {
  check_dim(z, "operator jacobian");
  Matrix j = jacobian_(z);
  if (!j.allFinite()) throw EvaluationError("non-finite Jacobian at " + format_point(z));
  return j;
}

Vector Operator::higher_deriv_apply(int order, const Vector& z,
                                    std::span<const Vector> dirs) const {
  if (!higher_) throw UnsupportedOrder("operator has no higher-derivative oracle");
  if (order < 2 || static_cast<int>(dirs.size()) != order) {
    throw ConfigError("higher_deriv_apply needs order >= 2 and one direction per order");
  }
  check_dim(z, "higher_deriv_apply");
  Vector v = higher_(order, z, dirs);
  if (!all_finite(v)) {
    throw EvaluationError("non-finite derivative of order " + std::to_string(order) + " at " +
                          format_point(z));
  }
  return v;
}

Operator Operator::with_metadata(OperatorMetadata meta) const {
  Operator copy = *this;
  copy.meta_ = meta;
  return copy;
}

// ---------------------------------------------------------------------------

FeasibleSet FeasibleSet::ball(Vector center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("ball radius must be positive");
  return FeasibleSet(SetKind::Ball, std::move(center), Vector(), radius);
}

FeasibleSet FeasibleSet::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size()) throw ConfigError("box bounds differ in dimension");
  if ((lower.array() > upper.array()).any()) throw ConfigError("box lower bound exceeds upper");
  return FeasibleSet(SetKind::Box, std::move(lower), std::move(upper), 0.0);
}

FeasibleSet FeasibleSet::whole_space(int dim) {
  if (dim <= 0) throw ConfigError("dimension must be positive");
  return FeasibleSet(SetKind::WholeSpace, Vector::Zero(dim), Vector(), 0.0);
}

Vector FeasibleSet::project(const Vector& z) const {
  if (z.size() != dim()) throw ConfigError("project: dimension mismatch");
  switch (kind_) {
    case SetKind::Ball: {
      const Vector off = z - a_;
      const double n = norm(off);
      if (n <= radius_) return z;
      return a_ + (radius_ / n) * off;
    }
    case SetKind::Box:
      return z.cwiseMax(a_).cwiseMin(b_);
    case SetKind::WholeSpace:
      return z;
  }
  return z;
}

Vector FeasibleSet::support_argmax(const Vector& g) const {
  if (g.size() != dim()) throw ConfigError("support_argmax: dimension mismatch");
  switch (kind_) {
    case SetKind::Ball: {
      const double m = g.cwiseAbs().maxCoeff();
      if (m == 0.0) return a_;
      // Rescale first: r/||g|| overflows when g is subnormal.
      const Vector u = g / m;
      return a_ + (radius_ / u.norm()) * u;
    }
    case SetKind::Box: {
      Vector out(g.size());
      for (Eigen::Index i = 0; i < g.size(); ++i) out[i] = g[i] < 0.0 ? a_[i] : b_[i];
      return out;
    }
    case SetKind::WholeSpace:
      throw UnboundedGap("linear maximization over the whole space is unbounded");
  }
  return a_;
}

double FeasibleSet::diameter() const {
  switch (kind_) {
    case SetKind::Ball:
      return 2.0 * radius_;
    case SetKind::Box:
      return norm(b_ - a_);
    case SetKind::WholeSpace:
      return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

bool FeasibleSet::contains(const Vector& z, double tol) const {
  switch (kind_) {
    case SetKind::Ball:
      return norm(z - a_) <= radius_ + tol;
    case SetKind::Box:
      return ((z.array() >= a_.array() - tol) && (z.array() <= b_.array() + tol)).all();
    case SetKind::WholeSpace:
      return true;
  }
  return false;
}

namespace {
Vector sample_unit_ball(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector g(d);
  double n = 0.0;
  do {
    for (int i = 0; i < d; ++i) g[i] = normal(rng);
    n = norm(g);
  } while (n == 0.0);
  return (std::pow(unif(rng), 1.0 / d) / n) * g;
}
}  // namespace

Vector FeasibleSet::sample(Rng& rng, double fallback_radius) const {
  switch (kind_) {
    case SetKind::Ball:
      return a_ + radius_ * sample_unit_ball(dim(), rng);
    case SetKind::Box: {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      Vector z(dim());
      for (int i = 0; i < dim(); ++i) z[i] = a_[i] + unif(rng) * (b_[i] - a_[i]);
      return z;
    }
    case SetKind::WholeSpace:
      return fallback_radius * sample_unit_ball(dim(), rng);
  }
  return a_;
}

Vector FeasibleSet::middle() const {
  if (kind_ == SetKind::Box) return 0.5 * (a_ + b_);
  return a_;
}

// ---------------------------------------------------------------------------

std::string to_string(Method m) {
  switch (m) {
    case Method::NuRen: return "nu-ren";
    case Method::NuAren: return "nu-aren";
    case Method::Uren: return "uren";
    case Method::NuAret: return "nu-aret";
    case Method::Uret: return "uret";
    case Method::Extragradient: return "extragradient";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  for (Method m : {Method::NuRen, Method::NuAren, Method::Uren, Method::NuAret, Method::Uret,
                   Method::Extragradient}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown method '" + s + "' (key 'method')");
}

double SolverConfig::resolved_inner_tol() const {
  return inner_tol.value_or(std::min(1e-10, eps * 1e-4));
}

void SolverConfig::validate() const {
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(K >= 1, "key 'K' must be >= 1 (got " + std::to_string(K) + ")");
  need(eps > 0.0, "key 'eps' must be > 0");
  need(H0 > 0.0 && std::isfinite(H0), "key 'H0' must be > 0");
  need(resolved_inner_tol() > 0.0, "key 'inner_tol' must be > 0");
  need(max_doublings >= 1, "key 'max_doublings' must be >= 1");
  need(p >= 2, "key 'p' must be >= 2");
  const bool needs_nu =
      method == Method::NuRen || method == Method::NuAren || method == Method::NuAret;
  if (needs_nu) {
    need(nu.has_value(), "missing required key 'nu' for method " + to_string(method));
    need(*nu >= 0.0 && *nu <= 1.0, "key 'nu' must lie in [0, 1]");
  }
  if (method == Method::NuRen) {
    need(H_nu.has_value(), "missing required key 'H' for method nu-ren");
    need(*H_nu > 0.0, "key 'H' must be > 0");
  }
  if (step) need(*step > 0.0, "key 'step' must be > 0");
}

// ---------------------------------------------------------------------------

MonotonicityReport check_monotone(const Operator& op, const FeasibleSet& set, int n_samples,
                                  std::uint64_t seed) {
  if (op.dim() != set.dim()) throw ConfigError("check_monotone: operator/set dimension mismatch");
  if (n_samples < 1) throw ConfigError("check_monotone: n_samples must be >= 1");
  Rng rng(seed);
  MonotonicityReport rep;
  rep.worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_samples; ++s) {
    const Vector z = set.sample(rng);
    const Vector z2 = set.sample(rng);
    const double v = (op.eval(z) - op.eval(z2)).dot(z - z2);
    if (v < rep.worst) {
      rep.worst = v;
      rep.worst_z = z;
      rep.worst_z2 = z2;
    }
  }
  rep.monotone = rep.worst >= -1e-10;
  return rep;
}

double estimate_holder_constant(const Operator& op, const FeasibleSet& set, double nu,
                                int n_samples, std::uint64_t seed) {
  if (nu < 0.0 || nu > 1.0) throw ConfigError("estimate_holder_constant: nu must lie in [0, 1]");
  if (op.dim() != set.dim()) throw ConfigError("estimate_holder_constant: dimension mismatch");
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Vector mid = set.middle();
  const double scale = set.bounded() ? set.diameter() : 1.0;
  double best = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    Vector z = set.sample(rng);
    Vector z2;
    switch (s % 4) {
      case 0:
        z2 = set.sample(rng);
        break;
      case 1:  // same ray through the middle
        z2 = mid + unif(rng) * (z - mid);
        break;
      case 2: {  // short hop, radial or random direction
        Vector dir = (s % 8 == 2) ? Vector(z - mid) : set.sample(rng) - mid;
        if (norm(dir) == 0.0) dir = Vector::Ones(z.size());
        z2 = set.project(z - 1e-3 * scale * unif(rng) * dir / norm(dir));
        break;
      }
      default:
        z2 = mid;
        break;
    }
    const double dist = norm(z - z2);
    if (dist == 0.0) {  // degenerate pair: resample
      --s;
      continue;
    }
    const double diff = spectral_norm(op.jacobian(z) - op.jacobian(z2));
    best = std::max(best, diff / pow_nonneg(dist, nu));
  }
  return best;
}

}  // namespace hvi
