#include "holder_vi/problems.hpp"

#include "holder_vi/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace hvi {

namespace {

Vector default_start(int d, double radius) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = (i % 2 == 0 ? 1.0 : -1.0) / (i + 1.0);
  return 0.8 * radius * v / norm(v);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

/// max(sampled H, closed form), recording both.
double declare_H(const Operator& op, const FeasibleSet& set, double nu, double closed_form,
                 const std::string& closed_form_note, std::vector<std::string>& notes) {
  const double sampled =
      estimate_holder_constant(op, set, nu, kDeclaredSamplePairs, kDeclaredSampleSeed);
  notes.push_back("sampled H = " + fmt(sampled) + " (" + std::to_string(kDeclaredSamplePairs) +
                  " pairs, seed " + std::to_string(kDeclaredSampleSeed) + ")");
  notes.push_back("closed-form H = " + fmt(closed_form) + " (" + closed_form_note + ")");
  return std::max(sampled, closed_form);
}

void finalize(ProblemInstance& p) {
  OperatorMetadata m;
  m.nu = p.declared_nu;
  m.holder_constant = p.declared_H;
  m.higher_nu = p.declared_higher_nu;
  m.higher_holder_constant = p.declared_higher_H;
  m.monotone = true;
  p.op = p.op.with_metadata(m);
  p.diameter = p.set.diameter();
}

void require_dim(int d, bool even) {
  if (d < 1) throw ConfigError("problem key 'd' must be >= 1");
  if (even && d % 2 != 0) throw ConfigError("problem key 'd' must be even");
}

void require_radius(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("problem key 'r' must be > 0");
}

}  // namespace

ProblemInstance make_power(int d, double nu, double radius) {
  require_dim(d, false);
  require_radius(radius);
  if (nu == 0.0) throw ConfigError("power problem needs nu in (0, 1]; use piecewise for nu = 0");
  if (!(nu > 0.0 && nu <= 1.0)) throw ConfigError("problem key 'nu' must lie in (0, 1]");
  auto eval = [nu](const Vector& z) -> Vector {
    const double n = norm(z);
    return n == 0.0 ? Vector::Zero(z.size()) : Vector(std::pow(n, nu) * z);
  };
  auto jac = [nu](const Vector& z) -> Matrix {
    const int dim = static_cast<int>(z.size());
    const double n = norm(z);
    if (n == 0.0) return Matrix::Zero(dim, dim);
    Matrix J = std::pow(n, nu) * Matrix::Identity(dim, dim);
    const Vector u = z / n;
    J += nu * std::pow(n, nu) * u * u.transpose();
    return J;
  };
  ProblemInstance p{"power:d=" + std::to_string(d) + ",nu=" + fmt(nu) + ",r=" + fmt(radius),
                    Operator(d, eval, jac),
                    FeasibleSet::ball(Vector::Zero(d), radius)};
  p.declared_nu = nu;
  p.declared_H = declare_H(p.op, p.set, nu, 1.0 + nu, "||∇F(z) - ∇F(0)|| = (1+nu)||z||^nu", p.notes);
  p.solution = Vector::Zero(d);
  p.z0 = default_start(d, radius);
  finalize(p);
  return p;
}

ProblemInstance make_bilinear(int d, double scale, double radius, std::uint64_t seed,
                              double shift) {
  require_dim(d, true);
  require_radius(radius);
  if (!std::isfinite(scale)) throw ConfigError("problem key 'scale' must be finite");
  const int n = d / 2;
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix A(n, n);
  if (n == 1) {
    A(0, 0) = scale;
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = gauss(rng) * scale / std::sqrt(double(n));
  }
  Vector a = Vector::Zero(n), b = Vector::Zero(n);
  if (shift != 0.0) {
    for (int i = 0; i < n; ++i) a(i) = shift * gauss(rng);
    for (int i = 0; i < n; ++i) b(i) = shift * gauss(rng);
  }
  Matrix M = Matrix::Zero(d, d);
  M.topRightCorner(n, n) = A;
  M.bottomLeftCorner(n, n) = -A.transpose();
  Vector c(d);
  c << a, -b;
  auto eval = [M, c](const Vector& z) -> Vector { return M * z + c; };
  auto jac = [M](const Vector&) -> Matrix { return M; };
  auto higher = [](int, const Vector& z, std::span<const Vector>) -> Vector {
    return Vector::Zero(z.size());
  };
  ProblemInstance p{"bilinear:d=" + std::to_string(d) + ",scale=" + fmt(scale) + ",r=" +
                        fmt(radius) + ",seed=" + std::to_string(seed) + ",shift=" + fmt(shift),
                    Operator(d, eval, jac, higher),
                    FeasibleSet::ball(Vector::Zero(d), radius)};
  p.declared_nu = 1.0;
  p.declared_H = 0.0;
  p.declared_higher_nu = 1.0;
  p.declared_higher_H = 0.0;
  p.notes.push_back("constant Jacobian: H = 0 for every nu");
  if (shift == 0.0) {
    p.solution = Vector::Zero(d);
  } else {
    Eigen::FullPivLU<Matrix> lu(M);
    bool done = false;
    if (lu.isInvertible()) {
      Vector zs = lu.solve(-c);
      if (norm(zs) <= radius) {
        p.solution = zs;
        p.notes.push_back("solution from the interior linear system");
        done = true;
      }
    }
    if (!done) {
      const ModelFn G = [eval](const Vector& z) { return eval(z); };
      try {
        p.solution =
            solve_vi_extragradient(G, p.set, Vector::Zero(d), 1e-12, 2000000).point;
        p.notes.push_back("solution from a projected-extragradient run to residual 1e-12");
      } catch (const SubproblemFailure&) {
        p.notes.push_back("solution oracle did not converge; no solution recorded");
      }
    }
  }
  p.z0 = default_start(d, radius);
  finalize(p);
  return p;
}

ProblemInstance make_quartic_saddle(int d, double radius, std::uint64_t seed, int rank) {
  require_dim(d, true);
  require_radius(radius);
  const int n = d / 2;
  if (rank <= 0 || rank > n) rank = n;
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix U(n, rank), V(n, rank);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rank; ++j) U(i, j) = gauss(rng);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rank; ++j) V(i, j) = gauss(rng);
  const Matrix A = U * V.transpose() / std::sqrt(double(n * rank));

  auto eval = [A, n](const Vector& z) -> Vector {
    const Vector x = z.head(n), y = z.tail(n);
    Vector out(2 * n);
    out.head(n) = A * y + x.squaredNorm() * x;
    out.tail(n) = -A.transpose() * x + y.squaredNorm() * y;
    return out;
  };
  auto jac = [A, n](const Vector& z) -> Matrix {
    const Vector x = z.head(n), y = z.tail(n);
    Matrix J = Matrix::Zero(2 * n, 2 * n);
    J.topLeftCorner(n, n) = x.squaredNorm() * Matrix::Identity(n, n) + 2.0 * x * x.transpose();
    J.bottomRightCorner(n, n) =
        y.squaredNorm() * Matrix::Identity(n, n) + 2.0 * y * y.transpose();
    J.topRightCorner(n, n) = A;
    J.bottomLeftCorner(n, n) = -A.transpose();
    return J;
  };
  // Derivatives of the block map x -> ||x||^2 x.
  auto higher = [n](int order, const Vector& z, std::span<const Vector> dirs) -> Vector {
    Vector out = Vector::Zero(2 * n);
    if (order >= 4) return out;
    for (int blk = 0; blk < 2; ++blk) {
      const Vector h = dirs[0].segment(blk * n, n);
      const Vector k = dirs[1].segment(blk * n, n);
      if (order == 2) {
        const Vector x = z.segment(blk * n, n);
        out.segment(blk * n, n) = 2.0 * h.dot(k) * x + 2.0 * x.dot(k) * h + 2.0 * x.dot(h) * k;
      } else {
        const Vector l = dirs[2].segment(blk * n, n);
        out.segment(blk * n, n) = 2.0 * h.dot(k) * l + 2.0 * h.dot(l) * k + 2.0 * k.dot(l) * h;
      }
    }
    return out;
  };
  ProblemInstance p{"quartic:d=" + std::to_string(d) + ",r=" + fmt(radius) + ",seed=" +
                        std::to_string(seed) + ",rank=" + std::to_string(rank),
                    Operator(d, eval, jac, higher),
                    FeasibleSet::ball(Vector::Zero(d), radius)};
  p.declared_nu = 1.0;
  p.declared_H = declare_H(p.op, p.set, 1.0, 6.0 * radius,
                           "third derivative of ||x||^4/4 has norm <= 6||x||", p.notes);
  p.declared_higher_nu = 1.0;
  p.declared_higher_H = 6.0;
  p.notes.push_back("H_{3,1} = 6: the third derivative of ||x||^4/4 is constant with norm 6");
  p.solution = Vector::Zero(d);
  p.z0 = default_start(d, radius);
  finalize(p);
  return p;
}

ProblemInstance make_piecewise(int d, double L, double radius) {
  require_dim(d, false);
  require_radius(radius);
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("problem key 'L' must be > 0");
  const double band = 0.5 * radius;
  auto eval = [L, band](const Vector& z) -> Vector {
    return L * z.cwiseMax(-band).cwiseMin(band);
  };
  auto jac = [L, band](const Vector& z) -> Matrix {
    Vector diag(z.size());
    for (int i = 0; i < z.size(); ++i) diag(i) = std::abs(z(i)) < band ? L : 0.0;
    return diag.asDiagonal();
  };
  ProblemInstance p{"piecewise:d=" + std::to_string(d) + ",L=" + fmt(L) + ",r=" + fmt(radius),
                    Operator(d, eval, jac),
                    FeasibleSet::ball(Vector::Zero(d), radius)};
  p.declared_nu = 0.0;
  p.declared_H = declare_H(p.op, p.set, 0.0, 2.0 * L, "Lipschitz F gives nu = 0 with H = 2L",
                           p.notes);
  p.solution = Vector::Zero(d);
  p.z0 = default_start(d, radius);
  finalize(p);
  return p;
}

// ---------------------------------------------------------------------------
// Mini-grammar
// ---------------------------------------------------------------------------

namespace {

using Params = std::map<std::string, std::string>;

const std::map<std::string, Params>& families() {
  static const std::map<std::string, Params> f = {
      {"power", {{"d", "5"}, {"nu", "1"}, {"r", "1"}}},
      {"bilinear", {{"d", "10"}, {"scale", "1"}, {"r", "1"}, {"seed", "1"}, {"shift", "0"}}},
      {"quartic", {{"d", "10"}, {"r", "1"}, {"seed", "1"}, {"rank", "1"}}},
      {"piecewise", {{"d", "5"}, {"L", "1"}, {"r", "1"}}},
  };
  return f;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::pair<std::string, Params> split_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  std::string name = trim(spec.substr(0, colon));
  if (name == "quartic_saddle") name = "quartic";
  const auto it = families().find(name);
  if (it == families().end()) {
    throw ConfigError("unknown problem family '" + name +
                      "' (expected power, bilinear, quartic or piecewise)");
  }
  Params params = it->second;
  if (colon == std::string::npos) return {name, params};
  std::stringstream ss(spec.substr(colon + 1));
  std::string item;
  std::set<std::string> seen;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("problem parameter '" + item + "' is not of the form key=value");
    }
    const std::string key = trim(item.substr(0, eq));
    if (!params.count(key)) {
      throw ConfigError("unknown problem key '" + key + "' for family '" + name + "'");
    }
    if (!seen.insert(key).second) throw ConfigError("problem key '" + key + "' given twice");
    params[key] = trim(item.substr(eq + 1));
  }
  return {name, params};
}

double num(const Params& p, const std::string& key) {
  const std::string& v = p.at(key);
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("problem key '" + key + "' has non-numeric value '" + v + "'");
  }
}

int integer(const Params& p, const std::string& key) {
  const double x = num(p, key);
  if (x != std::floor(x) || std::abs(x) > 1e9) {
    throw ConfigError("problem key '" + key + "' must be an integer");
  }
  return static_cast<int>(x);
}

}  // namespace

std::map<std::string, std::string> resolved_problem_params(const std::string& spec) {
  return split_spec(spec).second;
}

std::string canonical_problem_spec(const std::string& spec) {
  const auto [name, params] = split_spec(spec);
  std::string out = name + ":";
  bool first = true;
  for (const auto& [k, v] : params) {
    out += (first ? "" : ",") + k + "=" + v;
    first = false;
  }
  return out;
}

ProblemInstance parse_problem_spec(const std::string& spec) {
  const auto [name, p] = split_spec(spec);
  if (name == "power") return make_power(integer(p, "d"), num(p, "nu"), num(p, "r"));
  if (name == "bilinear") {
    return make_bilinear(integer(p, "d"), num(p, "scale"), num(p, "r"),
                         static_cast<std::uint64_t>(integer(p, "seed")), num(p, "shift"));
  }
  if (name == "quartic") {
    return make_quartic_saddle(integer(p, "d"), num(p, "r"),
                               static_cast<std::uint64_t>(integer(p, "seed")),
                               integer(p, "rank"));
  }
  return make_piecewise(integer(p, "d"), num(p, "L"), num(p, "r"));
}

ProblemInstance with_scaled_declared_H(const ProblemInstance& p, double factor) {
  ProblemInstance q = p;
  q.declared_H *= factor;
  if (q.declared_higher_H) *q.declared_higher_H *= factor;
  q.notes.push_back("declared H scaled by " + fmt(factor) + " (test hook)");
  finalize(q);
  return q;
}

}  // namespace hvi
