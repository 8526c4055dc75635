#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hvi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: dimensions, parameter ranges, unknown keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The operator produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A regularization weight that must be positive came out as zero or negative.
class DegenerateRegularization : public Error {
 public:
  using Error::Error;
};

/// The gap certificate is unbounded (whole-space set with F(point) != 0).
class UnboundedGap : public Error {
 public:
  using Error::Error;
};

class UnsupportedOrder : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Small numeric helpers shared across modules
// ---------------------------------------------------------------------------

/// Euclidean norm that does not underflow for tiny coordinates.
inline double norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.stableNorm(); }

/// t^e with the convention 0^0 = 1.
inline double pow_nonneg(double t, double e) {
  if (e == 0.0) return 1.0;
  return std::pow(t, e);
}

bool all_finite(const Vector& v);
std::string format_point(const Vector& v);

/// Spectral norm (largest singular value).
double spectral_norm(const Matrix& m);

// ---------------------------------------------------------------------------
// Operator
// ---------------------------------------------------------------------------

struct OperatorMetadata {
  std::optional<double> nu;               ///< declared Hölder exponent of the Jacobian
  std::optional<double> holder_constant;  ///< declared H_nu
  /// Hölder data of the second derivative, for the p = 3 tensor methods.
  std::optional<double> higher_nu;
  std::optional<double> higher_holder_constant;
  bool monotone = true;
};

/// Black-box monotone operator F : R^d -> R^d with first and (optionally)
/// higher derivative oracles. Immutable after construction.
class Operator {
 public:
  using EvalFn = std::function<Vector(const Vector&)>;
  using JacobianFn = std::function<Matrix(const Vector&)>;
  /// (i, z, dirs) -> ∇^i F(z)[dirs[0], ..., dirs[i-1]]
  using HigherFn = std::function<Vector(int, const Vector&, std::span<const Vector>)>;

  Operator(int dim, EvalFn eval, JacobianFn jacobian, HigherFn higher = {},
           OperatorMetadata meta = {});

  int dim() const { return dim_; }
  const OperatorMetadata& metadata() const { return meta_; }
  bool has_higher_derivatives() const { return static_cast<bool>(higher_); }

  Vector eval(const Vector& z) const;
  Matrix jacobian(const Vector& z) const;
  /// ∇^order F(z) applied to `dirs` (order >= 2, dirs.size() == order).
  Vector higher_deriv_apply(int order, const Vector& z, std::span<const Vector> dirs) const;

  Operator with_metadata(OperatorMetadata meta) const;

 private:
  void check_dim(const Vector& z, const char* what) const;

  int dim_;
  EvalFn eval_;
  JacobianFn jacobian_;
  HigherFn higher_;
  OperatorMetadata meta_;
};

// ---------------------------------------------------------------------------
// Feasible set
// ---------------------------------------------------------------------------

enum class SetKind { Ball, Box, WholeSpace };

/// Closed convex set with exact projection and linear-maximization oracles.
class FeasibleSet {
 public:
  static FeasibleSet ball(Vector center, double radius);
  static FeasibleSet box(Vector lower, Vector upper);
  static FeasibleSet whole_space(int dim);

  SetKind kind() const { return kind_; }
  int dim() const { return static_cast<int>(a_.size()); }
  bool bounded() const { return kind_ != SetKind::WholeSpace; }

  const Vector& center() const { return a_; }  ///< ball only
  double radius() const { return radius_; }    ///< ball only
  const Vector& lower() const { return a_; }   ///< box only
  const Vector& upper() const { return b_; }   ///< box only

  Vector project(const Vector& z) const;
  /// argmax_{z in Z} <g, z>. Box ties (g_i = 0) resolve to the upper bound;
  /// ball with g = 0 returns the center. Throws UnboundedGap for whole space.
  Vector support_argmax(const Vector& g) const;
  /// Euclidean diameter; +inf for whole space.
  double diameter() const;
  bool contains(const Vector& z, double tol = 1e-12) const;

  /// Uniform sample from Z (whole space: from the ball of radius `fallback_radius`).
  Vector sample(Rng& rng, double fallback_radius = 1.0) const;
  /// A point of Z used as the reference "middle" (ball center, box midpoint, origin).
  Vector middle() const;

 private:
  FeasibleSet(SetKind kind, Vector a, Vector b, double radius)
      : kind_(kind), a_(std::move(a)), b_(std::move(b)), radius_(radius) {}

  SetKind kind_;
  Vector a_;
  Vector b_;
  double radius_ = 0.0;
};

// ---------------------------------------------------------------------------
// Solver configuration
// ---------------------------------------------------------------------------

enum class Method { NuRen, NuAren, Uren, NuAret, Uret, Extragradient };

std::string to_string(Method m);
Method parse_method(const std::string& s);

struct SolverConfig {
  Method method = Method::NuRen;
  std::optional<double> nu;
  std::optional<double> H_nu;
  double H0 = 1.0;
  int p = 2;
  int K = 100;
  double eps = 1e-6;
  std::optional<double> inner_tol;  ///< default min(1e-10, eps * 1e-4)
  int max_doublings = 60;
  std::uint64_t seed = 0;
  std::optional<double> step;  ///< extragradient step; default 1/(2 L_est)
  bool gap_every_iteration = true;
  bool record_wall_time = true;  ///< false writes wall_ns = 0
  bool allow_untested_order = false;

  double resolved_inner_tol() const;
  /// Throws ConfigError naming the offending key.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Sampling checks
// ---------------------------------------------------------------------------

struct MonotonicityReport {
  bool monotone = false;
  double worst = 0.0;  ///< min sampled <F(z)-F(z'), z-z'>
  Vector worst_z, worst_z2;
};

MonotonicityReport check_monotone(const Operator& op, const FeasibleSet& set, int n_samples,
                                  std::uint64_t seed);

/// Sampled lower bound on H_nu: max ||∇F(z)-∇F(z')|| / ||z-z'||^nu.
/// Mixes uniform pairs with radial, local and center-anchored pairs so that
/// the usual extremal configurations are visited.
double estimate_holder_constant(const Operator& op, const FeasibleSet& set, double nu,
                                int n_samples, std::uint64_t seed);

}  // namespace hvi
