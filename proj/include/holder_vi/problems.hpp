#pragma once

#include "holder_vi/core.hpp"

#include <map>

namespace hvi {

/// Operator, set and the smoothness constants it is declared to satisfy.
struct ProblemInstance {
  ProblemInstance(std::string n, Operator o, FeasibleSet s)
      : name(std::move(n)), op(std::move(o)), set(std::move(s)) {}

  std::string name;
  Operator op;
  FeasibleSet set;
  double declared_nu = 1.0;
  double declared_H = 0.0;
  std::optional<double> declared_higher_nu;  ///< Hölder exponent of ∇²F
  std::optional<double> declared_higher_H;   ///< H_{3,nu}
  double diameter = 0.0;
  std::optional<Vector> solution;
  /// Default starting point: 0.8 r along a fixed alternating-sign direction.
  Vector z0;
  std::vector<std::string> notes;
};

/// Number of pairs and seed used by the declared-constant sampling oracle.
inline constexpr int kDeclaredSamplePairs = 10000;
inline constexpr std::uint64_t kDeclaredSampleSeed = 20240611;

/// F(z) = ||z||^nu z on ball(0, r).
ProblemInstance make_power(int d, double nu, double radius);

/// F(x, y) = (A y + a, -A^T x - b) on ball(0, r). shift = 0 gives a = b = 0.
ProblemInstance make_bilinear(int d, double scale, double radius, std::uint64_t seed,
                              double shift = 0.0);

/// Gradient field of x^T A y + ||x||^4/4 - ||y||^4/4 on ball(0, r), with A of
/// the given rank (rank <= 0 means full rank).
ProblemInstance make_quartic_saddle(int d, double radius, std::uint64_t seed, int rank = 1);

/// F_i(z) = L clamp(z_i, -r/2, r/2) on ball(0, r).
ProblemInstance make_piecewise(int d, double L, double radius);

/// Parse "name:key=val,key=val" (see README for the keys of each family).
ProblemInstance parse_problem_spec(const std::string& spec);

/// Key/value parameters of a problem spec, with defaults expanded.
std::map<std::string, std::string> resolved_problem_params(const std::string& spec);

/// Canonical spec string with every key present.
std::string canonical_problem_spec(const std::string& spec);

/// Copy with declared_H scaled (negative-control hook for the verifier).
ProblemInstance with_scaled_declared_H(const ProblemInstance& p, double factor);

}  // namespace hvi
