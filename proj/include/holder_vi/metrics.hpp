#pragma once

#include "holder_vi/core.hpp"

#include <utility>

namespace hvi {

struct RunResult;
struct ProblemInstance;

// ---------------------------------------------------------------------------
// Gap certificate
// ---------------------------------------------------------------------------

/// Upper bound on m(point) = max_z <F(z), point - z> obtained from
/// monotonicity: m(point) <= max_z <F(point), point - z>.
struct GapCertificate {
  Vector point;
  double gap_upper = 0.0;
  Vector witness;  ///< argmax_z <F(point), point - z> = support_argmax(-F(point))
};

GapCertificate gap_upper_bound(const Operator& op, const FeasibleSet& set, const Vector& point);

/// Same certificate when F(point) is already known. Clamped at zero, which
/// keeps it an upper bound since m(point) >= 0 for point in Z.
double gap_from_value(const FeasibleSet& set, const Vector& point, const Vector& F_point,
                      Vector* witness = nullptr);

// ---------------------------------------------------------------------------
// Rate fitting
// ---------------------------------------------------------------------------

class FitError : public Error {
 public:
  using Error::Error;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  int used = 0;
  int dropped = 0;
  double max_residual = 0.0;
  std::vector<std::string> warnings;
};

/// Least-squares slope of log(gap) against log(K). Nonpositive gaps are
/// dropped with a warning; fewer than 4 surviving points is a FitError.
SlopeFit fit_rate_slope(std::span<const std::pair<double, double>> trace);

// ---------------------------------------------------------------------------
// Closed-form quantities from the convergence analysis
// ---------------------------------------------------------------------------

/// 1 - 1/(8 (1+nu)^2); reported only, never used by the iterations.
double c_nu(double nu);

/// ceil(2 H^(2/(2+nu)) D^2 eps^(-2/(2+nu))): nu-REN iterations sufficient for eps.
int nu_ren_iteration_budget(double H_nu, double nu, double D, double eps);

/// (3D)^((1-nu)/(1+nu)) (H_nu/(1+nu))^(2/(1+nu)) (1/eps)^((1-nu)/(1+nu)).
double universal_cap(double nu, double H_nu, double D, double eps);

/// Cap on 2^(i_k-1) H_k for the universal tensor method, from the contrapositive
/// of the failed trial at H_k 2^(i_k-1):
///   2 C H (3 D C H / eps)^((1-nu)/(p-1+nu)),  C = c_p_nu(p, nu).
/// At p = 2 this is 2x universal_cap; at nu = 1 it is 2 C H independent of eps.
double tensor_universal_cap(int p, double nu, double H, double D, double eps);

// ---------------------------------------------------------------------------
// Bound verdicts
// ---------------------------------------------------------------------------

enum class VerdictStatus { Pass, Flag, Fail, NotApplicable, Info };

std::string to_string(VerdictStatus s);

struct BoundVerdict {
  std::string name;
  VerdictStatus status = VerdictStatus::NotApplicable;
  double measured = 0.0;
  double theoretical = 0.0;
  std::string detail;
};

/// Declared smoothness constants of the problem a run was made on.
struct DeclaredConstants {
  std::optional<double> nu;
  std::optional<double> H;
  /// Constants of the (p-1)-th derivative, used by the tensor methods.
  std::optional<double> higher_nu;
  std::optional<double> higher_H;
  double diameter = std::numeric_limits<double>::infinity();
};

std::vector<BoundVerdict> bound_report(const RunResult& run, const DeclaredConstants& declared);
std::vector<BoundVerdict> theorem_bound_report(const RunResult& run,
                                               const ProblemInstance& instance);

bool all_passed(const std::vector<BoundVerdict>& verdicts);

}  // namespace hvi
