#pragma once

#include "holder_vi/problems.hpp"

namespace hvi {

struct CheckResult {
  std::string group;  ///< monotone, holder, remainder, jacobian, solution, subproblem, equivalence, bounds
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerifyOptions {
  /// Run only this group (empty: all).
  std::string only;
  /// Negative-control hook: scales every instance's declared H.
  double declared_H_scale = 1.0;
  std::uint64_t seed = 7;
  int remainder_pairs = 10000;
};

/// Default instances exercised by the suite.
std::vector<ProblemInstance> verification_instances();

/// Maximum over sampled pairs of ||F(z') - F(z) - ∇F(z)(z'-z)|| minus the
/// declared bound; positive means a violation. `worst_ratio` receives the
/// largest lhs / bound.
double remainder_sweep(const ProblemInstance& p, int pairs, std::uint64_t seed,
                       double* worst_ratio = nullptr);

/// Same for the order-3 Taylor model against c_p_nu(3, nu) H_{3,nu} ||d||^{2+nu}.
double tensor_remainder_sweep(const ProblemInstance& p, int pairs, std::uint64_t seed);

/// Largest relative deviation of the Jacobian oracle from central differences.
double jacobian_fd_error(const ProblemInstance& p, int points, std::uint64_t seed);

std::vector<CheckResult> run_verify_suite(const VerifyOptions& options);

std::vector<std::string> verify_groups();

}  // namespace hvi
