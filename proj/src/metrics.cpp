#include "holder_vi/metrics.hpp"

#include "holder_vi/problems.hpp"
#include "holder_vi/solvers.hpp"
#include "holder_vi/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hvi {

double gap_from_value(const FeasibleSet& set, const Vector& point, const Vector& F_point,
                      Vector* witness) {
  if (norm(F_point) == 0.0) {
    if (witness) *witness = point;
    return 0.0;
  }
  if (!set.bounded()) {
    throw UnboundedGap("gap certificate is unbounded on the whole space (||F|| = " +
                       std::to_string(norm(F_point)) + ")");
  }
  Vector w = set.support_argmax(-F_point);
  const double g = F_point.dot(point - w);
  if (witness) *witness = std::move(w);
  return std::max(0.0, g);
}

GapCertificate gap_upper_bound(const Operator& op, const FeasibleSet& set, const Vector& point) {
  GapCertificate c;
  c.point = point;
  c.gap_upper = gap_from_value(set, point, op.eval(point), &c.witness);
  return c;
}

SlopeFit fit_rate_slope(std::span<const std::pair<double, double>> trace) {
  SlopeFit fit;
  std::vector<std::pair<double, double>> pts;
  double prev_K = -std::numeric_limits<double>::infinity();
  for (const auto& [K, gap] : trace) {
    if (!(K > prev_K)) throw FitError("K values must be strictly increasing");
    prev_K = K;
    if (!(K > 0.0)) throw FitError("K values must be positive");
    if (!(gap > 0.0) || !std::isfinite(gap)) {
      ++fit.dropped;
      std::ostringstream os;
      os << "dropped K = " << K << " with gap " << gap;
      fit.warnings.push_back(os.str());
      continue;
    }
    pts.emplace_back(std::log(K), std::log(gap));
  }
  fit.used = static_cast<int>(pts.size());
  if (fit.used < 4) {
    throw FitError("rate fit needs at least 4 positive gaps (have " + std::to_string(fit.used) +
                   ")");
  }
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= fit.used;
  my /= fit.used;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (const auto& [x, y] : pts) {
    fit.max_residual = std::max(fit.max_residual, std::abs(y - fit.intercept - fit.slope * x));
  }
  return fit;
}

double c_nu(double nu) { return 1.0 - 1.0 / (8.0 * (1.0 + nu) * (1.0 + nu)); }

int nu_ren_iteration_budget(double H_nu, double nu, double D, double eps) {
  if (!(H_nu > 0.0 && D > 0.0 && eps > 0.0)) {
    throw ConfigError("iteration budget needs H, D, eps > 0");
  }
  const double e = 2.0 / (2.0 + nu);
  const double K = 2.0 * std::pow(H_nu, e) * D * D * std::pow(eps, -e);
  // Guard against 200.00000000003 becoming 201.
  return static_cast<int>(std::ceil(K * (1.0 - 1e-12)));
}

double universal_cap(double nu, double H_nu, double D, double eps) {
  const double a = (1.0 - nu) / (1.0 + nu);
  return std::pow(3.0 * D, a) * std::pow(H_nu / (1.0 + nu), 2.0 / (1.0 + nu)) *
         std::pow(1.0 / eps, a);
}

double tensor_universal_cap(int p, double nu, double H, double D, double eps) {
  const double C = c_p_nu(p, nu);
  return 2.0 * C * H * std::pow(3.0 * D * C * H / eps, (1.0 - nu) / (p - 1.0 + nu));
}

std::string to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Pass:
      return "PASS";
    case VerdictStatus::Flag:
      return "FLAG";
    case VerdictStatus::Fail:
      return "FAIL";
    case VerdictStatus::NotApplicable:
      return "NOT-APPLICABLE";
    case VerdictStatus::Info:
      return "INFO";
  }
  return "?";
}

namespace {

BoundVerdict not_applicable(std::string name, std::string why) {
  BoundVerdict v;
  v.name = std::move(name);
  v.status = VerdictStatus::NotApplicable;
  v.detail = std::move(why);
  return v;
}

double max_H_entering(const RunResult& run) {
  double m = run.H0;
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    const auto& r = run.records[i];
    m = std::max(m, r.H_k);
    const bool completed = !(run.early_exit && i + 1 == run.records.size()) &&
                           !(run.converged_at && i + 1 == run.records.size());
    if (completed) m = std::max(m, next_H(r.H_k, r.i_k));
  }
  return m;
}

/// Iterations whose search ended in acceptance.
int accepted_iterations(const RunResult& run) {
  int n = static_cast<int>(run.records.size());
  if (run.early_exit) --n;
  return n;
}

void append_adaptive_bounds(std::vector<BoundVerdict>& out, const RunResult& run, double bound,
                            const std::string& bound_name) {
  BoundVerdict hv;
  hv.name = "H_k bound";
  hv.measured = max_H_entering(run);
  hv.theoretical = std::max(bound, run.H0);
  hv.status = hv.measured <= hv.theoretical * (1.0 + 1e-9) ? VerdictStatus::Pass
                                                            : VerdictStatus::Fail;
  hv.detail = "max H_k vs " + bound_name;
  if (run.H0 > 0.5 * bound) hv.detail += "; H0 above the stated input range, bound is max(H0, .)";
  out.push_back(hv);

  BoundVerdict ov;
  ov.name = "oracle budget";
  std::int64_t calls = 0;
  int counted = 0;
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    if (static_cast<int>(i) >= accepted_iterations(run)) break;
    calls += run.records[i].i_k + 1;
    ++counted;
  }
  ov.measured = static_cast<double>(calls);
  ov.theoretical = 2.0 * counted + std::log2(std::max(bound, run.H0)) - std::log2(run.H0) + 1.0;
  ov.status = ov.measured <= ov.theoretical + 1e-9 ? VerdictStatus::Pass : VerdictStatus::Fail;
  ov.detail = "sum(i_k+1) vs 2K + log2(" + bound_name + ") - log2(H0) + 1";
  out.push_back(ov);
}

void append_cap(std::vector<BoundVerdict>& out, const RunResult& run, double cap,
                const std::string& detail) {
  BoundVerdict v;
  v.name = "H(eps) cap";
  for (int i = 0; i < accepted_iterations(run); ++i) {
    v.measured = std::max(v.measured, 0.5 * run.records[i].H_used);
  }
  v.theoretical = std::max(cap, 0.5 * run.H0);
  if (v.measured <= v.theoretical * (1.0 + 1e-6)) {
    v.status = VerdictStatus::Pass;
  } else if (v.measured <= 4.0 * v.theoretical) {
    v.status = VerdictStatus::Flag;
  } else {
    v.status = VerdictStatus::Fail;
  }
  v.detail = detail;
  if (run.early_exit) v.detail += "; early exit, accepted iterations only";
  out.push_back(v);
}

}  // namespace

std::vector<BoundVerdict> bound_report(const RunResult& run, const DeclaredConstants& dc) {
  std::vector<BoundVerdict> out;
  if (dc.nu) {
    BoundVerdict c;
    c.name = "C_nu";
    c.status = VerdictStatus::Info;
    c.measured = c.theoretical = c_nu(*dc.nu);
    c.detail = "1 - 1/(8(1+nu)^2)";
    out.push_back(c);
  }
  if (run.method == Method::NuRen || run.method == Method::Extragradient) return out;

  const ExponentMode& m = run.mode;
  const bool tensor = m.order() > 2;
  const std::optional<double> nu = tensor ? dc.higher_nu : dc.nu;
  const std::optional<double> H = tensor ? dc.higher_H : dc.H;
  const bool have = nu.has_value() && H.has_value() && *H > 0.0;

  switch (m.kind) {
    case ModeKind::Holder:
    case ModeKind::Tensor: {
      if (!have) {
        out.push_back(not_applicable("H_k bound", "no positive declared Hölder constant"));
        out.push_back(not_applicable("oracle budget", "no positive declared Hölder constant"));
        break;
      }
      if (*nu != m.nu) {
        out.push_back(not_applicable("H_k bound", "run nu differs from declared nu"));
        out.push_back(not_applicable("oracle budget", "run nu differs from declared nu"));
        break;
      }
      const double bound = 2.0 * c_p_nu(m.order(), m.nu) * *H;
      append_adaptive_bounds(out, run, bound, tensor ? "2 C_{p,nu} H_{p,nu}" : "2 H_nu/(1+nu)");
      break;
    }
    case ModeKind::Universal:
    case ModeKind::TensorUniversal: {
      if (!have) {
        out.push_back(not_applicable("H(eps) cap", "no positive declared Hölder constant"));
        break;
      }
      if (!std::isfinite(dc.diameter)) {
        out.push_back(not_applicable("H(eps) cap", "unbounded set"));
        break;
      }
      if (m.kind == ModeKind::Universal) {
        append_cap(out, run, universal_cap(*nu, *H, dc.diameter, run.eps),
                   "max 2^(i_k-1) H_k vs (3D)^a (H/(1+nu))^(2/(1+nu)) (1/eps)^a");
      } else {
        append_cap(out, run, tensor_universal_cap(m.order(), *nu, *H, dc.diameter, run.eps),
                   "max 2^(i_k-1) H_k vs 2 C H (3 D C H/eps)^((1-nu)/(p-1+nu))");
      }
      break;
    }
  }
  return out;
}

std::vector<BoundVerdict> theorem_bound_report(const RunResult& run,
                                               const ProblemInstance& instance) {
  DeclaredConstants dc;
  dc.nu = instance.declared_nu;
  dc.H = instance.declared_H;
  dc.higher_nu = instance.declared_higher_nu;
  dc.higher_H = instance.declared_higher_H;
  dc.diameter = instance.diameter;
  return bound_report(run, dc);
}

bool all_passed(const std::vector<BoundVerdict>& verdicts) {
  return std::none_of(verdicts.begin(), verdicts.end(),
                      [](const BoundVerdict& v) { return v.status == VerdictStatus::Fail; });
}

}  // namespace hvi
