#include "holder_vi/verify.hpp"

#include "holder_vi/metrics.hpp"
#include "holder_vi/solvers.hpp"
#include "holder_vi/subproblem.hpp"
#include "holder_vi/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hvi {

namespace {

std::string sci(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

/// Pairs that include the usual extremal configurations: uniform, one end at
/// the set's middle, and short hops.
std::pair<Vector, Vector> sample_pair(const FeasibleSet& set, Rng& rng, int s) {
  Vector z = set.sample(rng);
  Vector z2;
  switch (s % 3) {
    case 0:
      z2 = set.sample(rng);
      break;
    case 1:
      z2 = set.middle();
      break;
    default: {
      std::normal_distribution<double> g(0.0, 1.0);
      Vector h(z.size());
      for (int i = 0; i < h.size(); ++i) h(i) = g(rng);
      z2 = set.project(z + 1e-2 * h / norm(h));
      break;
    }
  }
  return {z, z2};
}

}  // namespace

std::vector<ProblemInstance> verification_instances() {
  std::vector<ProblemInstance> v;
  v.push_back(make_power(5, 0.5, 1.0));
  v.push_back(make_power(5, 1.0, 1.0));
  v.push_back(make_bilinear(10, 1.0, 1.0, 1));
  v.push_back(make_quartic_saddle(10, 1.0, 1, 1));
  v.push_back(make_piecewise(5, 1.0, 1.0));
  return v;
}

double remainder_sweep(const ProblemInstance& p, int pairs, std::uint64_t seed,
                       double* worst_ratio) {
  Rng rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  double ratio = 0.0;
  for (int s = 0; s < pairs; ++s) {
    auto [z, z2] = sample_pair(p.set, rng, s);
    const LinearModel lin = LinearModel::at(p.op, z);
    const double lhs = norm(p.op.eval(z2) - lin.evaluate(z2));
    const double bound = remainder_bound(p.declared_nu, p.declared_H, norm(z2 - z));
    worst = std::max(worst, lhs - bound);
    if (bound > 0.0) ratio = std::max(ratio, lhs / bound);
  }
  if (worst_ratio) *worst_ratio = ratio;
  return worst;
}

double tensor_remainder_sweep(const ProblemInstance& p, int pairs, std::uint64_t seed) {
  if (!p.declared_higher_H || !p.declared_higher_nu) {
    throw ConfigError("instance '" + p.name + "' declares no second-derivative constants");
  }
  const double nu = *p.declared_higher_nu;
  const double C = c_p_nu(3, nu) * *p.declared_higher_H;
  Rng rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < pairs; ++s) {
    auto [z, z2] = sample_pair(p.set, rng, s);
    const TaylorModel t = TaylorModel::at(p.op, z, 3);
    const double lhs = norm(p.op.eval(z2) - t.evaluate(z2));
    worst = std::max(worst, lhs - C * std::pow(norm(z2 - z), 2.0 + nu));
  }
  return worst;
}

double jacobian_fd_error(const ProblemInstance& p, int points, std::uint64_t seed) {
  Rng rng(seed);
  const double h = 1e-5;
  const bool piecewise = p.name.rfind("piecewise", 0) == 0;
  const double band = 0.5 * p.set.radius();
  double worst = 0.0;
  for (int s = 0; s < points;) {
    const Vector z = p.set.sample(rng);
    if (piecewise && ((z.array().abs() - band).abs() < 10 * h).any()) continue;
    ++s;
    const Matrix J = p.op.jacobian(z);
    Matrix Jfd(J.rows(), J.cols());
    for (int j = 0; j < J.cols(); ++j) {
      Vector e = Vector::Zero(z.size());
      e(j) = h;
      Jfd.col(j) = (p.op.eval(z + e) - p.op.eval(z - e)) / (2 * h);
    }
    worst = std::max(worst, (Jfd - J).norm() / std::max(1.0, J.norm()));
  }
  return worst;
}

std::vector<std::string> verify_groups() {
  return {"monotone",   "holder",      "remainder", "jacobian",
          "solution",   "subproblem",  "equivalence", "bounds"};
}

std::vector<CheckResult> run_verify_suite(const VerifyOptions& opt) {
  const auto groups = verify_groups();
  if (!opt.only.empty() && std::find(groups.begin(), groups.end(), opt.only) == groups.end()) {
    throw ConfigError("unknown verify group '" + opt.only + "'");
  }
  auto want = [&](const std::string& g) { return opt.only.empty() || opt.only == g; };
  std::vector<CheckResult> out;
  auto add = [&](std::string group, std::string name, bool ok, double measured, double threshold,
                 std::string detail = {}) {
    out.push_back({std::move(group), std::move(name), ok, measured, threshold, std::move(detail)});
  };

  std::vector<ProblemInstance> instances;
  for (auto& p : verification_instances()) {
    instances.push_back(opt.declared_H_scale == 1.0 ? p
                                                    : with_scaled_declared_H(p, opt.declared_H_scale));
  }

  for (const auto& p : instances) {
    if (want("monotone")) {
      const auto rep = check_monotone(p.op, p.set, 2000, opt.seed);
      add("monotone", p.name, rep.monotone, rep.worst, -1e-10);
    }
    if (want("holder")) {
      const double est =
          estimate_holder_constant(p.op, p.set, p.declared_nu, 10000, opt.seed + 1);
      add("holder", p.name, est <= p.declared_H * (1 + 1e-6), est, p.declared_H);
    }
    if (want("remainder")) {
      double ratio = 0.0;
      const double w = remainder_sweep(p, opt.remainder_pairs, opt.seed + 2, &ratio);
      add("remainder", p.name, w <= 1e-12, w, 1e-12, "max lhs/bound " + sci(ratio));
      if (p.declared_higher_H) {
        const double w3 = tensor_remainder_sweep(p, opt.remainder_pairs / 10, opt.seed + 3);
        add("remainder", p.name + " (p=3)", w3 <= 1e-10, w3, 1e-10);
      }
    }
    if (want("jacobian")) {
      const double e = jacobian_fd_error(p, 100, opt.seed + 4);
      add("jacobian", p.name, e <= 1e-6, e, 1e-6);
    }
    if (want("solution") && p.solution) {
      const double g = gap_upper_bound(p.op, p.set, *p.solution).gap_upper;
      add("solution", p.name, g <= 1e-8, g, 1e-8);
    }
  }

  if (want("subproblem")) {
    Rng rng(opt.seed + 5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int d = 10;
    double worst = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
      Matrix B(d, d), S(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          B(i, j) = gauss(rng);
          S(i, j) = gauss(rng);
        }
      LinearModel lin;
      lin.anchor = Vector::NullaryExpr(d, [&](Eigen::Index) { return gauss(rng); });
      lin.value_at_anchor = Vector::NullaryExpr(d, [&](Eigen::Index) { return gauss(rng); });
      lin.jacobian_at_anchor = B * B.transpose() / d + (S - S.transpose()) / 2.0;
      const RegularizedModel m(lin, unif(rng), 0.5 + 1.5 * unif(rng));
      const auto ws = FeasibleSet::whole_space(d);
      InnerOptions sec, pe;
      sec.path = InnerPath::Secular;
      pe.path = InnerPath::ProjectedExtragradient;
      const auto a = solve_model_vi(m, ws, 1e-12, sec);
      const auto b = solve_model_vi(m, ws, 1e-12, pe);
      worst = std::max(worst, norm(a.point - b.point));
    }
    add("subproblem", "secular vs extragradient (100 instances, d=10)", worst <= 1e-6, worst,
        1e-6);

    {
      LinearModel lin;
      lin.anchor = Vector::Zero(3);
      lin.anchor(0) = 1.0;
      lin.value_at_anchor = lin.anchor;
      lin.jacobian_at_anchor = Matrix::Identity(3, 3);
      const auto sol = solve_model_vi(RegularizedModel(lin, 1.0, 1.0),
                                      FeasibleSet::whole_space(3), 1e-12);
      const double step = norm(sol.point - lin.anchor);
      const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
      add("subproblem", "golden-ratio step", std::abs(step - golden) <= 1e-9,
          std::abs(step - golden), 1e-9);
    }
    {
      LinearModel lin;
      lin.anchor = Vector::Zero(2);
      lin.value_at_anchor = Vector::Unit(2, 0);
      lin.jacobian_at_anchor = Matrix::Zero(2, 2);
      const auto sol = solve_model_vi(RegularizedModel(lin, 1.0, 1.0),
                                      FeasibleSet::ball(Vector::Zero(2), 0.5), 1e-12);
      Vector expect(2);
      expect << -0.5, 0.0;
      const double e = norm(sol.point - expect);
      add("subproblem", "ball boundary (-0.5, 0)", e <= 1e-9, e, 1e-9);
    }
  }

  if (want("equivalence")) {
    const ProblemInstance& q = instances[3];
    SolverConfig cfg;
    cfg.record_wall_time = false;
    auto compare = [&](const RunResult& a, const RunResult& b) {
      if (a.records.size() != b.records.size()) return std::numeric_limits<double>::infinity();
      double w = 0.0;
      for (std::size_t i = 0; i < a.records.size(); ++i) {
        w = std::max(w, norm(a.records[i].half_step - b.records[i].half_step));
        w = std::max(w, norm(a.records[i].full_step - b.records[i].full_step));
      }
      return w;
    };
    const double H0 = 0.5 * q.declared_H;
    const double e1 = compare(run_nu_aret(q.op, q.set, q.z0, 2, 1.0, H0, 60, cfg),
                              run_nu_aren(q.op, q.set, q.z0, 1.0, H0, 60, cfg));
    add("equivalence", "nu-aret(p=2) vs nu-aren on " + q.name, e1 <= 1e-10, e1, 1e-10);
    const double e2 = compare(run_uret(q.op, q.set, q.z0, 2, 1.0, 60, 1e-12, cfg),
                              run_uren(q.op, q.set, q.z0, 1.0, 60, 1e-12, cfg));
    add("equivalence", "uret(p=2) vs uren on " + q.name, e2 <= 1e-10, e2, 1e-10);
  }

  if (want("bounds")) {
    SolverConfig cfg;
    cfg.record_wall_time = false;
    cfg.inner_tol = 1e-10;
    auto summarize = [](const std::vector<BoundVerdict>& vs) {
      std::string s;
      for (const auto& v : vs) {
        if (v.status == VerdictStatus::Info) continue;
        s += (s.empty() ? "" : "; ") + v.name + " " + to_string(v.status) + " " +
             sci(v.measured) + " <= " + sci(v.theoretical);
      }
      return s;
    };
    for (int idx : {0, 1, 3}) {
      const ProblemInstance& p = instances[idx];
      const double H0 = p.declared_H / (1.0 + p.declared_nu);
      const RunResult r = run_nu_aren(p.op, p.set, p.z0, p.declared_nu, H0, 200, cfg);
      const auto v = theorem_bound_report(r, p);
      add("bounds", "nu-aren " + p.name, all_passed(v), 0, 0, summarize(v));
    }
    for (int idx : {0, 1}) {
      const ProblemInstance& p = instances[idx];
      const RunResult r = run_uren(p.op, p.set, p.z0, 0.5, 200, 1e-300, cfg);
      const auto v = theorem_bound_report(r, p);
      add("bounds", "uren " + p.name, all_passed(v), 0, 0, summarize(v));
    }
    {
      const ProblemInstance& q = instances[3];
      const double H0 = c_p_nu(3, 1.0) * *q.declared_higher_H;
      const RunResult r = run_nu_aret(q.op, q.set, q.z0, 3, 1.0, H0, 40, cfg);
      const auto v = theorem_bound_report(r, q);
      add("bounds", "nu-aret(p=3) " + q.name, all_passed(v), 0, 0, summarize(v));
    }
  }
  return out;
}

}  // namespace hvi
