#include "helpers.hpp"
#include "holder_vi/metrics.hpp"
#include "holder_vi/problems.hpp"
#include "holder_vi/solvers.hpp"

#include <doctest.h>

using namespace hvi;
using testing::vec;

namespace {
std::vector<std::pair<double, double>> power_law(double c, double s) {
  std::vector<std::pair<double, double>> t;
  for (int e = 4; e <= 10; ++e) t.emplace_back(1 << e, c * std::pow(1 << e, s));
  return t;
}

const BoundVerdict& find(const std::vector<BoundVerdict>& vs, const std::string& name) {
  for (const auto& v : vs)
    if (v.name == name) return v;
  throw std::runtime_error("missing verdict " + name);
}
}  // namespace

TEST_CASE("gap certificate") {
  const auto B = FeasibleSet::ball(Vector::Zero(2), 1.0);
  CHECK(gap_from_value(B, vec({0.3, 0}), Vector::Zero(2)) == 0.0);
  CHECK(gap_from_value(B, vec({1, 0}), vec({2, 0})) == doctest::Approx(4.0));
  const auto X = FeasibleSet::box(vec({-1, -1}), vec({1, 1}));
  CHECK(gap_from_value(X, Vector::Zero(2), vec({1, -2})) == doctest::Approx(3.0));
  CHECK_THROWS_AS(gap_from_value(FeasibleSet::whole_space(2), vec({1, 0}), vec({1, 0})),
                  UnboundedGap);
  const auto cert = gap_upper_bound(testing::rotation(), B, vec({0.5, 0.5}));
  CHECK(cert.gap_upper == doctest::Approx(cert.witness.norm() * norm(vec({0.5, -0.5}))));
}

TEST_CASE("gap certificate dominates a brute-force gap") {
  const auto p = make_power(2, 0.5, 1.0);
  Rng rng(4);
  for (int s = 0; s < 20; ++s) {
    const Vector z = p.set.sample(rng);
    double brute = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const Vector w = p.set.sample(rng);
      brute = std::max(brute, p.op.eval(w).dot(z - w));
    }
    CHECK(brute <= gap_upper_bound(p.op, p.set, z).gap_upper + 1e-12);
  }
}

TEST_CASE("rate slope fit") {
  CHECK(fit_rate_slope(power_law(1.0, -1.5)).slope == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(fit_rate_slope(power_law(7.0, -1.0)).slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(fit_rate_slope(power_law(1.0, -1.25)).slope == doctest::Approx(-1.25).epsilon(1e-12));

  auto t = power_law(1.0, -2.0);
  t[2].second = 0.0;
  const auto f = fit_rate_slope(t);
  CHECK(f.dropped == 1);
  CHECK(f.used == 6);
  CHECK_FALSE(f.warnings.empty());
  CHECK(f.slope == doctest::Approx(-2.0));

  auto few = power_law(1.0, -1.0);
  few.resize(3);
  CHECK_THROWS_AS(fit_rate_slope(few), FitError);
  auto unsorted = power_law(1.0, -1.0);
  std::swap(unsorted[0], unsorted[1]);
  CHECK_THROWS_AS(fit_rate_slope(unsorted), FitError);
}

TEST_CASE("closed-form constants") {
  CHECK(c_nu(1.0) == 0.96875);
  CHECK(c_nu(0.0) == 0.875);
  CHECK(nu_ren_iteration_budget(1.0, 1.0, 1.0, 1e-3) == 200);
  // At nu = 1 the cap is H/2 for every eps.
  CHECK(universal_cap(1.0, 3.0, 2.0, 1e-3) == doctest::Approx(1.5));
  CHECK(universal_cap(1.0, 3.0, 2.0, 1e-9) == doctest::Approx(1.5));
  CHECK(universal_cap(0.0, 1.0, 1.0, 1e-2) == doctest::Approx(300.0));
  CHECK(tensor_universal_cap(2, 0.5, 1.3, 1.0, 1e-3) ==
        doctest::Approx(2 * universal_cap(0.5, 1.3, 1.0, 1e-3)));
  CHECK(tensor_universal_cap(3, 1.0, 6.0, 2.0, 1e-3) ==
        doctest::Approx(tensor_universal_cap(3, 1.0, 6.0, 2.0, 1e-8)));
}

TEST_CASE("bound verdicts") {
  SolverConfig c;
  c.record_wall_time = false;
  c.inner_tol = 1e-12;
  SUBCASE("conforming nu-AREN run passes") {
    const auto p = make_power(5, 1.0, 1.0);
    const auto r = run_nu_aren(p.op, p.set, p.z0, 1.0, p.declared_H / 2, 100, c);
    const auto vs = theorem_bound_report(r, p);
    CHECK(find(vs, "C_nu").measured == 0.96875);
    CHECK(find(vs, "H_k bound").status == VerdictStatus::Pass);
    CHECK(find(vs, "oracle budget").status == VerdictStatus::Pass);
  }
  SUBCASE("zero Hölder constant is not applicable") {
    const auto p = make_bilinear(4, 1.0, 1.0, 1);
    const auto a = run_nu_aren(p.op, p.set, p.z0, 1.0, 1.0, 10, c);
    CHECK(find(theorem_bound_report(a, p), "H_k bound").status == VerdictStatus::NotApplicable);
    const auto u = run_uren(p.op, p.set, p.z0, 1.0, 10, 1e-300, c);
    CHECK(find(theorem_bound_report(u, p), "H(eps) cap").status == VerdictStatus::NotApplicable);
  }
  SUBCASE("understated constant fails") {
    const auto p = make_power(5, 1.0, 1.0);
    const auto r = run_nu_aren(p.op, p.set, p.z0, 1.0, 0.01, 100, c);
    DeclaredConstants dc;
    dc.nu = 1.0;
    dc.H = p.declared_H / 8;
    dc.diameter = p.diameter;
    CHECK(find(bound_report(r, dc), "H_k bound").status == VerdictStatus::Fail);
    CHECK_FALSE(all_passed(bound_report(r, dc)));
  }
  SUBCASE("cap flag band") {
    const auto p = make_power(5, 1.0, 1.0);
    const auto r = run_uren(p.op, p.set, p.z0, 0.5, 100, 1e-300, c);
    DeclaredConstants dc;
    dc.nu = 1.0;
    dc.diameter = p.diameter;
    dc.H = p.declared_H;
    CHECK(find(bound_report(r, dc), "H(eps) cap").status == VerdictStatus::Pass);
    // Measured cap is H/2 = 1; a declared H of 0.6 puts the cap at 0.3, inside 4x.
    dc.H = 0.6;
    CHECK(find(bound_report(r, dc), "H(eps) cap").status == VerdictStatus::Flag);
    // From a small H0 the search overshoots to about 1.6; a cap of 0.05 is exceeded 4x over.
    const auto low = run_uren(p.op, p.set, p.z0, 0.05, 100, 1e-300, c);
    dc.H = 0.1;
    CHECK(find(bound_report(low, dc), "H(eps) cap").status == VerdictStatus::Fail);
  }
}
