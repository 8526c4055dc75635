#include "helpers.hpp"
#include "holder_vi/metrics.hpp"
#include "holder_vi/problems.hpp"
#include "holder_vi/solvers.hpp"

#include <doctest.h>

using namespace hvi;
using testing::vec;

namespace {
SolverConfig quiet() {
  SolverConfig c;
  c.record_wall_time = false;
  c.inner_tol = 1e-12;
  return c;
}
}  // namespace

TEST_CASE("ergodic average") {
  std::vector<Vector> pts{vec({0}), vec({2})};
  CHECK(ergodic_average(pts, std::vector<double>{1, 1})(0) == 1.0);
  CHECK(ergodic_average(pts, std::vector<double>{1, 3})(0) == doctest::Approx(0.5));
  CHECK(ergodic_average(std::vector<Vector>{vec({7})}, std::vector<double>{4})(0) == 7.0);
}

TEST_CASE("weighted average matches the direct formula over wide weight ranges") {
  Rng rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vector> pts;
  std::vector<double> gammas;
  WeightedAverage avg;
  for (int i = 0; i < 50; ++i) {
    pts.push_back(vec({u(rng), u(rng)}));
    gammas.push_back(std::exp(-0.3 * i));
    avg.add(pts.back(), -std::log(gammas.back()));
  }
  CHECK(norm(avg.value() - ergodic_average(pts, gammas)) < 1e-13);
  WeightedAverage huge;
  huge.add(vec({1}), 700.0);
  huge.add(vec({3}), 700.0);
  CHECK(huge.value()(0) == doctest::Approx(2.0));
}

TEST_CASE("nu-REN scalar interval fixture") {
  const auto op = testing::identity(1);
  const auto I = FeasibleSet::box(vec({-1}), vec({1}));
  const auto r = run_nu_ren(op, I, vec({1}), 1.0, 1.0, 1, quiet());
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].half_step(0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(r.records[0].gamma_k == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.records[0].full_step(0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(norm(r.averaged_point - r.records[0].half_step) == 0.0);
}

TEST_CASE("nu-REN stops on an exact solution") {
  const auto p = make_power(3, 1.0, 1.0);
  const auto r = run_nu_ren(p.op, p.set, Vector::Zero(3), 1.0, p.declared_H, 10, quiet());
  REQUIRE(r.converged_at.has_value());
  CHECK(*r.converged_at == 0);
  CHECK(norm(r.records[0].half_step) == 0.0);
}

TEST_CASE("nu-REN iteration recipe") {
  CHECK(nu_ren_iteration_budget(1.0, 1.0, 1.0, 1e-3) == 200);
  const auto p = make_power(5, 1.0, 1.0);
  const int K = nu_ren_iteration_budget(p.declared_H, 1.0, p.diameter, 1e-3);
  const auto r = run_nu_ren(p.op, p.set, p.z0, 1.0, p.declared_H, K, quiet());
  CHECK(r.final_gap <= 1e-3);
}

TEST_CASE("nu-AREN on an affine field halves H every iteration") {
  const auto p = make_bilinear(4, 1.0, 1.0, 2);
  const auto r = run_nu_aren(p.op, p.set, p.z0, 1.0, 8.0, 30, quiet());
  for (const auto& rec : r.records) {
    CHECK(rec.i_k == 0);
    CHECK(rec.H_k == std::ldexp(8.0, -rec.k));
  }
}

TEST_CASE("nu-AREN respects its H bound on the power field") {
  for (double nu : {0.5, 1.0}) {
    const auto p = make_power(5, nu, 1.0);
    const auto r = run_nu_aren(p.op, p.set, p.z0, nu, p.declared_H / (1 + nu), 300, quiet());
    double worst = 0.0;
    for (const auto& rec : r.records) worst = std::max(worst, rec.H_k);
    CHECK(worst <= 2 * p.declared_H / (1 + nu) * (1 + 1e-9));
    CHECK(all_passed(theorem_bound_report(r, p)));
  }
}

TEST_CASE("UREN matches nu-AREN at nu = 1") {
  const auto p = make_power(5, 1.0, 1.0);
  const auto a = run_nu_aren(p.op, p.set, p.z0, 1.0, 0.7, 80, quiet());
  const auto u = run_uren(p.op, p.set, p.z0, 0.7, 80, 1e-300, quiet());
  REQUIRE(a.records.size() == u.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(norm(a.records[i].half_step - u.records[i].half_step) <= 1e-10);
  }
}

TEST_CASE("UREN early exit") {
  const auto p = make_power(3, 0.5, 1.0);
  SUBCASE("from a solution") {
    const auto r = run_uren(p.op, p.set, Vector::Zero(3), 1.0, 10, 1e-6, quiet());
    REQUIRE(r.early_exit.has_value());
    CHECK(r.early_exit->k == 0);
    CHECK(r.final_gap <= 1e-6);
  }
  SUBCASE("during the run") {
    const auto r = run_uren(p.op, p.set, p.z0, 1.0, 1000, 1e-4, quiet());
    REQUIRE(r.early_exit.has_value());
    CHECK(r.early_exit->gap <= 1e-4);
    CHECK(gap_upper_bound(p.op, p.set, r.early_exit->point).gap_upper <= 1e-4);
  }
}

TEST_CASE("extragradient") {
  SUBCASE("zero field stays put") {
    const auto zero = testing::affine(Matrix::Zero(3, 3));
    const auto B = FeasibleSet::ball(Vector::Zero(3), 1.0);
    const Vector z0 = vec({0.1, 0.2, 0.3});
    const auto r = run_extragradient(zero, B, z0, 0.1, 5, quiet());
    for (const auto& rec : r.records) {
      CHECK(norm(rec.half_step - z0) == 0.0);
      CHECK(norm(rec.full_step - z0) == 0.0);
    }
  }
  SUBCASE("solution start has zero gap") {
    const auto B = FeasibleSet::ball(Vector::Zero(2), 1.0);
    const auto r = run_extragradient(testing::rotation(), B, Vector::Zero(2), 0.1, 3, quiet());
    CHECK(r.final_gap == 0.0);
  }
  SUBCASE("default step") {
    const auto p = make_bilinear(2, 1.0, 1.0, 1);
    const double s = default_extragradient_step(p.op, p.set, 0);
    CHECK(s == doctest::Approx(0.5));
  }
}

TEST_CASE("run_method dispatches and validates") {
  const auto p = make_power(3, 1.0, 1.0);
  SolverConfig c = quiet();
  c.method = Method::NuRen;
  c.nu = 1.0;
  CHECK_THROWS_AS(run_method(p.op, p.set, p.z0, c), ConfigError);
  c.H_nu = p.declared_H;
  c.K = 5;
  CHECK(run_method(p.op, p.set, p.z0, c).records.size() == 5);
  c.K = 0;
  CHECK_THROWS_AS(run_method(p.op, p.set, p.z0, c), ConfigError);
}

TEST_CASE("counters are cumulative") {
  const auto p = make_power(3, 1.0, 1.0);
  const auto r = run_nu_aren(p.op, p.set, p.z0, 1.0, 0.1, 20, quiet());
  std::int64_t prev = 0;
  for (const auto& rec : r.records) {
    CHECK(rec.subproblems_cum == prev + rec.i_k + 1);
    prev = rec.subproblems_cum;
  }
  CHECK(r.oracle_calls() == prev);
}
