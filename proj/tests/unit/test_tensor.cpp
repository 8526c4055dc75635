#include "helpers.hpp"
#include "holder_vi/metrics.hpp"
#include "holder_vi/problems.hpp"
#include "holder_vi/solvers.hpp"
#include "holder_vi/tensor.hpp"

#include <doctest.h>

using namespace hvi;
using testing::vec;

namespace {

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Midpoint rule for the integral of (1-t)^(p-2) t^nu / (p-2)! over [0, 1].
double kernel_integral(int p, double nu) {
  const int n = 200000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) / n;
    s += std::pow(1 - t, p - 2) * std::pow(t, nu);
  }
  return s / n / std::tgamma(p - 1.0);
}

}  // namespace

TEST_CASE("c_p_nu closed form and quadrature") {
  for (double nu : {0.0, 0.25, 0.5, 1.0}) CHECK(c_p_nu(2, nu) == doctest::Approx(1 / (1 + nu)));
  CHECK(c_p_nu(3, 1.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(c_p_nu(3, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
  for (int p : {2, 3, 4}) {
    for (double nu : {0.0, 0.5, 1.0}) {
      CHECK(std::abs(c_p_nu(p, nu) - kernel_integral(p, nu)) < 1e-7);
    }
  }
  CHECK_THROWS_AS(c_p_nu(1, 0.5), ConfigError);
}

TEST_CASE("Taylor model of the cubic") {
  const auto op = testing::cube();
  const auto t = TaylorModel::at(op, vec({1}), 3);
  // 1 + 3d + 3d^2 at d = 0.5.
  CHECK(t.evaluate(vec({1.5}))(0) == doctest::Approx(1 + 1.5 + 0.75));
  const auto t4 = TaylorModel::at(op, vec({1}), 4);
  CHECK(t4.evaluate(vec({1.5}))(0) == doctest::Approx(std::pow(1.5, 3)));
  CHECK_THROWS_AS(TaylorModel::at(testing::norm_times_z(2), vec({1, 0}), 3), ConfigError);
}

TEST_CASE("tensor model Jacobian matches central differences") {
  const auto q = make_quartic_saddle(6, 1.0, 3);
  Rng rng(1);
  for (int s = 0; s < 10; ++s) {
    const TensorModel m(TaylorModel::at(q.op, q.set.sample(rng), 3), 2.0, 1.7);
    const Vector u = q.set.sample(rng);
    const Matrix J = tensor_model_jacobian(m, u);
    const double h = 1e-6;
    for (int j = 0; j < 6; ++j) {
      Vector e = Vector::Zero(6);
      e(j) = h;
      const Vector fd = (m.evaluate(u + e) - m.evaluate(u - e)) / (2 * h);
      CHECK(norm(fd - J.col(j)) < 1e-7);
    }
  }
}

TEST_CASE("tensor subproblem on the scalar cubic") {
  const auto op = testing::cube();
  const auto W = FeasibleSet::whole_space(1);
  SUBCASE("H = 2: simple root") {
    const TensorModel m(TaylorModel::at(op, vec({1}), 3), 2.0, 2.0);
    const auto sol = solve_tensor_subproblem(m, W, 1e-14);
    const double root =
        bisect([](double d) { return 1 + 3 * d + 3 * d * d + 2 * d * d * d; }, -2.0, 0.0);
    CHECK(std::abs(sol.point(0) - 1.0 - root) <= 1e-8);
  }
  SUBCASE("H = 1: triple root (1+d)^3, resolvable only to the cube root of rounding") {
    const TensorModel m(TaylorModel::at(op, vec({1}), 3), 2.0, 1.0);
    const auto sol = solve_tensor_subproblem(m, W, 1e-14);
    const double root = bisect([](double d) { return 1 + 3 * d + 3 * d * d + d * d * d; }, -2, 0);
    CHECK(std::abs(sol.point(0) - 1.0 - root) <= 1e-4);
    CHECK(std::abs(sol.point(0)) <= 1e-4);
  }
}

TEST_CASE("tensor subproblem reductions and guards") {
  const auto p = make_power(4, 1.0, 1.0);
  const auto t = TaylorModel::at(p.op, p.z0, 2);
  const TensorModel m(t, 1.0, 3.0);
  const auto a = solve_tensor_subproblem(m, p.set, 1e-12);
  const auto b = solve_model_vi(RegularizedModel(t.base, 1.0, 3.0), p.set, 1e-12);
  CHECK(norm(a.point - b.point) <= 1e-14);

  const auto q = make_quartic_saddle(4, 1.0, 1);
  Vector zero_anchor = Vector::Zero(4);
  const TensorModel mz(TaylorModel::at(q.op, zero_anchor, 3), 2.0, 1.0);
  CHECK(norm(solve_tensor_subproblem(mz, q.set, 1e-12).point) == 0.0);

  const TensorModel m4(TaylorModel::at(q.op, q.z0, 4), 3.0, 1.0);
  CHECK_THROWS_AS(solve_tensor_subproblem(m4, q.set, 1e-12), UnsupportedOrder);
  CHECK_NOTHROW(solve_tensor_subproblem(m4, q.set, 1e-10, true));
}

TEST_CASE("tensor subproblem with an active ball agrees with extragradient") {
  const auto q = make_quartic_saddle(6, 1.0, 2);
  Rng rng(8);
  for (int s = 0; s < 10; ++s) {
    const Vector z = q.set.sample(rng);
    const auto ball = FeasibleSet::ball(Vector::Zero(6), 1.0);
    const TensorModel m(TaylorModel::at(q.op, z, 3), 2.0, 0.05);
    InnerOptions pe;
    pe.path = InnerPath::ProjectedExtragradient;
    const auto a = solve_tensor_subproblem(m, ball, 1e-12);
    const auto b = solve_tensor_subproblem(m, ball, 1e-12, false, pe);
    CHECK(norm(a.point - b.point) <= 1e-6);
  }
}

TEST_CASE("nu-ARET and URET") {
  SolverConfig c;
  c.record_wall_time = false;
  c.inner_tol = 1e-12;
  SUBCASE("p = 2 reduces to nu-AREN and UREN") {
    const auto p = make_power(5, 0.5, 1.0);
    const auto a = run_nu_aret(p.op, p.set, p.z0, 2, 0.5, 0.3, 50, c);
    const auto b = run_nu_aren(p.op, p.set, p.z0, 0.5, 0.3, 50, c);
    const auto u = run_uret(p.op, p.set, p.z0, 2, 0.3, 50, 1e-300, c);
    const auto v = run_uren(p.op, p.set, p.z0, 0.3, 50, 1e-300, c);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      CHECK(norm(a.records[i].half_step - b.records[i].half_step) <= 1e-10);
      CHECK(norm(u.records[i].half_step - v.records[i].half_step) <= 1e-10);
    }
  }
  SUBCASE("affine field at p = 3 never doubles") {
    const auto p = make_bilinear(6, 1.0, 1.0, 3);
    const auto r = run_nu_aret(p.op, p.set, p.z0, 3, 1.0, 1.0, 20, c);
    for (const auto& rec : r.records) CHECK(rec.i_k == 0);
  }
  SUBCASE("H_k bound at p = 3") {
    const auto q = make_quartic_saddle(10, 1.0, 1);
    const double C = c_p_nu(3, 1.0) * *q.declared_higher_H;
    const auto r = run_nu_aret(q.op, q.set, q.z0, 3, 1.0, C, 60, c);
    for (const auto& rec : r.records) CHECK(rec.H_k <= 2 * C * (1 + 1e-9));
    CHECK(all_passed(theorem_bound_report(r, q)));
  }
  SUBCASE("URET early exit from a solution") {
    const auto q = make_quartic_saddle(4, 1.0, 1);
    const auto r = run_uret(q.op, q.set, Vector::Zero(4), 3, 1.0, 10, 1e-6, c);
    REQUIRE(r.early_exit.has_value());
    CHECK(r.early_exit->k == 0);
  }
}
