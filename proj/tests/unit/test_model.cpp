#include "helpers.hpp"
#include "holder_vi/model.hpp"
#include "holder_vi/subproblem.hpp"

#include <doctest.h>

using namespace hvi;
using testing::vec;

TEST_CASE("linear model") {
  const auto id = testing::identity(2);
  const auto lin = LinearModel::at(id, Vector::Zero(2));
  CHECK(norm(lin.evaluate(vec({1, 0})) - vec({1, 0})) == 0.0);
  CHECK(norm(lin.evaluate(lin.anchor) - id.eval(lin.anchor)) == 0.0);

  // grad(||z|| z) at (1,0) is diag(2,1).
  const auto nz = testing::norm_times_z(2);
  const auto m = LinearModel::at(nz, vec({1, 0}));
  CHECK(norm(m.jacobian_at_anchor - Matrix(vec({2, 1}).asDiagonal())) < 1e-15);
  CHECK(norm(m.evaluate(vec({0, 0})) - vec({-1, 0})) < 1e-15);
}

TEST_CASE("regularized model") {
  const auto lin = LinearModel::at(testing::identity(2), Vector::Zero(2));
  const RegularizedModel m(lin, 1.0, 1.0);
  CHECK(norm(m.evaluate(vec({1, 0})) - vec({2, 0})) == 0.0);
  CHECK(norm(m.evaluate(m.anchor())) == 0.0);

  // Scalar interval fixture: F(z) = z, anchor 1, u = 0.5, coefficient 2H with H = 1.
  const auto s = LinearModel::at(testing::identity(1), vec({1}));
  CHECK(RegularizedModel(s, 1.0, 2.0).evaluate(vec({0.5}))(0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(RegularizedModel(lin, 1.0, -1.0), ConfigError);
}

TEST_CASE("radial regularizer uses 0^0 = 1") {
  CHECK(norm(radial_regularizer(vec({2, 0}), 3.0, 0.0) - vec({6, 0})) == 0.0);
  CHECK(norm(radial_regularizer(Vector::Zero(2), 3.0, 0.0)) == 0.0);
  CHECK(norm(radial_regularizer(vec({0, 2}), 1.0, 1.0) - vec({0, 4})) == 0.0);
}

TEST_CASE("remainder bound") {
  CHECK(remainder_bound(1.0, 2.0, 0.0) == 0.0);
  CHECK(remainder_bound(1.0, 2.0, 1.0) == 1.0);
  CHECK(remainder_bound(0.5, 1.5, 4.0) == doctest::Approx(1.5 * 8.0 / 1.5));
  // ||z|| z between (1,0) and (0,0) attains the bound with nu = 1, H = 2.
  const auto nz = testing::norm_times_z(2);
  const Vector z = vec({1, 0}), z2 = vec({0, 0});
  const double lhs = norm(nz.eval(z2) - LinearModel::at(nz, z).evaluate(z2));
  CHECK(lhs == doctest::Approx(1.0));
  CHECK(lhs <= remainder_bound(1.0, 2.0, 1.0) + 1e-15);
}

TEST_CASE("gamma and prox step") {
  CHECK(gamma_of(3.0, 0.0, 17.0) == 3.0);
  CHECK(gamma_of(3.0, 1.0, 2.0) == 6.0);
  CHECK(gamma_of(3.0, 0.5, 4.0) == 6.0);
  const auto B = FeasibleSet::ball(Vector::Zero(2), 1.0);
  CHECK(norm(prox_step(vec({0.3, 0}), Vector::Zero(2), 1.0, B) - vec({0.3, 0})) == 0.0);
  CHECK(norm(prox_step(Vector::Zero(2), vec({2, 0}), 1.0, B) - vec({-1, 0})) == 0.0);
  const auto I = FeasibleSet::box(vec({-1}), vec({1}));
  CHECK(prox_step(vec({1}), vec({0.5}), 1.0, I)(0) == 0.5);
  CHECK_THROWS_AS(prox_step(vec({1}), vec({0.5}), 0.0, I), DegenerateRegularization);
}

TEST_CASE("model VI fixtures") {
  SUBCASE("anchor already solves") {
    LinearModel lin;
    lin.anchor = vec({0.2, 0.1});
    lin.value_at_anchor = Vector::Zero(2);
    lin.jacobian_at_anchor = Matrix::Identity(2, 2);
    const auto sol = solve_model_vi(RegularizedModel(lin, 0.5, 3.0),
                                    FeasibleSet::ball(Vector::Zero(2), 1.0), 1e-12);
    CHECK(norm(sol.point - lin.anchor) == 0.0);
    CHECK(sol.residual == 0.0);
  }
  SUBCASE("golden ratio step on whole space, both paths") {
    LinearModel lin;
    lin.anchor = vec({0.6, 0.8, 0});
    lin.value_at_anchor = lin.anchor;
    lin.jacobian_at_anchor = Matrix::Identity(3, 3);
    const RegularizedModel m(lin, 1.0, 1.0);
    const double t = (std::sqrt(5.0) - 1.0) / 2.0;  // t + t^2 = 1
    for (InnerPath path : {InnerPath::Secular, InnerPath::ProjectedExtragradient}) {
      InnerOptions o;
      o.path = path;
      const auto sol = solve_model_vi(m, FeasibleSet::whole_space(3), 1e-13, o);
      CHECK(norm(sol.point - lin.anchor + t * lin.value_at_anchor) <= 1e-9);
    }
  }
  SUBCASE("ball boundary") {
    LinearModel lin;
    lin.anchor = Vector::Zero(2);
    lin.value_at_anchor = vec({1, 0});
    lin.jacobian_at_anchor = Matrix::Zero(2, 2);
    const RegularizedModel m(lin, 1.0, 1.0);
    const auto B = FeasibleSet::ball(Vector::Zero(2), 0.5);
    for (InnerPath path : {InnerPath::Secular, InnerPath::ProjectedExtragradient}) {
      InnerOptions o;
      o.path = path;
      const auto sol = solve_model_vi(m, B, 1e-13, o);
      CHECK(norm(sol.point - vec({-0.5, 0})) <= 1e-9);
    }
  }
  SUBCASE("interval fixture") {
    const auto s = LinearModel::at(testing::identity(1), vec({1}));
    const auto sol = solve_model_vi(RegularizedModel(s, 1.0, 2.0),
                                    FeasibleSet::box(vec({-1}), vec({1})), 1e-13);
    CHECK(sol.point(0) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(sol.method_used == InnerMethod::ProjectedExtragradient);
  }
}

TEST_CASE("secular and extragradient paths agree on random instances") {
  Rng rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int d = 10;
  for (int inst = 0; inst < 25; ++inst) {
    Matrix B(d, d), S(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        B(i, j) = g(rng);
        S(i, j) = g(rng);
      }
    LinearModel lin;
    lin.anchor = Vector::NullaryExpr(d, [&](Eigen::Index) { return g(rng); });
    lin.value_at_anchor = Vector::NullaryExpr(d, [&](Eigen::Index) { return g(rng); });
    lin.jacobian_at_anchor = B * B.transpose() / d + (S - S.transpose()) / 2.0;
    const RegularizedModel m(lin, u(rng), 0.5 + u(rng));
    // Ball around the anchor with a radius that is active about half the time.
    const auto set = inst % 2 == 0 ? FeasibleSet::whole_space(d)
                                   : FeasibleSet::ball(lin.anchor, 0.2 + u(rng));
    InnerOptions sec, pe;
    sec.path = InnerPath::Secular;
    pe.path = InnerPath::ProjectedExtragradient;
    const auto a = solve_model_vi(m, set, 1e-12, sec);
    const auto b = solve_model_vi(m, set, 1e-12, pe);
    CHECK(norm(a.point - b.point) <= 1e-6);
    CHECK(a.residual <= 1e-12);
  }
}

TEST_CASE("natural residual") {
  const auto B = FeasibleSet::ball(Vector::Zero(2), 1.0);
  const ModelFn G = [](const Vector& u) -> Vector { return u - vec({2, 0}); };
  // Solution of VI_B(u - (2,0)) is (1,0).
  CHECK(natural_residual(G, B, vec({1, 0})) <= 1e-15);
  CHECK(natural_residual(G, B, vec({0, 0})) > 0.5);
}

TEST_CASE("effective inner tolerance") {
  CHECK(effective_inner_tol(1e-10, vec({3, 4})) == 1e-10);
  CHECK(effective_inner_tol(1e-10, vec({1e-3, 0})) == doctest::Approx(1e-13));
  CHECK(effective_inner_tol(1e-10, vec({1e-310, 0})) == 1e-300);
}
