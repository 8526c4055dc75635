#include "helpers.hpp"

#include <doctest.h>

using namespace hvi;
using testing::vec;

TEST_CASE("ball projection and support") {
  const auto B = FeasibleSet::ball(Vector::Zero(2), 1.0);
  CHECK(norm(B.project(vec({3, 4})) - vec({0.6, 0.8})) < 1e-15);
  CHECK(norm(B.project(vec({0.1, 0.2})) - vec({0.1, 0.2})) == 0.0);
  CHECK(norm(B.support_argmax(vec({0, -2})) - vec({0, -1})) < 1e-15);
  CHECK(norm(B.support_argmax(Vector::Zero(2))) == 0.0);
  CHECK(B.diameter() == 2.0);
  // Subnormal direction still yields a unit boundary point.
  CHECK(norm(B.support_argmax(vec({1e-320, 0}))) == doctest::Approx(1.0));
}

TEST_CASE("box projection and support") {
  const auto X = FeasibleSet::box(vec({-1, -1}), vec({1, 2}));
  CHECK(norm(X.project(vec({-3, 5})) - vec({-1, 2})) == 0.0);
  CHECK(norm(X.support_argmax(vec({-1, 0})) - vec({-1, 2})) == 0.0);
  CHECK(X.diameter() == doctest::Approx(std::sqrt(13.0)));
  CHECK_THROWS_AS(FeasibleSet::box(vec({1}), vec({0})), ConfigError);
}

TEST_CASE("whole space") {
  const auto W = FeasibleSet::whole_space(3);
  CHECK_FALSE(W.bounded());
  CHECK(std::isinf(W.diameter()));
  CHECK_THROWS_AS(W.support_argmax(vec({1, 0, 0})), UnboundedGap);
}

TEST_CASE("projection is idempotent and nonexpansive") {
  Rng rng(3);
  std::normal_distribution<double> g(0.0, 2.0);
  const auto B = FeasibleSet::ball(vec({0.5, -0.5, 0}), 0.7);
  const auto X = FeasibleSet::box(vec({-1, 0, -2}), vec({0, 1, 2}));
  for (int s = 0; s < 500; ++s) {
    Vector a(3), b(3);
    for (int i = 0; i < 3; ++i) {
      a(i) = g(rng);
      b(i) = g(rng);
    }
    for (const auto* S : {&B, &X}) {
      const Vector pa = S->project(a);
      CHECK(norm(S->project(pa) - pa) <= 1e-15);
      CHECK(S->contains(pa));
      CHECK(norm(pa - S->project(b)) <= norm(a - b) + 1e-14);
    }
  }
}

TEST_CASE("pow_nonneg uses 0^0 = 1") {
  CHECK(pow_nonneg(0.0, 0.0) == 1.0);
  CHECK(pow_nonneg(0.0, 0.5) == 0.0);
  CHECK(pow_nonneg(4.0, 0.5) == 2.0);
}

TEST_CASE("monotonicity check") {
  const auto B = FeasibleSet::ball(Vector::Zero(2), 1.0);
  const auto id = check_monotone(testing::identity(2), B, 100, 1);
  CHECK(id.monotone);
  CHECK(id.worst >= 0.0);
  const auto neg = check_monotone(testing::affine(-Matrix::Identity(2, 2)), B, 100, 1);
  CHECK_FALSE(neg.monotone);
  const auto rot = check_monotone(testing::rotation(), B, 100, 1);
  CHECK(rot.monotone);
  CHECK(std::abs(rot.worst) <= 1e-16);
}

TEST_CASE("Hölder constant estimate") {
  const auto B = FeasibleSet::ball(Vector::Zero(2), 1.0);
  CHECK(estimate_holder_constant(testing::rotation(), B, 0.5, 1000, 1) == 0.0);
  CHECK(estimate_holder_constant(testing::identity(2), B, 0.0, 1000, 1) == 0.0);
  const double h = estimate_holder_constant(testing::norm_times_z(2), B, 1.0, 10000, 1);
  CHECK(h > 0.0);
  CHECK(h <= 2.0 + 1e-9);
}

TEST_CASE("operator rejects bad input") {
  const auto id = testing::identity(2);
  CHECK_THROWS_AS(id.eval(vec({1, 2, 3})), ConfigError);
  const Operator bad(
      1, [](const Vector&) -> Vector { return Vector::Constant(1, NAN); },
      [](const Vector&) -> Matrix { return Matrix::Zero(1, 1); });
  CHECK_THROWS_AS(bad.eval(vec({0})), EvaluationError);
  CHECK_THROWS_AS(bad.higher_deriv_apply(2, vec({0}), std::vector<Vector>(2, vec({1}))),
                  UnsupportedOrder);
}

TEST_CASE("solver config validation names the key") {
  SolverConfig c;
  c.method = Method::NuRen;
  c.nu = 1.0;
  auto message = [&] {
    try {
      c.validate();
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message().find("'H'") != std::string::npos);
  c.H_nu = 2.0;
  CHECK(message().empty());
  c.K = 0;
  CHECK(message().find("'K'") != std::string::npos);
  c.K = 10;
  c.nu.reset();
  CHECK(message().find("'nu'") != std::string::npos);
  c.nu = 1.5;
  CHECK(message().find("nu") != std::string::npos);
  c.nu = 1.0;
  c.eps = 0.0;
  CHECK(message().find("eps") != std::string::npos);
}

TEST_CASE("method names round-trip") {
  for (Method m : {Method::NuRen, Method::NuAren, Method::Uren, Method::NuAret, Method::Uret,
                   Method::Extragradient}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("newton"), ConfigError);
}
