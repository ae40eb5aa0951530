#include "geoquant/regularizer.hpp"

#include <cmath>
#include <limits>

#include "doctest.h"
#include "geoquant/errors.hpp"
#include "geoquant/rng.hpp"
#include "test_helpers.hpp"

using geoquant::Regularizer;
using test_helpers::vec2;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("r values of the builtin kinds") {
  CHECK(Regularizer::geometric().r(7.3) == 1.0);
  CHECK(Regularizer::power(2.0).r(0.0) == 0.0);
  CHECK(Regularizer::power(1.0).r(1.0) == doctest::Approx(0.5).epsilon(1e-14));
  const Regularizer ss = Regularizer::smoothstep(2.0);
  CHECK(ss.r(0.0) == 0.0);
  CHECK(ss.r(2.0) == 1.0);
  CHECK(ss.r(5.0) == 1.0);
  CHECK(ss.r(1.0) == doctest::Approx(0.5).epsilon(1e-14));  // 3/4 - 2/8
  CHECK_THROWS_AS(Regularizer::power(2.0).r(-0.1), std::domain_error);
}

TEST_CASE("loss primitive closed forms") {
  CHECK(Regularizer::geometric().loss(2.5) == 2.5);
  CHECK(Regularizer::power(1.0).loss(1.0) ==
        doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-14));
  // Quadrature oracle for the power(2) primitive at t = 3 (expected 2.25).
  const double oracle = test_helpers::simpson_oracle(
      [](double s) { return 1.0 - 1.0 / ((1.0 + s) * (1.0 + s)); }, 0.0, 3.0);
  CHECK(oracle == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(Regularizer::power(2.0).loss(3.0) == doctest::Approx(oracle).epsilon(1e-10));

  // Closed forms of every builtin match quadrature of r to 1e-10.
  for (const auto& reg : {Regularizer::power(0.7), Regularizer::power(1.0),
                          Regularizer::smoothstep(1.3), Regularizer::geometric()}) {
    for (const double t : {0.4, 1.0, 2.7, 9.0}) {
      const double q = test_helpers::simpson_oracle([&](double s) { return reg.r(s); },
                                                    0.0, t);
      CHECK(reg.loss(t) == doctest::Approx(q).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(Regularizer::power(2.0).loss(-1.0), std::domain_error);
}

TEST_CASE("loss gradient") {
  CHECK((Regularizer::geometric().loss_gradient(vec2(3, 4)) - vec2(0.6, 0.8)).norm() <=
        1e-15);
  CHECK(Regularizer::power(2.0).loss_gradient(vec2(0, 0)).norm() == 0.0);
  CHECK((Regularizer::power(1.0).loss_gradient(vec2(1, 0)) - vec2(0.5, 0)).norm() <=
        1e-15);
  CHECK_THROWS_AS(Regularizer::geometric().loss_gradient(vec2(0, 0)), std::domain_error);
}

TEST_CASE("loss hessian closed forms and spectral structure") {
  const Eigen::MatrixXd h_geo = Regularizer::geometric().loss_hessian(vec2(1, 0));
  CHECK(h_geo(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(h_geo(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(h_geo(0, 1) == doctest::Approx(0.0).epsilon(1e-15));

  // power(1) at (2,0): r'(2) = 1/9 along x, r(2)/2 = 1/3 across.
  const Eigen::MatrixXd h = Regularizer::power(1.0).loss_hessian(vec2(2, 0));
  CHECK(h(0, 0) == doctest::Approx(1.0 / 9).epsilon(1e-14));
  CHECK(h(1, 1) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(std::abs(h(0, 1)) <= 1e-15);

  // Eigenvalues are r'(||x||) and r(||x||)/||x||, any direction.
  geoquant::Rng rng(7);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd x = 3.0 * test_helpers::random_unit(rng, 2);
    const Regularizer reg = Regularizer::power(2.0);
    const Eigen::MatrixXd hx = reg.loss_hessian(x);
    const double radial = x.normalized().dot(hx * x.normalized());
    CHECK(radial == doctest::Approx(reg.rprime(x.norm())).epsilon(1e-12));
    CHECK(hx.trace() == doctest::Approx(reg.rprime(x.norm()) + reg.r(x.norm()) / x.norm())
                            .epsilon(1e-12));
  }
  CHECK_THROWS_AS(Regularizer::power(2.0).loss_hessian(vec2(0, 0)), std::domain_error);
}

TEST_CASE("gradient and hessian match finite differences") {
  geoquant::Rng rng(12345);
  const std::vector<Regularizer> regs = {
      Regularizer::geometric(), Regularizer::power(1.0), Regularizer::power(2.0),
      Regularizer::smoothstep(1.0)};
  int count = 0;
  while (count < 200) {
    const Regularizer& reg = regs[static_cast<std::size_t>(count) % regs.size()];
    const Eigen::Index d = (count % 2 == 0) ? 2 : 3;
    const double norm = std::exp(rng.uniform(std::log(0.1), std::log(100.0)));
    const Eigen::VectorXd x = norm * test_helpers::random_unit(rng, d);
    ++count;

    const double h1 = 1e-6 * std::max(1.0, x.norm());
    const Eigen::VectorXd fd_grad = test_helpers::fd_gradient(
        [&](const Eigen::VectorXd& p) { return reg.loss(p.norm()); }, x, h1);
    const Eigen::VectorXd grad = reg.loss_gradient(x);
    CHECK((grad - fd_grad).norm() <= 1e-6 * std::max(1.0, grad.norm()));

    const double h2 = 1e-5 * std::max(1.0, x.norm());
    const Eigen::MatrixXd fd_hess = test_helpers::fd_jacobian(
        [&](const Eigen::VectorXd& p) { return reg.loss_gradient(p); }, x, h2);
    const Eigen::MatrixXd hess = reg.loss_hessian(x);
    CHECK((hess - fd_hess).norm() <= 1e-5 * std::max(1.0, hess.norm()));
  }
}

TEST_CASE("loss is convex along segments and 1-Lipschitz") {
  geoquant::Rng rng(99);
  const std::vector<Regularizer> regs = {
      Regularizer::geometric(), Regularizer::power(2.0), Regularizer::smoothstep(1.0)};
  for (int k = 0; k < 500; ++k) {
    const Regularizer& reg = regs[static_cast<std::size_t>(k) % regs.size()];
    const Eigen::VectorXd x = 5.0 * rng.normal() * test_helpers::random_unit(rng, 2);
    const Eigen::VectorXd y = 5.0 * rng.normal() * test_helpers::random_unit(rng, 2);
    const double t = rng.uniform();
    const double lhs = reg.loss((((1.0 - t) * x + t * y)).norm());
    const double rhs = (1.0 - t) * reg.loss(x.norm()) + t * reg.loss(y.norm());
    CHECK(lhs <= rhs + 1e-12);

    const double t1 = rng.uniform(0.0, 10.0), t2 = rng.uniform(0.0, 10.0);
    CHECK(std::abs(reg.loss(t1) - reg.loss(t2)) <= std::abs(t1 - t2) + 1e-15);
  }
}

TEST_CASE("membership of the regularizer class on a sampled grid") {
  for (const Regularizer& reg :
       {Regularizer::power(0.5), Regularizer::power(3.0), Regularizer::smoothstep(2.5)}) {
    for (int i = 0; i < 200; ++i) {
      const double s = std::pow(10.0, -8.0 + 16.0 * i / 199.0);
      const double v = reg.r(s);
      CHECK(v > 0.0);
      CHECK(v <= 1.0);
      CHECK(reg.rprime(s) >= 0.0);
    }
    const double S = reg.tail_threshold(1e-6);
    CHECK(reg.r(S) >= 1.0 - 1e-6 - 1e-12);
  }
}

TEST_CASE("values at zero per kind") {
  CHECK(Regularizer::geometric().r0() == 1.0);
  CHECK(Regularizer::geometric().rprime0() == 0.0);
  CHECK(Regularizer::power(2.5).r0() == 0.0);
  CHECK(Regularizer::power(2.5).rprime0() == 2.5);
  CHECK(Regularizer::smoothstep(3.0).r0() == 0.0);
  CHECK(Regularizer::smoothstep(3.0).rprime0() == 0.0);
  CHECK(Regularizer::power(2.0).strictly_increasing());
  CHECK_FALSE(Regularizer::smoothstep(1.0).strictly_increasing());
  CHECK_FALSE(Regularizer::geometric().strictly_increasing());
}

TEST_CASE("tail limits") {
  CHECK(Regularizer::geometric().tail_limit(2.0).value == 0.0);
  CHECK(Regularizer::geometric().tail_limit(0.5).value == 0.0);
  CHECK(Regularizer::power(2.0).tail_limit(2.0).value == 1.0);
  CHECK(Regularizer::power(2.0).tail_limit(1.0).value == 0.0);
  CHECK(Regularizer::power(2.0).tail_limit(3.0).value == kInf);
  CHECK(Regularizer::smoothstep(1.0).tail_limit(5.0).value == 0.0);
  CHECK_FALSE(Regularizer::power(2.0).tail_limit(2.0).estimate);
  CHECK_THROWS_AS(Regularizer::power(2.0).tail_limit(0.0), std::domain_error);
}

TEST_CASE("custom regularizer goes through quadrature and flags its tail") {
  // power(2) in disguise: the cached-quadrature loss must match the closed form.
  const Regularizer disguised = Regularizer::custom(
      [](double s) { return 1.0 - 1.0 / ((1.0 + s) * (1.0 + s)); },
      [](double s) { return 2.0 / ((1.0 + s) * (1.0 + s) * (1.0 + s)); });
  const Regularizer closed = Regularizer::power(2.0);
  for (const double t : {0.01, 0.5, 1.0, 3.0, 17.0, 123.0, 2.5e4}) {
    CHECK(disguised.loss(t) ==
          doctest::Approx(closed.loss(t)).epsilon(1e-10));
  }
  // The estimate evaluates s^beta (1 - r(s)) at s = 1e6; the subtraction
  // near 1 caps its accuracy around 1e-4, which is why it carries a flag.
  const auto tail = disguised.tail_limit(2.0);
  CHECK(tail.estimate);
  CHECK(tail.value == doctest::Approx(1.0).epsilon(1e-3));

  CHECK_THROWS_AS(Regularizer::custom([](double) { return -0.5; }, [](double) { return 0.0; }),
                  geoquant::HypothesisError);
}

TEST_CASE("l1 distances between regularizers") {
  CHECK(geoquant::l1_distance(Regularizer::geometric(), Regularizer::geometric()) == 0.0);
  // integral of (1+s)^-2 over [0, inf) = 1, closed form vs quadrature route.
  CHECK(geoquant::l1_distance(Regularizer::geometric(), Regularizer::power(2.0)) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(geoquant::l1_distance(Regularizer::geometric(), Regularizer::power(1.0)) == kInf);
  // power pair: 1/(b1-1) - 1/(b2-1)
  CHECK(geoquant::l1_distance(Regularizer::power(2.0), Regularizer::power(4.0)) ==
        doctest::Approx(1.0 - 1.0 / 3.0).epsilon(1e-10));
  CHECK(geoquant::l1_distance(Regularizer::power(0.5), Regularizer::geometric()) == kInf);
  // smoothstep vs geometric: integral of (1 - r) over [0, tau] = tau/2.
  CHECK(geoquant::l1_distance(Regularizer::smoothstep(2.0), Regularizer::geometric()) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(geoquant::l1_distance(Regularizer::power(2.0), Regularizer::power(2.1)) ==
        doctest::Approx(1.0 - 1.0 / 1.1).epsilon(1e-9));
}

TEST_CASE("spec strings parse back") {
  CHECK(Regularizer::parse("geometric").kind() == geoquant::RegKind::Geometric);
  CHECK(Regularizer::parse("power:2.5").param() == doctest::Approx(2.5));
  CHECK(Regularizer::parse("smoothstep:0.5").param() == doctest::Approx(0.5));
  CHECK_THROWS_AS(Regularizer::parse("power"), std::invalid_argument);
  CHECK_THROWS_AS(Regularizer::parse("power:zz"), std::invalid_argument);
  CHECK_THROWS_AS(Regularizer::parse("huber:1"), std::invalid_argument);
  CHECK_THROWS_AS(Regularizer::parse("power:-1"), std::invalid_argument);
  CHECK(Regularizer::parse(Regularizer::power(3.0).spec_string()).param() ==
        doctest::Approx(3.0));
}
