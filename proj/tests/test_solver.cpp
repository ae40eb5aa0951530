#include "geoquant/solver.hpp"

#include <cmath>

#include "doctest.h"
#include "geoquant/analysis.hpp"
#include "geoquant/errors.hpp"
#include "geoquant/rng.hpp"
#include "test_helpers.hpp"

using geoquant::Box;
using geoquant::DiscreteMeasure;
using geoquant::Generator;
using geoquant::QuantileIndex;
using geoquant::QuantileSolution;
using geoquant::Regularizer;
using geoquant::SolverOptions;
using geoquant::SolveStatus;
using test_helpers::vec2;
using test_helpers::vec3;

namespace {

QuantileIndex idx2(double alpha, double ux, double uy) {
  return QuantileIndex(alpha, vec2(ux, uy).normalized());
}

DiscreteMeasure equilateral() {
  const double s3 = std::sqrt(3.0);
  return DiscreteMeasure::from_points(
      {vec2(-1, -1 / s3), vec2(1, -1 / s3), vec2(0, s3 - 1 / s3)});
}

DiscreteMeasure cross_mixture_sample(std::size_t n, std::uint64_t seed) {
  return Generator::mixture(
             {{0.5, Generator::uniform_segment(vec2(-1, 0), vec2(1, 0))},
              {0.5, Generator::uniform_segment(vec2(0, -1), vec2(0, 1))}})
      .sample(n, seed);
}

double line_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& base,
                     const Eigen::VectorXd& dir) {
  const Eigen::VectorXd delta = p - base;
  return (delta - delta.dot(dir) * dir).norm();
}

}  // namespace

TEST_CASE("median of a symmetric pair") {
  const DiscreteMeasure pair = DiscreteMeasure::from_points({vec2(-1, 0), vec2(1, 0)});
  const QuantileSolution sol = quantile(pair, Regularizer::power(2.0), idx2(0.0, 1, 0));
  CHECK(sol.status == SolveStatus::Converged);
  CHECK(sol.point.norm() <= 1e-9);
  CHECK(sol.certificate.satisfied);
}

TEST_CASE("black-hole capture at a triangle vertex") {
  const DiscreteMeasure tri = equilateral();
  const Regularizer geo = Regularizer::geometric();
  const Eigen::VectorXd vertex = tri.atom(0);
  const Eigen::VectorXd center = geoquant::dist_fn(tri, geo, vertex);
  // Index strictly inside the vertex ball of radius 1/3.
  const QuantileIndex idx = QuantileIndex::from_point(center + vec2(0.1, 0.05));
  const QuantileSolution sol = quantile(tri, geo, idx);
  CHECK(sol.status == SolveStatus::AtAtom);
  CHECK((sol.point - vertex).norm() == 0.0);
  CHECK(sol.certificate.satisfied);
  CHECK(sol.certificate.atom_slack == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("agreement with the brute-force oracle on random instances") {
  geoquant::Rng rng(101);
  const Regularizer reg = Regularizer::power(2.0);
  for (int inst = 0; inst < 5; ++inst) {
    std::vector<Eigen::VectorXd> pts;
    for (int k = 0; k < 5; ++k) pts.push_back(vec2(rng.uniform(), rng.uniform()));
    const DiscreteMeasure m = DiscreteMeasure::from_points(pts);
    const QuantileIndex idx = idx2(0.5, 1, 0);
    const QuantileSolution sol = quantile(m, reg, idx);
    REQUIRE(sol.status == SolveStatus::Converged);

    // Square box: the bounding box scaled by 3 about its center, widened to
    // the longest side so a thin cloud cannot pinch the grid.
    const Eigen::VectorXd lo = m.atoms().rowwise().minCoeff();
    const Eigen::VectorXd hi = m.atoms().rowwise().maxCoeff();
    const Eigen::VectorXd mid = 0.5 * (lo + hi);
    const Eigen::VectorXd half =
        Eigen::VectorXd::Constant(2, 1.5 * (hi - lo).maxCoeff());
    const Box box{mid - half, mid + half};
    const int res = 201;
    const Eigen::VectorXd brute = brute_force_quantile(m, reg, idx, box, res);
    const double cell = (box.hi - box.lo).maxCoeff() / (res - 1);
    // Oracle sanity: the grid argmin must be interior, else the box clipped it.
    for (int i = 0; i < 2; ++i) {
      REQUIRE(brute[i] > box.lo[i] + cell / 2);
      REQUIRE(brute[i] < box.hi[i] - cell / 2);
    }
    CHECK((sol.point - brute).norm() <= 2.0 * cell);
  }
}

TEST_CASE("single Dirac quantiles sit at distance r^{-1}(alpha) along u") {
  const DiscreteMeasure dirac = DiscreteMeasure::from_points({vec2(0, 0)});
  const Regularizer reg = Regularizer::power(1.0);
  // alpha = r(1) = 1/2 puts the quantile at distance 1.
  const QuantileSolution sol = quantile(dirac, reg, idx2(0.5, 1, 0));
  CHECK((sol.point - vec2(1, 0)).norm() <= 1e-8);
  CHECK(sol.certificate.satisfied);

  const Box box{vec2(-2, -2), vec2(2, 2)};
  const Eigen::VectorXd brute = brute_force_quantile(dirac, reg, idx2(0.5, 1, 0), box, 401);
  CHECK((brute - vec2(1, 0)).norm() <= 2.0 * 4.0 / 400);
}

TEST_CASE("brute force guards") {
  const DiscreteMeasure pair = DiscreteMeasure::from_points({vec2(-1, 0), vec2(1, 0)});
  const Box box{vec2(-2, -2), vec2(2, 2)};
  const Eigen::VectorXd argmin =
      brute_force_quantile(pair, Regularizer::power(2.0), idx2(0.0, 1, 0), box, 41);
  CHECK(argmin.norm() <= 4.0 / 40 + 1e-12);  // grid point nearest the origin
  CHECK_THROWS_AS(
      brute_force_quantile(pair, Regularizer::power(2.0), idx2(0.0, 1, 0), box, 5),
      std::invalid_argument);
  std::vector<Eigen::VectorXd> pts4;
  for (int k = 0; k < 3; ++k) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(4);
    p[0] = k;
    pts4.push_back(p);
  }
  const DiscreteMeasure m4 = DiscreteMeasure::from_points(pts4);
  Box box4{Eigen::VectorXd::Constant(4, -1.0), Eigen::VectorXd::Constant(4, 1.0)};
  CHECK_THROWS_AS(brute_force_quantile(m4, Regularizer::power(2.0),
                                       QuantileIndex(0.5, Eigen::VectorXd::Unit(4, 0)),
                                       box4, 11),
                  std::invalid_argument);
}

TEST_CASE("contours of an exact circle grid are spherical") {
  const DiscreteMeasure circle = Generator::circle_grid(1.0, 64).sample(1, 0);
  const auto ring = contour(circle, Regularizer::power(2.0), 0.5, 32);
  REQUIRE(ring.size() == 32);
  double lo = 1e30, hi = 0.0;
  for (const auto& entry : ring) {
    REQUIRE(entry.error.empty());
    CHECK(entry.solution.certificate.satisfied);
    const double n = entry.solution.point.norm();
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  CHECK(hi - lo <= 1e-6);
}

TEST_CASE("alpha zero contour collapses to the median") {
  geoquant::Rng rng(7);
  const DiscreteMeasure m = test_helpers::random_measure(rng, 2, 21);
  const auto ring = contour(m, Regularizer::power(2.0), 0.0, 8);
  const Eigen::VectorXd median = ring.front().solution.point;
  for (const auto& entry : ring) {
    CHECK((entry.solution.point - median).norm() <= 1e-7);
  }
}

TEST_CASE("large beta contours approach the geometric contour") {
  const DiscreteMeasure m = cross_mixture_sample(1000, 2024);
  SolverOptions opts;
  const auto geo_ring = contour(m, Regularizer::geometric(), 0.99, 32, opts);
  const auto pow_ring = contour(m, Regularizer::power(10.0), 0.99, 32, opts);
  double scale = 0.0;
  for (const auto& entry : geo_ring) scale += entry.solution.point.norm() / 32.0;
  auto hausdorff = [](const auto& a, const auto& b) {
    double worst = 0.0;
    for (const auto& ea : a) {
      double best = 1e300;
      for (const auto& eb : b) {
        best = std::min(best, (ea.solution.point - eb.solution.point).norm());
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  const double h = std::max(hausdorff(geo_ring, pow_ring), hausdorff(pow_ring, geo_ring));
  CHECK(h <= 0.1 * scale);
}

TEST_CASE("contour arcs with threads match the sequential result") {
  const DiscreteMeasure m = cross_mixture_sample(200, 99);
  SolverOptions seq;
  SolverOptions par;
  par.threads = 4;
  const auto a = contour(m, Regularizer::power(2.0), 0.7, 24, seq);
  const auto b = contour(m, Regularizer::power(2.0), 0.7, 24, par);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK((a[k].solution.point - b[k].solution.point).norm() <= 1e-9);
  }
}

TEST_CASE("caller-supplied directions drive contours in three dimensions") {
  geoquant::Rng rng(88);
  const DiscreteMeasure m = test_helpers::random_measure(rng, 3, 25);
  std::vector<Eigen::VectorXd> dirs;
  for (int k = 0; k < 6; ++k) dirs.push_back(test_helpers::random_unit(rng, 3));
  const auto ring = contour(m, Regularizer::power(2.0), 0.4, dirs);
  REQUIRE(ring.size() == 6);
  for (const auto& entry : ring) {
    REQUIRE(entry.error.empty());
    CHECK(entry.solution.certificate.satisfied);
  }
  // Angular grids are two-dimensional only.
  CHECK_THROWS_AS(contour(m, Regularizer::power(2.0), 0.4, 8), std::invalid_argument);
}

TEST_CASE("per-direction failures are recorded, not propagated") {
  const DiscreteMeasure m = DiscreteMeasure::from_points({vec2(-1, 0), vec2(1, 0), vec2(0, 1)});
  // alpha = 1 fails the index precondition in every direction.
  const auto ring = contour(m, Regularizer::power(2.0), 1.0, 4);
  REQUIRE(ring.size() == 4);
  for (const auto& entry : ring) CHECK_FALSE(entry.error.empty());
}

TEST_CASE("octahedron radial profile agrees with the axis solve") {
  const DiscreteMeasure octa = DiscreteMeasure::from_points(
      {vec3(1, 0, 0), vec3(-1, 0, 0), vec3(0, 1, 0), vec3(0, -1, 0), vec3(0, 0, 1),
       vec3(0, 0, -1)});
  const Regularizer reg = Regularizer::power(2.0);
  const double lambda = geoquant::radial_profile(octa, reg, 0.5);
  const QuantileSolution sol = quantile(octa, reg, QuantileIndex(0.5, vec3(1, 0, 0)));
  CHECK((sol.point - lambda * vec3(1, 0, 0)).norm() <= 1e-8);
}

TEST_CASE("custom regularizers solve like their closed-form twin") {
  const Regularizer closed = Regularizer::power(1.5);
  const Regularizer custom = Regularizer::custom(
      [](double s) { return 1.0 - std::pow(1.0 + s, -1.5); },
      [](double s) { return 1.5 * std::pow(1.0 + s, -2.5); });
  geoquant::Rng rng(21);
  const DiscreteMeasure m = test_helpers::random_measure(rng, 2, 15);
  for (const double alpha : {0.0, 0.5, 0.9}) {
    const QuantileIndex idx(alpha, vec2(0.6, 0.8));
    const QuantileSolution a = quantile(m, closed, idx);
    const QuantileSolution b = quantile(m, custom, idx);
    CHECK(a.status == SolveStatus::Converged);
    CHECK(b.status == SolveStatus::Converged);
    CHECK((a.point - b.point).norm() <= 1e-9);
  }
}

TEST_CASE("inverse round trips") {
  const DiscreteMeasure m = Generator::uniform_disk(1.0).sample(200, 31);
  const Regularizer reg = Regularizer::power(2.0);

  // The median round-trips to itself.
  const QuantileSolution med = quantile(m, reg, idx2(0.0, 1, 0));
  CHECK(geoquant::inverse_roundtrip(m, reg, med.point) <= 1e-7);

  geoquant::Rng rng(77);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd x = vec2(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2));
    if (m.atom_mass(x) > 0.0) continue;
    worst = std::max(worst, geoquant::inverse_roundtrip(m, reg, x));
  }
  CHECK(worst <= 1e-6);

  CHECK_THROWS_AS(geoquant::inverse_roundtrip(m, Regularizer::geometric(), m.atom(0)),
                  geoquant::HypothesisError);
}

TEST_CASE("radial profile") {
  // Single Dirac at the origin: phi(lambda) = r(lambda).
  Eigen::VectorXd origin = Eigen::VectorXd::Zero(2);
  const DiscreteMeasure dirac = DiscreteMeasure::from_points({origin});
  CHECK(geoquant::radial_profile(dirac, Regularizer::power(1.0), 0.5) ==
        doctest::Approx(1.0).epsilon(1e-10));

  // Half the mass at the origin with geometric weighting: flat to alpha = 1/2.
  std::vector<Eigen::VectorXd> pts{origin};
  std::vector<double> ws{0.5};
  const DiscreteMeasure ring_data = Generator::circle_grid(1.0, 8).sample(1, 0);
  for (Eigen::Index i = 0; i < ring_data.size(); ++i) {
    pts.push_back(ring_data.atom(i));
    ws.push_back(0.5 / 8);
  }
  const DiscreteMeasure half = DiscreteMeasure::from_points(pts, ws);
  CHECK(geoquant::radial_profile(half, Regularizer::geometric(), 0.0) == 0.0);
  CHECK(geoquant::radial_profile(half, Regularizer::geometric(), 0.3) == 0.0);
  CHECK(geoquant::radial_profile(half, Regularizer::geometric(), 0.5) == 0.0);
  CHECK(geoquant::radial_profile(half, Regularizer::geometric(), 0.7) > 0.0);

  // Cross-method agreement with the full solver on a dense circle grid.
  const DiscreteMeasure circle = Generator::circle_grid(1.0, 360).sample(1, 0);
  const double lambda = geoquant::radial_profile(circle, Regularizer::power(2.0), 0.5);
  const QuantileSolution sol = quantile(circle, Regularizer::power(2.0), idx2(0.5, 1, 0));
  CHECK(std::abs(lambda - sol.point.norm()) <= 1e-6);

  // Symmetry precondition.
  const DiscreteMeasure skew = DiscreteMeasure::from_points({vec2(0, 0), vec2(1, 0)});
  CHECK_THROWS_AS(geoquant::radial_profile(skew, Regularizer::power(2.0), 0.5),
                  geoquant::HypothesisError);
}

TEST_CASE("equivariance over random rigid motions") {
  geoquant::Rng rng(404);
  const DiscreteMeasure m = test_helpers::random_measure(rng, 2, 20);
  const Regularizer reg = Regularizer::power(2.0);
  for (int k = 0; k < 50; ++k) {
    const Eigen::MatrixXd O = test_helpers::random_orthogonal(rng, 2);
    const Eigen::VectorXd b = vec2(rng.normal(), rng.normal());
    const double alpha = rng.uniform(0.0, 0.9);
    const QuantileIndex idx(alpha, test_helpers::random_unit(rng, 2));
    CHECK(geoquant::equivariance_residual(m, reg, idx, O, b) <= 1e-8);
  }
}

TEST_CASE("subspace confinement for plane-supported data") {
  geoquant::Rng rng(55);
  // Atoms on the plane z = 1 in R^3.
  std::vector<Eigen::VectorXd> pts;
  for (int k = 0; k < 12; ++k) pts.push_back(vec3(rng.normal(), rng.normal(), 1.0));
  const DiscreteMeasure m = DiscreteMeasure::from_points(pts);
  const QuantileIndex idx(0.5, vec3(std::sqrt(0.5), std::sqrt(0.5), 0));
  const QuantileSolution sol = quantile(m, Regularizer::power(2.0), idx);
  CHECK(sol.status == SolveStatus::Converged);
  CHECK(std::abs(sol.point[2] - 1.0) <= 1e-8);
}

TEST_CASE("monotone escape of extreme quantiles") {
  const DiscreteMeasure m = Generator::uniform_disk(1.0).sample(300, 12);
  const Regularizer reg = Regularizer::power(2.0);
  const Eigen::VectorXd u = vec2(1, 0);
  SolverOptions opts;
  double prev = 0.0;
  Eigen::VectorXd last(2);
  for (const double alpha : {0.9, 0.99, 0.999, 0.9999}) {
    const QuantileSolution sol = quantile(m, reg, QuantileIndex(alpha, u), opts);
    REQUIRE(sol.certificate.satisfied);
    CHECK(sol.point.norm() > prev);
    prev = sol.point.norm();
    opts.start = sol.point;
    last = sol.point;
  }
  CHECK(prev > 10.0 * m.diameter());
  const double angle = std::acos(std::min(1.0, last.normalized().dot(u)));
  CHECK(angle <= 1e-2);
}

TEST_CASE("line-supported data with orthogonal direction solves off the line") {
  std::vector<Eigen::VectorXd> pts;
  for (int k = -5; k <= 5; ++k) pts.push_back(vec2(0.3 * k, 0.0));
  const DiscreteMeasure m = DiscreteMeasure::from_points(pts);
  const QuantileIndex idx = idx2(0.5, 0, 1);  // u orthogonal to the support
  const QuantileSolution sol = quantile(m, Regularizer::power(2.0), idx);
  CHECK(sol.status == SolveStatus::Converged);
  CHECK(sol.certificate.satisfied);
  CHECK(line_distance(sol.point, vec2(0, 0), vec2(1, 0)) > 1e-10);
}

TEST_CASE("degenerate line status for a parallel direction") {
  std::vector<Eigen::VectorXd> pts;
  for (int k = -2; k <= 2; ++k) pts.push_back(vec2(k, 0.0));
  const DiscreteMeasure m = DiscreteMeasure::from_points(pts);
  const Regularizer ss = Regularizer::smoothstep(0.5);
  const QuantileSolution sol = quantile(m, ss, idx2(0.5, 1, 0));
  CHECK(sol.status == SolveStatus::DegenerateLine);
  CHECK(sol.certificate.satisfied);
  REQUIRE(sol.line_reduction.has_value());
  CHECK(sol.line_reduction->projected_atoms.size() == 5);
  CHECK(std::abs(sol.point[1]) <= 1e-12);  // solution stays on the line

  // Geometric with a parallel direction is captured by an atom instead.
  const QuantileSolution geo = quantile(m, Regularizer::geometric(), idx2(0.5, 1, 0));
  CHECK(geo.status == SolveStatus::AtAtom);
  CHECK(geo.certificate.satisfied);
}

TEST_CASE("no quantile of order one: norms blow up as alpha approaches 1") {
  const DiscreteMeasure m = Generator::uniform_disk(1.0).sample(100, 5);
  const Regularizer reg = Regularizer::power(2.0);
  SolverOptions opts;
  opts.max_iter = 500;
  double norm = 0.0;
  for (const double alpha : {0.9, 0.999, 0.99999, 0.999999}) {
    const QuantileSolution sol = quantile(m, reg, QuantileIndex(alpha, vec2(0, 1)), opts);
    REQUIRE(sol.certificate.satisfied);
    opts.start = sol.point;
    norm = sol.point.norm();
  }
  CHECK(norm > 300.0);  // ~ sqrt(ell / 1e-6)
  CHECK_THROWS_AS(QuantileIndex(1.0, vec2(0, 1)), std::domain_error);
}

TEST_CASE("solver options are validated and traces are recorded") {
  const DiscreteMeasure m = DiscreteMeasure::from_points({vec2(-1, 0), vec2(1, 0), vec2(0, 1)});
  SolverOptions bad;
  bad.grad_tol = 0.0;
  CHECK_THROWS_AS(quantile(m, Regularizer::power(2.0), idx2(0.5, 1, 0), bad),
                  std::invalid_argument);

  SolverOptions tracing;
  tracing.keep_trace = true;
  const QuantileSolution sol = quantile(m, Regularizer::power(2.0), idx2(0.5, 1, 0), tracing);
  REQUIRE(sol.trace.size() >= 2);
  // Residuals fall along the accepted iterates.
  CHECK(sol.trace.back().residual < sol.trace.front().residual);
}
