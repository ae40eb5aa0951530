#pragma once

#include <Eigen/Core>
#include <Eigen/Householder>
#include <Eigen/QR>
#include <cmath>
#include <functional>
#include <vector>

#include "geoquant/measure.hpp"
#include "geoquant/rng.hpp"

namespace test_helpers {

// Composite Simpson on a fixed panel grid: an integration route independent
// of the library's adaptive scheme, for use as an oracle.
inline double simpson_oracle(const std::function<double(double)>& f, double a, double b,
                             int panels = 20000) {
  const double h = (b - a) / (2 * panels);
  double acc = f(a) + f(b);
  for (int i = 1; i < 2 * panels; ++i) {
    acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

// Central-difference gradient of a scalar field.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd p = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    p[i] = x[i] + h;
    const double up = f(p);
    p[i] = x[i] - h;
    const double down = f(p);
    p[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Central-difference Jacobian of a vector field (used on gradients to get
// Hessians).
inline Eigen::MatrixXd fd_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
  const Eigen::Index d = x.size();
  Eigen::MatrixXd J(d, d);
  Eigen::VectorXd p = x;
  for (Eigen::Index i = 0; i < d; ++i) {
    p[i] = x[i] + h;
    const Eigen::VectorXd up = f(p);
    p[i] = x[i] - h;
    const Eigen::VectorXd down = f(p);
    p[i] = x[i];
    J.col(i) = (up - down) / (2.0 * h);
  }
  return J;
}

inline Eigen::VectorXd random_unit(geoquant::Rng& rng, Eigen::Index d) {
  Eigen::VectorXd u(d);
  double n = 0.0;
  do {
    for (Eigen::Index i = 0; i < d; ++i) u[i] = rng.normal();
    n = u.norm();
  } while (n < 1e-8);
  return u / n;
}

// Haar-ish random orthogonal matrix via QR of a Gaussian matrix.
inline Eigen::MatrixXd random_orthogonal(geoquant::Rng& rng, Eigen::Index d) {
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Fix the sign convention so the result is deterministic.
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  }
  return q;
}

inline geoquant::DiscreteMeasure random_measure(geoquant::Rng& rng, Eigen::Index d,
                                                int n_atoms, double scale = 1.0) {
  std::vector<Eigen::VectorXd> pts;
  for (int k = 0; k < n_atoms; ++k) {
    Eigen::VectorXd p(d);
    for (Eigen::Index i = 0; i < d; ++i) p[i] = scale * rng.normal();
    pts.push_back(std::move(p));
  }
  return geoquant::DiscreteMeasure::from_points(pts);
}

inline Eigen::VectorXd vec2(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

inline Eigen::VectorXd vec3(double x, double y, double z) {
  Eigen::VectorXd v(3);
  v << x, y, z;
  return v;
}

}  // namespace test_helpers
