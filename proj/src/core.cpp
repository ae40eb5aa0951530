#include "geoquant/core.hpp"

#include <cmath>
#include <stdexcept>

#include "geoquant/errors.hpp"
#include "geoquant/kahan.hpp"

namespace geoquant {

QuantileIndex::QuantileIndex(double alpha_, Eigen::VectorXd u_)
    : alpha(alpha_), u(std::move(u_)) {
  if (!(alpha >= 0.0) || alpha >= 1.0) {
    throw std::domain_error("quantile order alpha must lie in [0, 1)");
  }
  const double n = u.norm();
  if (std::abs(n - 1.0) > 1e-12) {
    throw std::invalid_argument("quantile direction must be a unit vector");
  }
}

QuantileIndex QuantileIndex::from_point(const Eigen::VectorXd& v) {
  const double a = v.norm();
  if (a == 0.0) {
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(v.size());
    e1[0] = 1.0;
    return QuantileIndex(0.0, std::move(e1));
  }
  return QuantileIndex(a, v / a);
}

namespace {

void check_dims(const DiscreteMeasure& m, const Eigen::VectorXd& x) {
  if (x.size() != m.dim()) {
    throw std::invalid_argument("point dimension does not match the measure");
  }
}

}  // namespace

Eigen::VectorXd dist_fn(const DiscreteMeasure& m, const Regularizer& reg,
                        const Eigen::VectorXd& x) {
  check_dims(m, x);
  const Eigen::Index d = m.dim();
  KahanVector acc(d);
  Eigen::VectorXd diff(d);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    diff = x - m.atoms().col(i);
    const double s = diff.norm();
    if (s == 0.0) continue;  // the z = x indicator
    acc.add_scaled(diff, m.weight(i) * reg.r(s) / s);
  }
  return acc.value();
}

double objective(const DiscreteMeasure& m, const Regularizer& reg,
                 const QuantileIndex& idx, const Eigen::VectorXd& x) {
  check_dims(m, x);
  KahanScalar acc;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double to_x = (m.atoms().col(i) - x).norm();
    const double to_zero = m.atoms().col(i).norm();
    acc.add(m.weight(i) * (reg.loss(to_x) - reg.loss(to_zero)));
  }
  return acc.value() - idx.alpha * idx.u.dot(x);
}

double directional_derivative(const DiscreteMeasure& m, const Regularizer& reg,
                              const QuantileIndex& idx, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& v) {
  check_dims(m, x);
  const double vn = v.norm();
  if (vn == 0.0) throw std::domain_error("directional derivative requires v != 0");
  const double slack = reg.r0() > 0.0 ? reg.r0() * m.atom_mass(x) : 0.0;
  return slack * vn + v.dot(dist_fn(m, reg, x) - idx.alpha * idx.u);
}

Eigen::VectorXd gradient(const DiscreteMeasure& m, const Regularizer& reg,
                         const QuantileIndex& idx, const Eigen::VectorXd& x) {
  check_dims(m, x);
  if (reg.r0() > 0.0) {
    const double mass = m.atom_mass(x);
    if (mass > 0.0) {
      Eigen::VectorXd F = dist_fn(m, reg, x);
      const double slack = reg.r0() * mass;
      throw NondifferentiableError(
          "objective is not differentiable at an atom with r(0) P[{x}] = " +
              std::to_string(slack),
          std::move(F), slack);
    }
  }
  return dist_fn(m, reg, x) - idx.alpha * idx.u;
}

namespace detail {

Eigen::MatrixXd hessian_sum(const DiscreteMeasure& m, const Regularizer& reg,
                            const Eigen::VectorXd& x) {
  const Eigen::Index d = m.dim();
  KahanMatrix acc(d, d);
  Eigen::VectorXd diff(d);
  Eigen::MatrixXd term(d, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    diff = x - m.atoms().col(i);
    const double s = diff.norm();
    if (s == 0.0) continue;
    const double w = m.weight(i);
    const double radial = w * reg.r(s) / s;
    // w [ r' dd^T/s^2 + (r/s)(I - dd^T/s^2) ]
    term.noalias() =
        ((w * reg.rprime(s) - radial) / (s * s)) * (diff * diff.transpose());
    term.diagonal().array() += radial;
    acc.add(term);
  }
  return acc.value();
}

}  // namespace detail

Eigen::MatrixXd hessian(const DiscreteMeasure& m, const Regularizer& reg,
                        const QuantileIndex& /*idx*/, const Eigen::VectorXd& x) {
  check_dims(m, x);
  if ((reg.r0() > 0.0 || reg.rprime0() > 0.0) && m.atom_mass(x) > 0.0) {
    throw std::domain_error(
        "curvature is undefined at an atom unless r(0) = r'(0) = 0");
  }
  return detail::hessian_sum(m, reg, x);
}

Certificate certify_quantile(const DiscreteMeasure& m, const Regularizer& reg,
                             const QuantileIndex& idx, const Eigen::VectorXd& x,
                             double tol) {
  check_dims(m, x);
  if (!(tol >= 0.0)) throw std::domain_error("certificate tolerance must be >= 0");
  Certificate cert;
  cert.residual = (dist_fn(m, reg, x) - idx.alpha * idx.u).norm();
  cert.atom_slack = reg.r0() > 0.0 ? reg.r0() * m.atom_mass(x) : 0.0;
  cert.tol = tol;
  cert.satisfied = cert.residual <= cert.atom_slack + tol;
  cert.nearby_atom = m.nearest_atom_within(x, 1e-9);
  return cert;
}

Certificate certify_quantile(const DiscreteMeasure& m, const Regularizer& reg,
                             const QuantileIndex& idx, const Eigen::VectorXd& x) {
  check_dims(m, x);
  const double fnorm = dist_fn(m, reg, x).norm();
  return certify_quantile(m, reg, idx, x, 1e-8 * (1.0 + fnorm));
}

}  // namespace geoquant
